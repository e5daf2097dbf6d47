#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "mesbench/data/timeseries.hpp"

namespace mesbench::data {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Calendar {
	double hour;        // 0..24 UTC
	double day_of_year; // 0..365
	int weekday;        // 0 = Monday
};

Calendar calendar(std::int64_t epoch) {
	const std::int64_t days = epoch >= 0 ? epoch / 86400 : (epoch - 86399) / 86400;
	const double hour = static_cast<double>(epoch - days * 86400) / 3600.0;
	// 1970-01-01 was a Thursday.
	const int weekday = static_cast<int>(((days % 7) + 7 + 3) % 7);
	const double doy = std::fmod(static_cast<double>(days) - 0.0, 365.2425);
	return {hour, doy < 0 ? doy + 365.2425 : doy, weekday};
}

// Zero-mean AR(1) noise with stationary standard deviation `sd`.
class Ar1 {
public:
	Ar1(std::uint64_t seed, double phi, double sd) : rng_(seed), phi_(phi), innov_(sd * std::sqrt(1.0 - phi * phi)) {
		state_ = sd * normal_(rng_);
	}
	double next() {
		state_ = phi_ * state_ + innov_ * normal_(rng_);
		return state_;
	}

private:
	std::mt19937_64 rng_;
	std::normal_distribution<double> normal_{0.0, 1.0};
	double phi_;
	double innov_;
	double state_ = 0.0;
};

std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
	std::uint64_t z = seed * 0x9E3779B97F4A7C15ULL + stream * 0xBF58476D1CE4E5B9ULL + 0x94D049BB133111EBULL;
	z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
	z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
	return z ^ (z >> 31);
}

TimeSeries make_series(const TimeGrid &grid, const std::string &name) {
	TimeSeries ts;
	ts.grid = grid;
	ts.unit = unit_of(name);
	ts.values.resize(grid.n_steps);
	return ts;
}

void scale_to_peak(TimeSeries &ts, double peak) {
	const double m = ts.max();
	if (m > 0.0)
		for (double &v : ts.values)
			v *= peak / m;
}

} // namespace

Profiles synth_profiles(std::uint64_t seed, const TimeGrid &grid, const MesConfig &cfg) {
	const double steps_per_hour = 3600.0 / grid.step_s;
	const double phi_hourly = std::exp(-1.0 / (3.0 * steps_per_hour)); // ~3 h correlation

	auto th = make_series(grid, kThermalDemand);
	auto el = make_series(grid, kElectricDemand);
	auto ws = make_series(grid, kWindSpeed);
	auto ir = make_series(grid, kIrradiance);
	auto px = make_series(grid, kPrice);

	Ar1 th_noise(mix(seed, 1), phi_hourly, 0.06);
	Ar1 el_noise(mix(seed, 2), phi_hourly, 0.06);
	Ar1 wind_noise(mix(seed, 3), std::exp(-1.0 / (8.0 * steps_per_hour)), 2.2);
	Ar1 cloud_noise(mix(seed, 4), std::exp(-1.0 / (12.0 * steps_per_hour)), 0.3);
	Ar1 price_noise(mix(seed, 5), phi_hourly, 4.0);

	for (std::size_t k = 0; k < grid.n_steps; ++k) {
		const auto c = calendar(grid.timestamp(k));
		const double h = c.hour;
		const double weekly = std::cos(kTwoPi * c.weekday / 7.0);
		const bool weekend = c.weekday >= 5;
		const double winter = std::cos(kTwoPi * (c.day_of_year - 15.0) / 365.2425); // +1 mid-January

		// Demands: daily and weekly harmonics plus correlated noise.
		th.values[k] = std::max(0.05, 1.0 + 0.30 * std::sin(kTwoPi * (h - 6.0) / 24.0) +
		                                  0.10 * std::sin(2.0 * kTwoPi * h / 24.0) + 0.08 * weekly + th_noise.next());
		el.values[k] = std::max(0.05, 1.0 + 0.28 * std::sin(kTwoPi * (h - 9.0) / 24.0) +
		                                  0.12 * std::sin(2.0 * kTwoPi * (h - 3.0) / 24.0) - (weekend ? 0.10 : 0.0) +
		                                  el_noise.next());

		// Weather: seasonal plus diurnal.
		ws.values[k] = std::max(0.0, 6.5 + 1.5 * winter + 0.6 * std::sin(kTwoPi * (h - 10.0) / 24.0) + wind_noise.next());
		const double half_day = 6.0 - 2.5 * winter; // hours from solar noon to sunset
		const double from_noon = h - 12.0;
		double sun = 0.0;
		if (std::abs(from_noon) < half_day)
			sun = std::cos(0.5 * std::numbers::pi * from_noon / half_day);
		const double clear_sky = 600.0 - 300.0 * winter;
		const double cloud = std::clamp(0.75 + cloud_noise.next(), 0.15, 1.0);
		ir.values[k] = sun * clear_sky * cloud;

		// Day-ahead price (currency/MWh): morning and evening peaks.
		const double shape = 38.0 + 14.0 * std::exp(-0.5 * std::pow((h - 8.0) / 1.8, 2)) +
		                     20.0 * std::exp(-0.5 * std::pow((h - 19.0) / 2.2, 2)) -
		                     6.0 * std::exp(-0.5 * std::pow((h - 3.5) / 2.5, 2)) - (weekend ? 7.0 : 0.0) +
		                     5.0 * winter;
		px.values[k] = std::max(5.0, shape + price_noise.next()) / 1.0e6;
	}

	scale_to_peak(th, 0.6 * cfg.heat_capacity());
	scale_to_peak(el, 0.6 * cfg.electric_capacity());

	return {{kThermalDemand, th}, {kElectricDemand, el}, {kWindSpeed, ws}, {kIrradiance, ir}, {kPrice, px}};
}

Profiles synth_profiles(std::uint64_t seed, const TimeGrid &grid, CaseLabel case_label) {
	return synth_profiles(seed, grid, case_label == CaseLabel::simple ? case1_config() : case2_config());
}

} // namespace mesbench::data
