#include "mesbench/data/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "mesbench/core/errors.hpp"
#include "mesbench/data/metrics.hpp"

namespace mesbench::data {

const SeriesTarget *ForecastSpec::find(const std::string &name) const {
	for (const auto &s : series)
		if (s.name == name)
			return &s;
	return nullptr;
}

bool ForecastSpec::perfect() const {
	return std::all_of(series.begin(), series.end(), [](const SeriesTarget &s) { return s.sigma == 0.0; });
}

ForecastSpec default_forecast_targets(CaseLabel case_label, std::uint64_t seed) {
	ForecastSpec spec;
	spec.seed = seed;
	if (case_label == CaseLabel::simple) {
		spec.series = {
		    {kElectricDemand, 0.95, 0.04, true, false},
		    {kThermalDemand, 0.94, 0.09, true, false},
		    {kPrice, 0.86, 0.06, true, false},
		    {kIrradiance, 0.69, 0.37, true, true},
		    {kWindSpeed, 0.78, 0.25, true, true},
		};
	} else {
		spec.series = {
		    {kElectricDemand, 0.95, 0.12, true, false},
		    {kThermalDemand, 0.95, 0.08, true, false},
		    {kPrice, 0.85, 0.08, true, false},
		    {kIrradiance, 0.70, 0.37, true, true},
		    {kWindSpeed, 0.70, 0.36, true, true},
		};
	}
	return spec;
}

namespace {

std::uint64_t fnv1a(const std::string &s) {
	std::uint64_t h = 1469598103934665603ULL;
	for (unsigned char c : s) {
		h ^= c;
		h *= 1099511628211ULL;
	}
	return h;
}

std::uint64_t splitmix(std::uint64_t z) {
	z += 0x9E3779B97F4A7C15ULL;
	z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
	z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
	return z ^ (z >> 31);
}

double noisy_value(double y, double amplitude, double z, bool nonnegative) {
	const double v = y + amplitude * z;
	return nonnegative ? std::max(0.0, v) : v;
}

} // namespace

double calibrate_noise_sigma(const TimeSeries &series, double mape_target, std::uint64_t seed,
                             const CalibrationOptions &opt) {
	if (mape_target < 0.0)
		throw DomainError("mape_target must be >= 0");
	const double scale = series.mean_abs();
	if (!(scale > 0.0))
		throw DegenerateError("calibrate_noise_sigma: series has zero mean absolute value");
	if (mape_target == 0.0)
		return 0.0;

	const std::size_t n = series.size();
	// Common random numbers: one fixed set of standard normal draws for every sigma,
	// which makes the averaged MAPE non-decreasing in sigma.
	std::vector<double> z(n * static_cast<std::size_t>(opt.draws));
	std::mt19937_64 rng(splitmix(seed ^ 0xC0FFEEULL));
	std::normal_distribution<double> normal(0.0, 1.0);
	for (double &v : z)
		v = normal(rng);

	std::vector<double> noisy(n);
	auto achieved = [&](double sigma) {
		double total = 0.0;
		for (int d = 0; d < opt.draws; ++d) {
			const double *zd = z.data() + static_cast<std::size_t>(d) * n;
			for (std::size_t i = 0; i < n; ++i)
				noisy[i] = noisy_value(series.values[i], sigma * scale, zd[i], opt.nonnegative);
			total += opt.exclude_zeros ? mape_excluding_small(series.values, noisy) : mape(series.values, noisy);
		}
		return total / opt.draws;
	};

	double lo = 0.0, hi = std::max(1e-3, mape_target);
	int it = 0;
	while (achieved(hi) < mape_target) {
		lo = hi;
		hi *= 2.0;
		if (++it > opt.max_iterations)
			throw NoConvergence("calibrate_noise_sigma: cannot bracket the MAPE target");
	}
	for (int i = 0; i < opt.max_iterations; ++i) {
		const double mid = 0.5 * (lo + hi);
		const double m = achieved(mid);
		if (std::abs(m - mape_target) <= opt.tolerance * 0.5)
			return mid;
		if (m < mape_target)
			lo = mid;
		else
			hi = mid;
	}
	const double mid = 0.5 * (lo + hi);
	if (std::abs(achieved(mid) - mape_target) <= opt.tolerance)
		return mid;
	throw NoConvergence("calibrate_noise_sigma: bisection did not reach the MAPE target");
}

void calibrate(ForecastSpec &spec, const Profiles &profiles) {
	for (auto &s : spec.series) {
		auto it = profiles.find(s.name);
		if (it == profiles.end())
			throw RangeError("no profile named '" + s.name + "' to calibrate");
		CalibrationOptions opt;
		opt.nonnegative = s.nonnegative;
		opt.exclude_zeros = s.exclude_zeros;
		s.sigma = calibrate_noise_sigma(it->second, s.mape_target, spec.seed ^ fnv1a(s.name), opt);
		s.noise_scale = s.sigma * it->second.mean_abs();
	}
}

TimeSeries make_forecast(const TimeSeries &series, const SeriesTarget *target, std::uint64_t seed, std::size_t t0,
                         std::size_t n) {
	if (t0 + n > series.size())
		throw RangeError("forecast window [" + std::to_string(t0) + ", " + std::to_string(t0 + n) +
		                 ") exceeds series of length " + std::to_string(series.size()));
	TimeSeries out = series.slice(t0, n);
	if (target == nullptr || target->sigma == 0.0)
		return out;
	const double amplitude = target->noise_scale > 0.0 ? target->noise_scale : target->sigma * series.mean_abs();
	std::mt19937_64 rng(splitmix(seed ^ splitmix(t0 + 0x51ED270BULL) ^ fnv1a(target->name)));
	std::normal_distribution<double> normal(0.0, 1.0);
	for (double &v : out.values)
		v = noisy_value(v, amplitude, normal(rng), target->nonnegative);
	return out;
}

std::vector<plant::ExogenousFrame> forecast_frames(const Profiles &profiles, const ForecastSpec *spec, std::size_t t0,
                                                   std::size_t n) {
	auto fc = [&](const char *name) {
		auto it = profiles.find(name);
		if (it == profiles.end())
			throw RangeError(std::string("profiles lack series '") + name + "'");
		const SeriesTarget *target = spec ? spec->find(name) : nullptr;
		return make_forecast(it->second, target, spec ? spec->seed : 0, t0, n);
	};
	const auto th = fc(kThermalDemand);
	const auto el = fc(kElectricDemand);
	const auto ws = fc(kWindSpeed);
	const auto ir = fc(kIrradiance);
	const auto px = fc(kPrice);
	std::vector<plant::ExogenousFrame> frames(n);
	for (std::size_t k = 0; k < n; ++k)
		frames[k] = {ws.values[k], ir.values[k], th.values[k], el.values[k], px.values[k]};
	return frames;
}

} // namespace mesbench::data
