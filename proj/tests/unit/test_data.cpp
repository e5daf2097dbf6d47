#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "mesbench/core/errors.hpp"
#include "mesbench/data/forecast.hpp"
#include "mesbench/data/metrics.hpp"
#include "mesbench/data/timeseries.hpp"

using namespace mesbench;
using Catch::Approx;

namespace {

TimeGrid day_grid() {
	TimeGrid g;
	g.n_steps = 96;
	return g;
}

std::string hourly_csv(int hours, double (*f)(int)) {
	std::ostringstream s;
	s << "timestamp,x_el[currency/Wh]\n";
	for (int h = 0; h < hours; ++h)
		s << data::format_iso8601(1546300800 + 3600 * h) << ',' << f(h) << '\n';
	return s.str();
}

data::TimeSeries year_series(const std::string &name, CaseLabel c = CaseLabel::simple) {
	TimeGrid g;
	g.n_steps = 35040;
	return data::synth_profiles(1, g, c).at(name);
}

} // namespace

TEST_CASE("iso timestamps round trip", "[data][io]") {
	CHECK(data::parse_iso8601("2019-01-01T00:00:00Z") == 1546300800);
	CHECK(data::parse_iso8601("2019-01-01T00:15:00Z") == 1546301700);
	CHECK(data::format_iso8601(1546301700) == "2019-01-01T00:15:00Z");
	CHECK(data::parse_iso8601(data::format_iso8601(1583020800)) == 1583020800); // 2020-03-01
	CHECK_THROWS_AS(data::parse_iso8601("yesterday"), ParseError);
}

TEST_CASE("hourly file is interpolated onto the 15-minute grid", "[data][io]") {
	std::istringstream in(hourly_csv(24, [](int h) { return 10.0 * h; }));
	const auto ts = data::parse_timeseries_csv(in, "currency/Wh", day_grid());
	REQUIRE(ts.size() == 96);
	for (int k = 0; k < 92; ++k)
		REQUIRE(ts.values[k] == Approx(2.5 * k).margin(1e-12));
	// after the last source point the value is held
	CHECK(ts.values[95] == 230.0);
}

TEST_CASE("empty file is a parse error", "[data][io]") {
	std::istringstream in("");
	CHECK_THROWS_AS(data::parse_timeseries_csv(in, "", day_grid()), ParseError);
	std::istringstream header_only("timestamp,x_el\n");
	CHECK_THROWS_AS(data::parse_timeseries_csv(header_only, "", day_grid()), ParseError);
}

TEST_CASE("a three-hour hole is a gap error", "[data][io]") {
	std::ostringstream s;
	for (int h : {0, 1, 4, 5})
		s << data::format_iso8601(1546300800 + 3600 * h) << ",1.0\n";
	std::istringstream in(s.str());
	TimeGrid g;
	g.n_steps = 20;
	CHECK_THROWS_AS(data::parse_timeseries_csv(in, "", g), GapError);
}

TEST_CASE("unit mismatch is a unit error", "[data][io]") {
	std::istringstream in("timestamp,e_th[W]\n2019-01-01T00:00:00Z,1\n2019-01-01T00:15:00Z,2\n");
	TimeGrid g;
	g.n_steps = 2;
	CHECK_THROWS_AS(data::parse_timeseries_csv(in, "m/s", g), UnitError);
}

TEST_CASE("malformed rows are parse errors", "[data][io]") {
	std::istringstream a("2019-01-01T00:00:00Z;5\n");
	CHECK_THROWS_AS(data::parse_timeseries_csv(a, "", day_grid()), ParseError);
	std::istringstream b("2019-01-01T00:00:00Z,abc\n");
	CHECK_THROWS_AS(data::parse_timeseries_csv(b, "", day_grid()), ParseError);
}

TEST_CASE("written series read back identically", "[data][io]") {
	TimeGrid g;
	g.n_steps = 192;
	const auto p = data::synth_profiles(9, g, CaseLabel::complex);
	for (const auto &[name, ts] : p) {
		std::ostringstream out;
		data::write_timeseries_csv(out, ts, name);
		std::istringstream in(out.str());
		const auto back = data::parse_timeseries_csv(in, data::unit_of(name), g);
		for (std::size_t k = 0; k < ts.size(); ++k)
			REQUIRE(back.values[k] == Approx(ts.values[k]).epsilon(1e-11).margin(1e-300));
	}
}

TEST_CASE("synthetic profiles", "[data][synth]") {
	TimeGrid g;
	g.n_steps = 35040;
	const auto a = data::synth_profiles(1, g, CaseLabel::simple);
	const auto b = data::synth_profiles(1, g, CaseLabel::simple);
	for (const auto &[name, ts] : a) {
		REQUIRE(ts.values == b.at(name).values);
		for (double v : ts.values)
			REQUIRE((std::isfinite(v) && v >= 0.0));
	}
	CHECK(a.at(data::kThermalDemand).max() <= 0.6 * 14e6 * (1 + 1e-12));
	CHECK(a.at(data::kThermalDemand).max() >= 0.5 * 14e6);
	for (std::size_t day = 0; day < 365; ++day)
		REQUIRE(a.at(data::kIrradiance).values[day * 96] == 0.0);
	const auto c = data::synth_profiles(2, g, CaseLabel::simple);
	CHECK(c.at(data::kPrice).values != a.at(data::kPrice).values);
}

TEST_CASE("r2 examples", "[data][metrics]") {
	const std::vector<double> y{1, 2, 3};
	CHECK(data::r2_score(y, y) == 1.0);
	CHECK(data::r2_score(y, std::vector<double>{2, 2, 2}) == 0.0);
	CHECK(data::r2_score(y, std::vector<double>{1, 2, 4}) == Approx(0.5));
	CHECK_THROWS_AS(data::r2_score(std::vector<double>{1, 1, 1}, y), DegenerateError);
}

TEST_CASE("mape examples", "[data][metrics]") {
	const std::vector<double> y{1, 2, 3};
	CHECK(data::mape(y, y) == 0.0);
	CHECK(data::mape(y, std::vector<double>{1, 2, 4}) == Approx(1.0 / 9.0));
	CHECK(data::mape(std::vector<double>{0.0}, std::vector<double>{1.0}) == Approx(1e9));
}

TEST_CASE("mape can leave out near-zero truth", "[data][metrics]") {
	const std::vector<double> y{0.0, 0.0, 100.0, 200.0}, yh{5.0, 5.0, 110.0, 200.0};
	CHECK(data::mape_excluding_small(y, yh) == Approx(0.05));
}

TEST_CASE("calibration hits the thermal target", "[data][forecast]") {
	const auto th = year_series(data::kThermalDemand);
	CHECK(data::calibrate_noise_sigma(th, 0.0, 1) == 0.0);
	const double sigma = data::calibrate_noise_sigma(th, 0.09, 1);
	data::SeriesTarget t{data::kThermalDemand, 0.94, 0.09, true, false, sigma, sigma * th.mean_abs()};
	const auto f = data::make_forecast(th, &t, 4, 0, th.size());
	const double m = data::mape(th, f);
	CHECK(m >= 0.085);
	CHECK(m <= 0.095);
}

TEST_CASE("irradiance calibration excludes the night", "[data][forecast]") {
	const auto irr = year_series(data::kIrradiance);
	data::CalibrationOptions opt;
	opt.exclude_zeros = true;
	const double sigma = data::calibrate_noise_sigma(irr, 0.37, 2, opt);
	data::SeriesTarget t{data::kIrradiance, 0.69, 0.37, true, true, sigma, sigma * irr.mean_abs()};
	const auto f = data::make_forecast(irr, &t, 5, 0, irr.size());
	CHECK(std::abs(data::mape_excluding_small(irr.values, f.values) - 0.37) < 0.02);
	for (double v : f.values)
		REQUIRE(v >= 0.0);
}

TEST_CASE("zero-mean series cannot be calibrated", "[data][forecast]") {
	data::TimeSeries z;
	z.values.assign(10, 0.0);
	CHECK_THROWS_AS(data::calibrate_noise_sigma(z, 0.1, 1), DegenerateError);
}

TEST_CASE("forecast behaviour", "[data][forecast]") {
	TimeGrid g;
	g.n_steps = 2000;
	const auto p = data::synth_profiles(3, g, CaseLabel::complex);
	const auto &el = p.at(data::kElectricDemand);
	data::SeriesTarget t{data::kElectricDemand, 0.95, 0.12, true, false, 0.15, 0.15 * el.mean_abs()};

	SECTION("perfect mode returns the slice") {
		const auto f = data::make_forecast(el, nullptr, 1, 100, 288);
		REQUIRE(f.size() == 288);
		for (std::size_t k = 0; k < 288; ++k)
			REQUIRE(f.values[k] == el.values[100 + k]);
		data::SeriesTarget zero = t;
		zero.sigma = zero.noise_scale = 0.0;
		CHECK(data::make_forecast(el, &zero, 1, 100, 288).values == f.values);
	}
	SECTION("noise lowers the fit") {
		const auto f = data::make_forecast(el, &t, 1, 0, 1000);
		const auto truth = el.slice(0, 1000);
		CHECK(data::r2_score(truth, f) < 1.0);
		CHECK(data::mape(truth, f) > 0.0);
		for (double v : f.values)
			REQUIRE(v >= 0.0);
	}
	SECTION("same seed and start give the same forecast") {
		CHECK(data::make_forecast(el, &t, 7, 30, 96).values == data::make_forecast(el, &t, 7, 30, 96).values);
		CHECK(data::make_forecast(el, &t, 7, 30, 96).values != data::make_forecast(el, &t, 8, 30, 96).values);
	}
	SECTION("windows past the data are range errors") {
		CHECK_THROWS_AS(data::make_forecast(el, &t, 1, 1900, 288), RangeError);
	}
	SECTION("forecast frames cover every exogenous input") {
		auto spec = data::default_forecast_targets(CaseLabel::complex, 3);
		data::calibrate(spec, p);
		const auto frames = data::forecast_frames(p, &spec, 10, 48);
		REQUIRE(frames.size() == 48);
		const auto exact = data::forecast_frames(p, nullptr, 10, 48);
		CHECK(exact[5].e_th_demand == p.at(data::kThermalDemand).values[15]);
		for (const auto &f : frames)
			REQUIRE((f.e_el_demand >= 0.0 && f.irradiance >= 0.0 && f.wind_speed >= 0.0));
	}
}

TEST_CASE("target tables", "[data][forecast]") {
	const auto s = data::default_forecast_targets(CaseLabel::simple, 0);
	CHECK(s.find(data::kElectricDemand)->mape_target == 0.04);
	CHECK(s.find(data::kThermalDemand)->mape_target == 0.09);
	CHECK(s.find(data::kPrice)->mape_target == 0.06);
	CHECK(s.find(data::kIrradiance)->mape_target == 0.37);
	CHECK(s.find(data::kIrradiance)->exclude_zeros);
	CHECK(s.find(data::kWindSpeed)->mape_target == 0.25);
	CHECK(s.perfect());
}
