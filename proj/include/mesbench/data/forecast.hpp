#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mesbench/data/timeseries.hpp"

namespace mesbench::data {

struct SeriesTarget {
	std::string name;
	double r2_target = 1.0;
	double mape_target = 0.0;
	bool nonnegative = true;
	bool exclude_zeros = false; // MAPE over non-negligible truth only
	double sigma = 0.0;         // calibrated noise scale, relative to mean |series|
	double noise_scale = 0.0;   // sigma * mean|series| of the calibration series
};

struct ForecastSpec {
	std::vector<SeriesTarget> series;
	std::uint64_t seed = 0;

	const SeriesTarget *find(const std::string &name) const;
	bool perfect() const;
};

// Forecast-accuracy targets of the imperfect-foresight MPC for each case.
ForecastSpec default_forecast_targets(CaseLabel case_label, std::uint64_t seed);

struct CalibrationOptions {
	bool nonnegative = true;
	bool exclude_zeros = false;
	double tolerance = 0.005;
	int draws = 16;
	int max_iterations = 64;
};

// Bisection on sigma so that the MAPE of series + sigma*mean|series|*N(0,1)
// (clipped at 0 for non-negative quantities) hits mape_target, averaged over
// `draws` seeded noise draws.
double calibrate_noise_sigma(const TimeSeries &series, double mape_target, std::uint64_t seed,
                             const CalibrationOptions &opt = {});

// Calibrates every series of spec against the given profiles in place.
void calibrate(ForecastSpec &spec, const Profiles &profiles);

// Forecast of series[t0, t0+n). Perfect when target is null or sigma == 0;
// otherwise i.i.d. Gaussian noise, deterministic in (seed, t0, name).
TimeSeries make_forecast(const TimeSeries &series, const SeriesTarget *target, std::uint64_t seed, std::size_t t0,
                         std::size_t n);

// Forecast of all exogenous inputs over [t0, t0+n).
std::vector<plant::ExogenousFrame> forecast_frames(const Profiles &profiles, const ForecastSpec *spec, std::size_t t0,
                                                   std::size_t n);

} // namespace mesbench::data
