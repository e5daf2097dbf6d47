#pragma once

#include <span>

#include "mesbench/data/timeseries.hpp"

namespace mesbench::data {

// Coefficient of determination 1 - SS_res / SS_tot. Throws DegenerateError
// for constant ground truth.
double r2_score(std::span<const double> y, std::span<const double> y_hat);
double r2_score(const TimeSeries &y, const TimeSeries &y_hat);

// Mean of |y - y_hat| / max(eps, |y|).
double mape(std::span<const double> y, std::span<const double> y_hat, double eps = 1e-9);
double mape(const TimeSeries &y, const TimeSeries &y_hat, double eps = 1e-9);

// MAPE over points whose truth exceeds threshold_frac * max|y| (near-zero
// truth, e.g. night-time irradiance, is left out of the average).
double mape_excluding_small(std::span<const double> y, std::span<const double> y_hat, double threshold_frac = 0.01,
                            double eps = 1e-9);

} // namespace mesbench::data
