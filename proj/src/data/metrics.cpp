#include "mesbench/data/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "mesbench/core/errors.hpp"

namespace mesbench::data {

double r2_score(std::span<const double> y, std::span<const double> y_hat) {
	if (y.size() != y_hat.size())
		throw ShapeError("r2_score: length mismatch");
	if (y.size() < 2)
		throw ShapeError("r2_score: need at least two samples");
	double mean = 0.0;
	for (double v : y)
		mean += v;
	mean /= static_cast<double>(y.size());
	double ss_res = 0.0, ss_tot = 0.0;
	for (std::size_t i = 0; i < y.size(); ++i) {
		ss_res += (y[i] - y_hat[i]) * (y[i] - y_hat[i]);
		ss_tot += (y[i] - mean) * (y[i] - mean);
	}
	if (ss_tot == 0.0)
		throw DegenerateError("r2_score: ground truth is constant");
	return 1.0 - ss_res / ss_tot;
}

double r2_score(const TimeSeries &y, const TimeSeries &y_hat) { return r2_score(y.values, y_hat.values); }

double mape(std::span<const double> y, std::span<const double> y_hat, double eps) {
	if (y.size() != y_hat.size())
		throw ShapeError("mape: length mismatch");
	if (y.empty())
		throw ShapeError("mape: empty input");
	double s = 0.0;
	for (std::size_t i = 0; i < y.size(); ++i)
		s += std::abs(y[i] - y_hat[i]) / std::max(eps, std::abs(y[i]));
	return s / static_cast<double>(y.size());
}

double mape(const TimeSeries &y, const TimeSeries &y_hat, double eps) { return mape(y.values, y_hat.values, eps); }

double mape_excluding_small(std::span<const double> y, std::span<const double> y_hat, double threshold_frac,
                            double eps) {
	if (y.size() != y_hat.size())
		throw ShapeError("mape: length mismatch");
	double peak = 0.0;
	for (double v : y)
		peak = std::max(peak, std::abs(v));
	const double thr = threshold_frac * peak;
	double s = 0.0;
	std::size_t n = 0;
	for (std::size_t i = 0; i < y.size(); ++i) {
		if (std::abs(y[i]) <= thr)
			continue;
		s += std::abs(y[i] - y_hat[i]) / std::max(eps, std::abs(y[i]));
		++n;
	}
	if (n == 0)
		throw DegenerateError("mape: no samples above the exclusion threshold");
	return s / static_cast<double>(n);
}

} // namespace mesbench::data
