#pragma once

// Central finite differences for gradient checks.

#include <Eigen/Dense>
#include <algorithm>

namespace gradcheck {

template <class F> Eigen::VectorXd central(const Eigen::VectorXd &theta, F f, double h = 1e-6) {
	Eigen::VectorXd g(theta.size());
	Eigen::VectorXd t = theta;
	for (Eigen::Index i = 0; i < theta.size(); ++i) {
		const double keep = t[i];
		t[i] = keep + h;
		const double up = f(t);
		t[i] = keep - h;
		const double down = f(t);
		t[i] = keep;
		g[i] = (up - down) / (2.0 * h);
	}
	return g;
}

// ||a - b|| / max(||a||, ||b||), 0 when both vanish
inline double rel_error(const Eigen::VectorXd &a, const Eigen::VectorXd &b) {
	const double scale = std::max(a.norm(), b.norm());
	return scale == 0.0 ? 0.0 : (a - b).norm() / scale;
}

} // namespace gradcheck
