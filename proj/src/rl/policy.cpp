#include "mesbench/rl/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mesbench/core/errors.hpp"

namespace mesbench::rl {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

// log-softmax of one block of logits
void log_softmax(const double *z, int n, double *out) {
	double mx = z[0];
	for (int i = 1; i < n; ++i)
		mx = std::max(mx, z[i]);
	double s = 0.0;
	for (int i = 0; i < n; ++i)
		s += std::exp(z[i] - mx);
	const double lse = mx + std::log(s);
	for (int i = 0; i < n; ++i)
		out[i] = z[i] - lse;
}

} // namespace

VectorXd Policy::flat() const {
	VectorXd theta(num_params());
	theta.head(net.num_params()) = net.flat();
	theta.tail(log_std.size()) = log_std;
	return theta;
}

void Policy::assign(const VectorXd &theta) {
	if (static_cast<std::size_t>(theta.size()) != num_params())
		throw ShapeError("policy: flat parameter vector has the wrong size");
	net.assign(theta.head(net.num_params()));
	log_std = theta.tail(log_std.size());
}

Policy Policy::zeros_like() const {
	Policy z = *this;
	z.net = net.zeros_like();
	z.log_std.setZero();
	return z;
}

Policy make_policy(ActionMode mode, int obs_dim, int act_dim, int tau, int hidden, std::mt19937_64 &rng) {
	if (act_dim <= 0)
		throw ShapeError("policy: action dimension must be positive");
	Policy p;
	p.mode = mode;
	p.act_dim = act_dim;
	p.tau = tau;
	const int out = mode == ActionMode::continuous ? act_dim : act_dim * tau;
	p.net = make_mlp({obs_dim, hidden, hidden, out}, rng, 0.01);
	p.log_std = mode == ActionMode::continuous ? VectorXd::Zero(act_dim) : VectorXd();
	return p;
}

VectorXd log_prob(const Policy &p, const MatrixXd &out, const MatrixXd &actions) {
	const Eigen::Index b = out.cols();
	if (actions.cols() != b || actions.rows() != p.act_dim)
		throw ShapeError("log_prob: action batch has the wrong shape");
	VectorXd lp(b);
	if (p.mode == ActionMode::continuous) {
		const double log_det = p.log_std.sum();
		const VectorXd inv_std = (-p.log_std).array().exp();
		for (Eigen::Index k = 0; k < b; ++k) {
			const VectorXd z = (actions.col(k) - out.col(k)).cwiseProduct(inv_std);
			lp[k] = -0.5 * z.squaredNorm() - log_det - 0.5 * kLog2Pi * p.act_dim;
		}
		return lp;
	}
	std::vector<double> ls(p.tau);
	for (Eigen::Index k = 0; k < b; ++k) {
		double s = 0.0;
		for (int d = 0; d < p.act_dim; ++d) {
			log_softmax(out.col(k).data() + d * p.tau, p.tau, ls.data());
			const int level = static_cast<int>(std::lround(actions(d, k)));
			if (level < 0 || level >= p.tau)
				throw RangeError("log_prob: level out of range");
			s += ls[level];
		}
		lp[k] = s;
	}
	return lp;
}

VectorXd entropy(const Policy &p, const MatrixXd &out) {
	const Eigen::Index b = out.cols();
	VectorXd h(b);
	if (p.mode == ActionMode::continuous) {
		h.setConstant(p.log_std.sum() + 0.5 * (kLog2Pi + 1.0) * p.act_dim);
		return h;
	}
	std::vector<double> ls(p.tau);
	for (Eigen::Index k = 0; k < b; ++k) {
		double s = 0.0;
		for (int d = 0; d < p.act_dim; ++d) {
			log_softmax(out.col(k).data() + d * p.tau, p.tau, ls.data());
			for (int i = 0; i < p.tau; ++i)
				s -= std::exp(ls[i]) * ls[i];
		}
		h[k] = s;
	}
	return h;
}

VectorXd to_normalized(const Policy &p, const VectorXd &action) {
	VectorXd u(action.size());
	for (Eigen::Index i = 0; i < action.size(); ++i)
		u[i] = p.mode == ActionMode::continuous ? std::clamp(action[i], -1.0, 1.0)
		                                        : level_value(static_cast<int>(std::lround(action[i])), p.tau);
	return u;
}

SampledAction sample_action(const Policy &p, const VectorXd &obs, std::mt19937_64 &rng, bool deterministic) {
	const VectorXd out = mlp_forward(p.net, obs);
	SampledAction s;
	s.action.resize(p.act_dim);
	if (p.mode == ActionMode::continuous) {
		std::normal_distribution<double> n(0.0, 1.0);
		for (int d = 0; d < p.act_dim; ++d)
			s.action[d] = deterministic ? out[d] : out[d] + std::exp(p.log_std[d]) * n(rng);
	} else {
		std::vector<double> ls(p.tau);
		std::uniform_real_distribution<double> u(0.0, 1.0);
		for (int d = 0; d < p.act_dim; ++d) {
			log_softmax(out.data() + d * p.tau, p.tau, ls.data());
			int pick = 0;
			if (deterministic) {
				pick = static_cast<int>(std::max_element(ls.begin(), ls.end()) - ls.begin());
			} else {
				double r = u(rng), acc = 0.0;
				pick = p.tau - 1;
				for (int i = 0; i < p.tau; ++i) {
					acc += std::exp(ls[i]);
					if (r < acc) {
						pick = i;
						break;
					}
				}
			}
			s.action[d] = pick;
		}
	}
	MatrixXd o = out, a = s.action;
	s.logp = log_prob(p, o, a)[0];
	s.normalized = to_normalized(p, s.action);
	return s;
}

std::string to_string(NoiseType t) { return t == NoiseType::normal ? "normal" : "ornstein_uhlenbeck"; }

NoiseType noise_type_from_string(const std::string &s) {
	if (s == "normal")
		return NoiseType::normal;
	if (s == "ornstein_uhlenbeck" || s == "ou")
		return NoiseType::ornstein_uhlenbeck;
	throw ParseError("unknown noise type '" + s + "'");
}

ActionNoise::ActionNoise(NoiseType type, int dim, double sigma, double theta, double dt, double mu)
    : type_(type), sigma_(sigma), theta_(theta), dt_(dt), mu_(mu), x_(VectorXd::Constant(dim, mu)) {
	if (sigma < 0.0)
		throw DomainError("noise sigma must be >= 0");
}

void ActionNoise::reset() { x_.setConstant(mu_); }

VectorXd ActionNoise::sample(std::mt19937_64 &rng) {
	std::normal_distribution<double> n(0.0, 1.0);
	if (type_ == NoiseType::normal) {
		for (Eigen::Index i = 0; i < x_.size(); ++i)
			x_[i] = sigma_ * n(rng);
		return x_;
	}
	for (Eigen::Index i = 0; i < x_.size(); ++i)
		x_[i] = x_[i] + theta_ * (mu_ - x_[i]) * dt_ + sigma_ * std::sqrt(dt_) * n(rng);
	return x_;
}

} // namespace mesbench::rl
