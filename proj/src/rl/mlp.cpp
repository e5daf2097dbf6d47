#include "mesbench/rl/mlp.hpp"

#include <cmath>

#include "mesbench/core/errors.hpp"

namespace mesbench::rl {

std::size_t MlpParams::input_size() const { return layers.empty() ? 0 : layers.front().w.cols(); }
std::size_t MlpParams::output_size() const { return layers.empty() ? 0 : layers.back().w.rows(); }

std::size_t MlpParams::num_params() const {
	std::size_t n = 0;
	for (const auto &l : layers)
		n += l.w.size() + l.b.size();
	return n;
}

std::vector<int> MlpParams::sizes() const {
	std::vector<int> s;
	if (layers.empty())
		return s;
	s.push_back(static_cast<int>(layers.front().w.cols()));
	for (const auto &l : layers)
		s.push_back(static_cast<int>(l.w.rows()));
	return s;
}

bool MlpParams::finite() const {
	for (const auto &l : layers)
		if (!l.w.allFinite() || !l.b.allFinite())
			return false;
	return true;
}

VectorXd MlpParams::flat() const {
	VectorXd theta(num_params());
	Eigen::Index k = 0;
	for (const auto &l : layers) {
		theta.segment(k, l.w.size()) = Eigen::Map<const VectorXd>(l.w.data(), l.w.size());
		k += l.w.size();
		theta.segment(k, l.b.size()) = l.b;
		k += l.b.size();
	}
	return theta;
}

void MlpParams::assign(const VectorXd &theta) {
	if (static_cast<std::size_t>(theta.size()) != num_params())
		throw ShapeError("mlp: flat parameter vector has " + std::to_string(theta.size()) + " entries, expected " +
		                 std::to_string(num_params()));
	Eigen::Index k = 0;
	for (auto &l : layers) {
		Eigen::Map<VectorXd>(l.w.data(), l.w.size()) = theta.segment(k, l.w.size());
		k += l.w.size();
		l.b = theta.segment(k, l.b.size());
		k += l.b.size();
	}
}

MlpParams MlpParams::zeros_like() const {
	MlpParams z = *this;
	for (auto &l : z.layers) {
		l.w.setZero();
		l.b.setZero();
	}
	return z;
}

MlpParams make_mlp(const std::vector<int> &sizes, std::mt19937_64 &rng, double out_gain) {
	if (sizes.size() < 2)
		throw ShapeError("mlp: need at least an input and an output size");
	MlpParams p;
	for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
		const int in = sizes[i], out = sizes[i + 1];
		if (in <= 0 || out <= 0)
			throw ShapeError("mlp: layer sizes must be positive");
		const double lim = std::sqrt(6.0 / (in + out)) * (i + 2 == sizes.size() ? out_gain : 1.0);
		std::uniform_real_distribution<double> u(-lim, lim);
		Layer l{MatrixXd(out, in), VectorXd::Zero(out)};
		for (Eigen::Index c = 0; c < l.w.cols(); ++c)
			for (Eigen::Index r = 0; r < l.w.rows(); ++r)
				l.w(r, c) = u(rng);
		p.layers.push_back(std::move(l));
	}
	return p;
}

MatrixXd mlp_forward(const MlpParams &p, const MatrixXd &x, MlpCache *cache) {
	if (p.layers.empty())
		throw ShapeError("mlp: no layers");
	if (static_cast<std::size_t>(x.rows()) != p.input_size())
		throw ShapeError("mlp: input has " + std::to_string(x.rows()) + " rows, expected " +
		                 std::to_string(p.input_size()));
	if (cache) {
		cache->acts.clear();
		cache->acts.push_back(x);
	}
	MatrixXd h = x;
	for (std::size_t i = 0; i < p.layers.size(); ++i) {
		const auto &l = p.layers[i];
		MatrixXd z = l.w * h;
		z.colwise() += l.b;
		if (i + 1 < p.layers.size())
			z = z.array().tanh().matrix();
		h = std::move(z);
		if (cache)
			cache->acts.push_back(h);
	}
	return h;
}

VectorXd mlp_forward(const MlpParams &p, const VectorXd &x) {
	MatrixXd xm = x;
	return mlp_forward(p, xm, nullptr).col(0);
}

MlpParams mlp_grad(const MlpParams &p, const MlpCache &cache, const MatrixXd &upstream, MatrixXd *input_grad) {
	if (cache.acts.size() != p.layers.size() + 1)
		throw ShapeError("mlp: cache does not match the network");
	if (static_cast<std::size_t>(upstream.rows()) != p.output_size() || upstream.cols() != cache.acts[0].cols())
		throw ShapeError("mlp: upstream gradient has the wrong shape");
	MlpParams g = p.zeros_like();
	MatrixXd delta = upstream;
	for (std::size_t i = p.layers.size(); i-- > 0;) {
		if (i + 1 < p.layers.size())
			delta = (delta.array() * (1.0 - cache.acts[i + 1].array().square())).matrix();
		g.layers[i].w.noalias() = delta * cache.acts[i].transpose();
		g.layers[i].b = delta.rowwise().sum();
		if (i > 0 || input_grad) {
			MatrixXd next = p.layers[i].w.transpose() * delta;
			delta = std::move(next);
		}
	}
	if (input_grad)
		*input_grad = std::move(delta);
	return g;
}

MlpParams mlp_grad(const MlpParams &p, const VectorXd &x, const VectorXd &upstream) {
	MlpCache cache;
	MatrixXd xm = x;
	mlp_forward(p, xm, &cache);
	MatrixXd up = upstream;
	return mlp_grad(p, cache, up);
}

void Adam::step(VectorXd &theta, VectorXd grad, double max_grad_norm) {
	if (grad.size() != theta.size())
		throw ShapeError("adam: gradient and parameters differ in size");
	if (!grad.allFinite())
		throw NumericalError("adam: non-finite gradient");
	if (m_.size() != theta.size()) {
		m_ = VectorXd::Zero(theta.size());
		v_ = VectorXd::Zero(theta.size());
		t_ = 0;
	}
	if (max_grad_norm > 0.0) {
		const double norm = grad.norm();
		if (norm > max_grad_norm)
			grad *= max_grad_norm / norm;
	}
	++t_;
	m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
	v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
	const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
	const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
	theta.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

void polyak_update(MlpParams &target, const MlpParams &source, double rho) {
	if (target.layers.size() != source.layers.size())
		throw ShapeError("polyak: networks differ in depth");
	for (std::size_t i = 0; i < target.layers.size(); ++i) {
		auto &t = target.layers[i];
		const auto &s = source.layers[i];
		if (t.w.rows() != s.w.rows() || t.w.cols() != s.w.cols())
			throw ShapeError("polyak: layer shapes differ");
		t.w = rho * t.w + (1.0 - rho) * s.w;
		t.b = rho * t.b + (1.0 - rho) * s.b;
	}
}

} // namespace mesbench::rl
