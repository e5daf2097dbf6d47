#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace mesbench::rl {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Layer {
	MatrixXd w; // out x in
	VectorXd b; // out
};

// tanh on every hidden layer, identity on the last one.
struct MlpParams {
	std::vector<Layer> layers;

	std::size_t input_size() const;
	std::size_t output_size() const;
	std::size_t num_params() const;
	std::vector<int> sizes() const;
	bool finite() const;

	VectorXd flat() const;
	void assign(const VectorXd &theta); // inverse of flat(), ShapeError on size mismatch
	MlpParams zeros_like() const;
};

// Glorot-uniform weights, zero biases; the last layer is scaled by out_gain.
MlpParams make_mlp(const std::vector<int> &sizes, std::mt19937_64 &rng, double out_gain = 1.0);

// Post-activation outputs of every layer; acts[0] is the input batch.
struct MlpCache {
	std::vector<MatrixXd> acts;
};

// Batched forward pass, one sample per column.
MatrixXd mlp_forward(const MlpParams &p, const MatrixXd &x, MlpCache *cache = nullptr);
VectorXd mlp_forward(const MlpParams &p, const VectorXd &x);

// Reverse-mode gradient of sum_k upstream(:, k) . y(:, k) with respect to every
// parameter. Optionally returns d/dx as well.
MlpParams mlp_grad(const MlpParams &p, const MlpCache &cache, const MatrixXd &upstream, MatrixXd *input_grad = nullptr);
MlpParams mlp_grad(const MlpParams &p, const VectorXd &x, const VectorXd &upstream);

// Adam on a flat parameter vector (minimizes). max_grad_norm > 0 rescales the
// gradient to that global norm first.
class Adam {
public:
	explicit Adam(double lr = 3e-4, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
	    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

	void step(VectorXd &theta, VectorXd grad, double max_grad_norm = 0.0);
	double learning_rate() const { return lr_; }
	void set_learning_rate(double lr) { lr_ = lr; }
	std::int64_t steps() const { return t_; }

private:
	double lr_, beta1_, beta2_, eps_;
	std::int64_t t_ = 0;
	VectorXd m_, v_;
};

// In-place polyak averaging: target = rho * target + (1 - rho) * source.
void polyak_update(MlpParams &target, const MlpParams &source, double rho);

} // namespace mesbench::rl
