#pragma once

#include <random>
#include <string>

#include "mesbench/rl/env.hpp"
#include "mesbench/rl/mlp.hpp"

namespace mesbench::rl {

// Stochastic policy for PPO. Continuous: diagonal Gaussian whose mean comes
// from the network and whose log-std is a free parameter vector. Multi-discrete:
// the network emits tau logits per action dimension.
struct Policy {
	ActionMode mode = ActionMode::continuous;
	int act_dim = 0;
	int tau = 5;
	MlpParams net;
	VectorXd log_std; // continuous only

	std::size_t num_params() const { return net.num_params() + log_std.size(); }
	VectorXd flat() const;
	void assign(const VectorXd &theta);
	Policy zeros_like() const;
};

Policy make_policy(ActionMode mode, int obs_dim, int act_dim, int tau, int hidden, std::mt19937_64 &rng);

// Per-sample log-probabilities of `actions` (columns) given network outputs.
// Multi-discrete actions hold level indices 0..tau-1.
VectorXd log_prob(const Policy &p, const MatrixXd &out, const MatrixXd &actions);
VectorXd entropy(const Policy &p, const MatrixXd &out);

// Maps a sampled action to normalized [-1, 1] setpoints (continuous values are clipped).
VectorXd to_normalized(const Policy &p, const VectorXd &action);

struct SampledAction {
	VectorXd action;     // what the buffer stores (Gaussian draw or level indices)
	VectorXd normalized; // what the environment receives
	double logp = 0.0;
};

// Deterministic mode returns the mean / per-dimension argmax.
SampledAction sample_action(const Policy &p, const VectorXd &obs, std::mt19937_64 &rng, bool deterministic = false);

enum class NoiseType { normal, ornstein_uhlenbeck };

std::string to_string(NoiseType t);
NoiseType noise_type_from_string(const std::string &s);

// Exploration noise for TD3, in normalized action units.
class ActionNoise {
public:
	ActionNoise(NoiseType type, int dim, double sigma, double theta = 0.15, double dt = 1.0, double mu = 0.0);
	VectorXd sample(std::mt19937_64 &rng);
	void reset();
	const VectorXd &state() const { return x_; }
	void set_state(const VectorXd &x) { x_ = x; }

private:
	NoiseType type_;
	double sigma_, theta_, dt_, mu_;
	VectorXd x_;
};

} // namespace mesbench::rl
