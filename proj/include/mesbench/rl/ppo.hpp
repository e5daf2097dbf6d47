#pragma once

#include <cstdint>
#include <random>

#include "mesbench/rl/agent.hpp"
#include "mesbench/rl/buffers.hpp"
#include "mesbench/rl/policy.hpp"

namespace mesbench::rl {

struct PpoHyper {
	double gamma = 0.9;
	double learning_rate = 3.843e-4;
	int nminibatches = 2;
	int n_steps = 256;
	double ent_coef = 1.226e-6;
	double cliprange = 0.3;
	int noptepochs = 10;
	double lambda = 0.8;
	double vf_coef = 0.5;
	double max_grad_norm = 0.5;
	int hidden = 64;

	static PpoHyper defaults(CaseLabel c);
	void check() const; // DomainError on violations
};

struct PpoBatch {
	MatrixXd obs;     // obs_dim x B
	MatrixXd actions; // act_dim x B
	VectorXd logp_old, advantages, returns;
};

// Clipped surrogate mean_k min(r_k A_k, clip(r_k, 1-eps, 1+eps) A_k) on the
// advantages as given. grad (optional) receives its gradient.
double ppo_surrogate(const Policy &pi, const PpoBatch &b, double cliprange, Policy *grad = nullptr);

struct PpoLoss {
	double surrogate = 0.0;
	double entropy = 0.0;
	double value_loss = 0.0;
	double total = 0.0; // -(surrogate + ent_coef * entropy) + vf_coef * value_loss
	double clip_fraction = 0.0;
	double approx_kl = 0.0;
	Policy policy_grad;    // d total / d policy
	MlpParams value_grad;  // d total / d value net
};

// Advantages are normalized to mean 0, std 1 over the batch first when asked.
PpoLoss ppo_loss(const Policy &pi, const MlpParams &value, const PpoBatch &b, const PpoHyper &h,
                 bool normalize_advantages = true);

struct PpoStats {
	double policy_loss = 0.0, value_loss = 0.0, entropy = 0.0, clip_fraction = 0.0, approx_kl = 0.0;
	std::size_t updates = 0;
};

class PpoAgent : public Agent {
public:
	PpoAgent(EnvSpec spec, PpoHyper h, std::uint64_t seed);

	std::string kind() const override { return "ppo"; }
	VectorXd act(const VectorXd &obs) const override;
	void train(Env &env, std::size_t steps, const StepHook &hook = {}) override;
	void save(std::ostream &out) const override;

	// One optimisation phase over a full rollout.
	PpoStats update(const RolloutBuffer &buf, double bootstrap_value);

	const PpoHyper &hyper() const { return h_; }
	Policy policy;
	MlpParams value;

private:
	PpoHyper h_;
	std::uint64_t seed_;
	std::mt19937_64 rng_;
	Adam opt_;
	std::uint64_t episodes_ = 0;

	friend std::unique_ptr<Agent> load_agent(std::istream &in);
};

} // namespace mesbench::rl
