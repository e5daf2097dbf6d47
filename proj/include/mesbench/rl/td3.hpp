#pragma once

#include <cstdint>
#include <random>

#include "mesbench/rl/agent.hpp"
#include "mesbench/rl/buffers.hpp"
#include "mesbench/rl/policy.hpp"

namespace mesbench::rl {

struct Td3Hyper {
	double gamma = 0.9;
	double learning_rate = 3.833e-4;
	int batch_size = 100;
	int buffer_size = 100000;
	int train_freq = 2000;
	int gradient_steps = 2000;
	NoiseType noise_type = NoiseType::normal;
	double noise_std = 0.329;
	int policy_delay = 2;
	double target_noise = 0.2;
	double target_clip = 0.5;
	double rho = 0.995; // polyak factor of the target networks
	int learning_starts = 100;
	int hidden = 64;

	static Td3Hyper defaults(CaseLabel c);
	void check() const;
};

struct Td3Nets {
	MlpParams actor, q1, q2;
	MlpParams actor_targ, q1_targ, q2_targ;
};

// mu(s) = tanh(net(s)), bounded to [-1, 1].
MatrixXd actor_forward(const MlpParams &actor, const MatrixXd &s, MlpCache *cache = nullptr);
// Q(s, a) on stacked [s; a] columns.
VectorXd critic_forward(const MlpParams &q, const MatrixXd &s, const MatrixXd &a, MlpCache *cache = nullptr);

// a' = clip(mu + clip(eps, -c, c), lo, hi), elementwise.
MatrixXd target_actions(const MatrixXd &mu, const MatrixXd &eps, double c, double lo = -1.0, double hi = 1.0);
// y = r + gamma (1 - d) min(q1, q2)
VectorXd td3_backup(const VectorXd &r, const VectorXd &d, const VectorXd &q1, const VectorXd &q2, double gamma);
// Full target: draws eps ~ N(0, target_noise) from rng.
VectorXd td3_target(const ReplayBatch &b, const Td3Nets &n, const Td3Hyper &h, std::mt19937_64 &rng);

class Td3Agent : public Agent {
public:
	Td3Agent(EnvSpec spec, Td3Hyper h, std::uint64_t seed);

	std::string kind() const override { return "td3"; }
	VectorXd act(const VectorXd &obs) const override;
	void train(Env &env, std::size_t steps, const StepHook &hook = {}) override;
	void save(std::ostream &out) const override;

	// gradient_steps iterations of critic descent; actor ascent and polyak
	// averaging on every policy_delay-th critic update.
	void update(const ReplayBuffer &rb, int gradient_steps);

	const Td3Hyper &hyper() const { return h_; }
	std::size_t critic_updates() const { return critic_updates_; }
	std::size_t policy_updates() const { return policy_updates_; }

	Td3Nets nets;

private:
	Td3Hyper h_;
	std::uint64_t seed_;
	std::mt19937_64 rng_;
	Adam opt_actor_, opt_q1_, opt_q2_;
	std::size_t critic_updates_ = 0, policy_updates_ = 0;
	std::uint64_t episodes_ = 0;

	friend std::unique_ptr<Agent> load_agent(std::istream &in);
};

} // namespace mesbench::rl
