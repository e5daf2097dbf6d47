#include "mesbench/rl/td3.hpp"

#include <algorithm>
#include <cmath>

#include "mesbench/core/errors.hpp"

namespace mesbench::rl {

Td3Hyper Td3Hyper::defaults(CaseLabel c) {
	Td3Hyper h;
	if (c == CaseLabel::simple) {
		h.gamma = 0.9;
		h.learning_rate = 7.551e-5;
		h.batch_size = 24;
		h.buffer_size = 100000;
		h.train_freq = 96;
		h.gradient_steps = 100;
		h.noise_type = NoiseType::ornstein_uhlenbeck;
		h.noise_std = 0.337;
	}
	return h;
}

void Td3Hyper::check() const {
	std::vector<std::string> v;
	if (!(gamma > 0.0 && gamma <= 1.0))
		v.push_back("gamma must lie in (0, 1]");
	if (!(learning_rate > 0.0))
		v.push_back("learning_rate must be > 0");
	if (batch_size < 1 || buffer_size < 1 || train_freq < 1 || gradient_steps < 0)
		v.push_back("batch_size, buffer_size and train_freq must be >= 1, gradient_steps >= 0");
	if (policy_delay < 1)
		v.push_back("policy_delay must be >= 1");
	if (!(rho >= 0.0 && rho <= 1.0))
		v.push_back("rho must lie in [0, 1]");
	if (noise_std < 0.0 || target_noise < 0.0 || target_clip < 0.0)
		v.push_back("noise parameters must be >= 0");
	if (hidden < 1)
		v.push_back("hidden must be >= 1");
	if (!v.empty()) {
		std::string msg = "invalid TD3 hyper-parameters:";
		for (const auto &s : v)
			msg += " " + s + ";";
		throw DomainError(msg);
	}
}

MatrixXd actor_forward(const MlpParams &actor, const MatrixXd &s, MlpCache *cache) {
	return mlp_forward(actor, s, cache).array().tanh().matrix();
}

namespace {

MatrixXd stack(const MatrixXd &s, const MatrixXd &a) {
	MatrixXd x(s.rows() + a.rows(), s.cols());
	x.topRows(s.rows()) = s;
	x.bottomRows(a.rows()) = a;
	return x;
}

} // namespace

VectorXd critic_forward(const MlpParams &q, const MatrixXd &s, const MatrixXd &a, MlpCache *cache) {
	if (s.cols() != a.cols())
		throw ShapeError("critic: state and action batches differ in size");
	return mlp_forward(q, stack(s, a), cache).row(0).transpose();
}

MatrixXd target_actions(const MatrixXd &mu, const MatrixXd &eps, double c, double lo, double hi) {
	if (mu.rows() != eps.rows() || mu.cols() != eps.cols())
		throw ShapeError("target_actions: noise shape differs from the actions");
	return (mu.array() + eps.array().max(-c).min(c)).max(lo).min(hi).matrix();
}

VectorXd td3_backup(const VectorXd &r, const VectorXd &d, const VectorXd &q1, const VectorXd &q2, double gamma) {
	if (r.size() != d.size() || r.size() != q1.size() || r.size() != q2.size())
		throw ShapeError("td3 backup: length mismatch");
	VectorXd y(r.size());
	for (Eigen::Index i = 0; i < r.size(); ++i)
		y[i] = r[i] + gamma * (1.0 - d[i]) * std::min(q1[i], q2[i]);
	return y;
}

VectorXd td3_target(const ReplayBatch &b, const Td3Nets &n, const Td3Hyper &h, std::mt19937_64 &rng) {
	if (b.s.cols() == 0)
		throw EmptyError("td3_target: empty batch");
	const MatrixXd mu = actor_forward(n.actor_targ, b.s2);
	MatrixXd eps(mu.rows(), mu.cols());
	std::normal_distribution<double> normal(0.0, 1.0);
	for (Eigen::Index c = 0; c < eps.cols(); ++c)
		for (Eigen::Index r = 0; r < eps.rows(); ++r)
			eps(r, c) = h.target_noise * normal(rng);
	const MatrixXd a2 = target_actions(mu, eps, h.target_clip);
	return td3_backup(b.r, b.d, critic_forward(n.q1_targ, b.s2, a2), critic_forward(n.q2_targ, b.s2, a2), h.gamma);
}

Td3Agent::Td3Agent(EnvSpec spec, Td3Hyper h, std::uint64_t seed)
    : Agent(std::move(spec)), h_(h), seed_(seed), rng_(seed), opt_actor_(h.learning_rate), opt_q1_(h.learning_rate),
      opt_q2_(h.learning_rate) {
	h_.check();
	std::mt19937_64 init(seed ^ 0x9E3779B97F4A7C15ULL);
	const int obs = static_cast<int>(spec_.obs_dim()), act = static_cast<int>(spec_.action_dim());
	nets.actor = make_mlp({obs, h_.hidden, h_.hidden, act}, init, 0.1);
	nets.q1 = make_mlp({obs + act, h_.hidden, h_.hidden, 1}, init, 1.0);
	nets.q2 = make_mlp({obs + act, h_.hidden, h_.hidden, 1}, init, 1.0);
	nets.actor_targ = nets.actor;
	nets.q1_targ = nets.q1;
	nets.q2_targ = nets.q2;
}

VectorXd Td3Agent::act(const VectorXd &obs) const {
	MatrixXd s = obs;
	return actor_forward(nets.actor, s).col(0);
}

void Td3Agent::update(const ReplayBuffer &rb, int gradient_steps) {
	if (rb.size() == 0)
		throw EmptyError("td3: replay buffer is empty");
	const auto bsz = static_cast<std::size_t>(h_.batch_size);
	for (int j = 0; j < gradient_steps; ++j) {
		const auto b = rb.sample(bsz, rng_);
		const VectorXd y = td3_target(b, nets, h_, rng_);
		const double inv_b = 1.0 / static_cast<double>(b.s.cols());

		auto critic_step = [&](MlpParams &q, Adam &opt) {
			MlpCache c;
			const VectorXd qv = critic_forward(q, b.s, b.a, &c);
			const VectorXd err = qv - y;
			const double loss = err.squaredNorm() * inv_b;
			if (!std::isfinite(loss))
				throw NumericalError("td3: non-finite critic loss");
			const MatrixXd up = (2.0 * inv_b) * err.transpose();
			VectorXd theta = q.flat();
			opt.step(theta, mlp_grad(q, c, up).flat());
			q.assign(theta);
		};
		critic_step(nets.q1, opt_q1_);
		critic_step(nets.q2, opt_q2_);
		++critic_updates_;

		if (critic_updates_ % static_cast<std::size_t>(h_.policy_delay) != 0)
			continue;

		// actor: maximize mean Q1(s, mu(s))
		MlpCache ac;
		const MatrixXd mu = actor_forward(nets.actor, b.s, &ac);
		MlpCache qc;
		const VectorXd q = critic_forward(nets.q1, b.s, mu, &qc);
		if (!q.allFinite())
			throw NumericalError("td3: non-finite actor objective");
		MatrixXd dx;
		mlp_grad(nets.q1, qc, MatrixXd::Constant(1, b.s.cols(), -inv_b), &dx);
		const MatrixXd da = dx.bottomRows(mu.rows());
		const MatrixXd up = (da.array() * (1.0 - mu.array().square())).matrix();
		VectorXd theta = nets.actor.flat();
		opt_actor_.step(theta, mlp_grad(nets.actor, ac, up).flat());
		nets.actor.assign(theta);
		++policy_updates_;

		polyak_update(nets.actor_targ, nets.actor, h_.rho);
		polyak_update(nets.q1_targ, nets.q1, h_.rho);
		polyak_update(nets.q2_targ, nets.q2, h_.rho);
	}
}

void Td3Agent::train(Env &env, std::size_t steps, const StepHook &hook) {
	const auto dim = static_cast<int>(spec_.action_dim());
	ReplayBuffer rb(spec_.obs_dim(), spec_.action_dim(), static_cast<std::size_t>(h_.buffer_size));
	ActionNoise noise(h_.noise_type, dim, h_.noise_std);
	std::uniform_real_distribution<double> uni(-1.0, 1.0);
	VectorXd obs = env.reset(episode_seed(seed_, episodes_++));
	for (std::size_t k = 1; k <= steps; ++k) {
		VectorXd a(dim);
		if (k <= static_cast<std::size_t>(h_.learning_starts)) {
			for (int i = 0; i < dim; ++i)
				a[i] = uni(rng_);
		} else {
			a = (act(obs) + noise.sample(rng_)).cwiseMax(-1.0).cwiseMin(1.0);
		}
		const auto out = env.step_normalized(a);
		rb.add(obs, a, out.reward * spec_.reward_scale, out.obs, out.done);
		if (out.done) {
			obs = env.reset(episode_seed(seed_, episodes_++));
			noise.reset();
		} else {
			obs = out.obs;
		}
		if (k > static_cast<std::size_t>(h_.learning_starts) && k % static_cast<std::size_t>(h_.train_freq) == 0)
			update(rb, h_.gradient_steps);
		if (hook)
			hook(k);
	}
}

} // namespace mesbench::rl
