#include "mesbench/rl/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mesbench/core/errors.hpp"

namespace mesbench::rl {

PpoHyper PpoHyper::defaults(CaseLabel c) {
	PpoHyper h;
	if (c == CaseLabel::simple) {
		h.gamma = 0.95;
		h.learning_rate = 7.410e-4;
		h.nminibatches = 2;
		h.n_steps = 672;
		h.ent_coef = 3.141e-3;
		h.cliprange = 0.3;
		h.noptepochs = 5;
		h.lambda = 0.95;
	}
	return h;
}

void PpoHyper::check() const {
	std::vector<std::string> v;
	if (!(gamma > 0.0 && gamma <= 1.0))
		v.push_back("gamma must lie in (0, 1]");
	if (!(lambda >= 0.0 && lambda <= 1.0))
		v.push_back("lambda must lie in [0, 1]");
	if (!(cliprange > 0.0))
		v.push_back("cliprange must be > 0");
	if (!(learning_rate > 0.0))
		v.push_back("learning_rate must be > 0");
	if (n_steps < 1 || nminibatches < 1 || nminibatches > n_steps)
		v.push_back("need 1 <= nminibatches <= n_steps");
	if (noptepochs < 1)
		v.push_back("noptepochs must be >= 1");
	if (hidden < 1)
		v.push_back("hidden must be >= 1");
	if (!v.empty()) {
		std::string msg = "invalid PPO hyper-parameters:";
		for (const auto &s : v)
			msg += " " + s + ";";
		throw DomainError(msg);
	}
}

namespace {

struct LogpGrad {
	VectorXd logp;
	MatrixXd d_out;    // d logp_k / d out(:, k)
	MatrixXd d_logstd; // act_dim x B, continuous only
};

LogpGrad logp_with_grad(const Policy &pi, const MatrixXd &out, const MatrixXd &actions) {
	LogpGrad g;
	const Eigen::Index b = out.cols();
	g.logp = log_prob(pi, out, actions);
	g.d_out = MatrixXd::Zero(out.rows(), b);
	if (pi.mode == ActionMode::continuous) {
		g.d_logstd.resize(pi.act_dim, b);
		const VectorXd inv_var = (-2.0 * pi.log_std).array().exp();
		const VectorXd inv_std = (-pi.log_std).array().exp();
		for (Eigen::Index k = 0; k < b; ++k) {
			const VectorXd diff = actions.col(k) - out.col(k);
			g.d_out.col(k) = diff.cwiseProduct(inv_var);
			g.d_logstd.col(k) = diff.cwiseProduct(inv_std).array().square() - 1.0;
		}
		return g;
	}
	for (Eigen::Index k = 0; k < b; ++k)
		for (int d = 0; d < pi.act_dim; ++d) {
			const auto blk = out.col(k).segment(d * pi.tau, pi.tau);
			const double mx = blk.maxCoeff();
			const VectorXd e = (blk.array() - mx).exp();
			const VectorXd p = e / e.sum();
			const int level = static_cast<int>(std::lround(actions(d, k)));
			for (int i = 0; i < pi.tau; ++i)
				g.d_out(d * pi.tau + i, k) = (i == level ? 1.0 : 0.0) - p[i];
		}
	return g;
}

// Gradient of the batch-mean entropy with respect to the network outputs.
MatrixXd entropy_grad_out(const Policy &pi, const MatrixXd &out) {
	MatrixXd g = MatrixXd::Zero(out.rows(), out.cols());
	if (pi.mode == ActionMode::continuous)
		return g;
	const double inv_b = 1.0 / static_cast<double>(out.cols());
	for (Eigen::Index k = 0; k < out.cols(); ++k)
		for (int d = 0; d < pi.act_dim; ++d) {
			const auto blk = out.col(k).segment(d * pi.tau, pi.tau);
			const double mx = blk.maxCoeff();
			const VectorXd e = (blk.array() - mx).exp();
			const double s = e.sum();
			const VectorXd p = e / s;
			const VectorXd lp = (blk.array() - mx - std::log(s)).matrix();
			const double h = -(p.array() * lp.array()).sum();
			for (int i = 0; i < pi.tau; ++i)
				g(d * pi.tau + i, k) = -p[i] * (lp[i] + h) * inv_b;
		}
	return g;
}

struct SurrogateParts {
	double value = 0.0;
	double clip_fraction = 0.0;
	double approx_kl = 0.0;
	VectorXd coef; // d surrogate / d logp_k
};

SurrogateParts surrogate_parts(const VectorXd &logp, const VectorXd &logp_old, const VectorXd &adv, double eps) {
	const Eigen::Index b = logp.size();
	SurrogateParts s;
	s.coef.resize(b);
	const double inv_b = 1.0 / static_cast<double>(b);
	for (Eigen::Index k = 0; k < b; ++k) {
		const double ratio = std::exp(logp[k] - logp_old[k]);
		const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
		const double un = ratio * adv[k], cl = clipped * adv[k];
		// min picks the unclipped term on ties, so gradients flow inside the trust region
		if (un <= cl) {
			s.value += un * inv_b;
			s.coef[k] = un * inv_b;
		} else {
			s.value += cl * inv_b;
			s.coef[k] = 0.0;
		}
		if (std::abs(ratio - 1.0) > eps)
			s.clip_fraction += inv_b;
		s.approx_kl += 0.5 * (logp[k] - logp_old[k]) * (logp[k] - logp_old[k]) * inv_b;
	}
	return s;
}

} // namespace

double ppo_surrogate(const Policy &pi, const PpoBatch &b, double cliprange, Policy *grad) {
	MlpCache cache;
	const MatrixXd out = mlp_forward(pi.net, b.obs, &cache);
	const auto lg = logp_with_grad(pi, out, b.actions);
	const auto s = surrogate_parts(lg.logp, b.logp_old, b.advantages, cliprange);
	if (grad) {
		const MatrixXd up = lg.d_out * s.coef.asDiagonal();
		grad->mode = pi.mode;
		grad->act_dim = pi.act_dim;
		grad->tau = pi.tau;
		grad->net = mlp_grad(pi.net, cache, up);
		grad->log_std = pi.mode == ActionMode::continuous ? VectorXd(lg.d_logstd * s.coef) : VectorXd();
	}
	return s.value;
}

PpoLoss ppo_loss(const Policy &pi, const MlpParams &value, const PpoBatch &b, const PpoHyper &h,
                 bool normalize_advantages) {
	const Eigen::Index n = b.obs.cols();
	if (n == 0)
		throw EmptyError("ppo_loss: empty batch");
	VectorXd adv = b.advantages;
	if (normalize_advantages) {
		const double mean = adv.mean();
		const double sd = std::sqrt((adv.array() - mean).square().mean());
		adv = (adv.array() - mean) / (sd + 1e-8);
	}

	PpoLoss L;
	MlpCache pc;
	const MatrixXd out = mlp_forward(pi.net, b.obs, &pc);
	const auto lg = logp_with_grad(pi, out, b.actions);
	const auto s = surrogate_parts(lg.logp, b.logp_old, adv, h.cliprange);
	L.surrogate = s.value;
	L.clip_fraction = s.clip_fraction;
	L.approx_kl = s.approx_kl;
	L.entropy = entropy(pi, out).mean();

	MlpCache vc;
	const MatrixXd v = mlp_forward(value, b.obs, &vc);
	const VectorXd err = v.row(0).transpose() - b.returns;
	L.value_loss = err.squaredNorm() / static_cast<double>(n);
	L.total = -(L.surrogate + h.ent_coef * L.entropy) + h.vf_coef * L.value_loss;
	if (!std::isfinite(L.total))
		throw NumericalError("ppo: non-finite loss");

	// d total / d out = -(d surrogate + ent_coef d entropy)
	MatrixXd up = -(lg.d_out * s.coef.asDiagonal());
	up -= h.ent_coef * entropy_grad_out(pi, out);
	L.policy_grad.mode = pi.mode;
	L.policy_grad.act_dim = pi.act_dim;
	L.policy_grad.tau = pi.tau;
	L.policy_grad.net = mlp_grad(pi.net, pc, up);
	if (pi.mode == ActionMode::continuous)
		L.policy_grad.log_std = -(lg.d_logstd * s.coef) - h.ent_coef * VectorXd::Ones(pi.act_dim);
	const MatrixXd vup = (2.0 * h.vf_coef / static_cast<double>(n)) * err.transpose();
	L.value_grad = mlp_grad(value, vc, vup);
	return L;
}

PpoAgent::PpoAgent(EnvSpec spec, PpoHyper h, std::uint64_t seed)
    : Agent(std::move(spec)), h_(h), seed_(seed), rng_(seed), opt_(h.learning_rate, 0.9, 0.999, 1e-5) {
	h_.check();
	std::mt19937_64 init(seed ^ 0x9E3779B97F4A7C15ULL);
	const int obs = static_cast<int>(spec_.obs_dim()), act = static_cast<int>(spec_.action_dim());
	policy = make_policy(spec_.mode, obs, act, spec_.tau, h_.hidden, init);
	value = make_mlp({obs, h_.hidden, h_.hidden, 1}, init, 1.0);
}

VectorXd PpoAgent::act(const VectorXd &obs) const {
	std::mt19937_64 unused(0);
	return sample_action(policy, obs, unused, true).normalized;
}

PpoStats PpoAgent::update(const RolloutBuffer &buf, double bootstrap_value) {
	const std::size_t n = buf.size();
	if (n == 0)
		throw EmptyError("ppo: empty rollout");
	std::vector<double> vals(buf.values.begin(), buf.values.begin() + n);
	vals.push_back(bootstrap_value);
	const auto g = gae(std::vector<double>(buf.rewards.begin(), buf.rewards.begin() + n), vals,
	                   std::vector<char>(buf.dones.begin(), buf.dones.begin() + n), h_.gamma, h_.lambda);

	const std::size_t mb = std::max<std::size_t>(1, n / static_cast<std::size_t>(h_.nminibatches));
	std::vector<std::size_t> perm(n);
	PpoStats st;
	const std::size_t np = policy.num_params();
	for (int epoch = 0; epoch < h_.noptepochs; ++epoch) {
		std::iota(perm.begin(), perm.end(), 0);
		std::shuffle(perm.begin(), perm.end(), rng_);
		for (std::size_t start = 0; start + mb <= n; start += mb) {
			PpoBatch b;
			const auto m = static_cast<Eigen::Index>(mb);
			b.obs.resize(buf.obs.rows(), m);
			b.actions.resize(buf.actions.rows(), m);
			b.logp_old.resize(m);
			b.advantages.resize(m);
			b.returns.resize(m);
			for (Eigen::Index k = 0; k < m; ++k) {
				const auto i = perm[start + k];
				b.obs.col(k) = buf.obs.col(i);
				b.actions.col(k) = buf.actions.col(i);
				b.logp_old[k] = buf.logprob[i];
				b.advantages[k] = g.advantages[i];
				b.returns[k] = g.returns[i];
			}
			const auto L = ppo_loss(policy, value, b, h_);
			VectorXd theta(np + value.num_params()), grad(theta.size());
			theta << policy.flat(), value.flat();
			grad << L.policy_grad.flat(), L.value_grad.flat();
			opt_.step(theta, grad, h_.max_grad_norm);
			policy.assign(theta.head(np));
			value.assign(theta.tail(value.num_params()));
			st.policy_loss += -L.surrogate;
			st.value_loss += L.value_loss;
			st.entropy += L.entropy;
			st.clip_fraction += L.clip_fraction;
			st.approx_kl += L.approx_kl;
			++st.updates;
		}
	}
	if (st.updates) {
		const double k = static_cast<double>(st.updates);
		st.policy_loss /= k;
		st.value_loss /= k;
		st.entropy /= k;
		st.clip_fraction /= k;
		st.approx_kl /= k;
	}
	return st;
}

void PpoAgent::train(Env &env, std::size_t steps, const StepHook &hook) {
	RolloutBuffer buf(spec_.obs_dim(), spec_.action_dim(), static_cast<std::size_t>(h_.n_steps));
	VectorXd obs = env.reset(episode_seed(seed_, episodes_++));
	for (std::size_t k = 1; k <= steps; ++k) {
		const auto s = sample_action(policy, obs, rng_);
		const double v = mlp_forward(value, obs)[0];
		const auto out = env.step_normalized(s.normalized);
		buf.add(obs, s.action, s.logp, out.reward * spec_.reward_scale, v, out.done);
		obs = out.done ? env.reset(episode_seed(seed_, episodes_++)) : out.obs;
		if (buf.full()) {
			update(buf, mlp_forward(value, obs)[0]);
			buf.clear();
		}
		if (hook)
			hook(k);
	}
}

} // namespace mesbench::rl
