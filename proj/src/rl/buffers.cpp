#include "mesbench/rl/buffers.hpp"

#include "mesbench/core/errors.hpp"

namespace mesbench::rl {

RolloutBuffer::RolloutBuffer(std::size_t obs_dim, std::size_t act_dim, std::size_t capacity)
    : obs(obs_dim, capacity), actions(act_dim, capacity) {
	if (capacity == 0)
		throw DomainError("rollout buffer capacity must be positive");
	logprob.resize(capacity);
	rewards.resize(capacity);
	values.resize(capacity);
	dones.resize(capacity);
}

void RolloutBuffer::add(const Eigen::VectorXd &o, const Eigen::VectorXd &a, double logp, double r, double v,
                        bool done) {
	if (full())
		throw RangeError("rollout buffer is full");
	if (o.size() != obs.rows() || a.size() != actions.rows())
		throw ShapeError("rollout buffer: sample has the wrong shape");
	obs.col(n_) = o;
	actions.col(n_) = a;
	logprob[n_] = logp;
	rewards[n_] = r;
	values[n_] = v;
	dones[n_] = done ? 1 : 0;
	++n_;
}

GaeResult gae(const std::vector<double> &rewards, const std::vector<double> &values, const std::vector<char> &dones,
              double gamma, double lambda) {
	const std::size_t n = rewards.size();
	if (values.size() != n + 1 || dones.size() != n)
		throw ShapeError("gae: need n rewards, n dones and n + 1 values");
	GaeResult out;
	out.advantages.assign(n, 0.0);
	out.returns.assign(n, 0.0);
	double next_adv = 0.0;
	for (std::size_t t = n; t-- > 0;) {
		const double live = dones[t] ? 0.0 : 1.0;
		const double delta = rewards[t] + gamma * values[t + 1] * live - values[t];
		next_adv = delta + gamma * lambda * live * next_adv;
		out.advantages[t] = next_adv;
		out.returns[t] = next_adv + values[t];
	}
	return out;
}

ReplayBuffer::ReplayBuffer(std::size_t obs_dim, std::size_t act_dim, std::size_t capacity)
    : capacity_(capacity), s_(obs_dim, capacity), a_(act_dim, capacity), s2_(obs_dim, capacity), r_(capacity),
      d_(capacity), stamps_(capacity, 0) {
	if (capacity == 0)
		throw DomainError("replay buffer capacity must be positive");
}

void ReplayBuffer::add(const Eigen::VectorXd &s, const Eigen::VectorXd &a, double r, const Eigen::VectorXd &s2,
                       bool done) {
	if (s.size() != s_.rows() || s2.size() != s_.rows() || a.size() != a_.rows())
		throw ShapeError("replay buffer: transition has the wrong shape");
	s_.col(next_) = s;
	a_.col(next_) = a;
	s2_.col(next_) = s2;
	r_[next_] = r;
	d_[next_] = done ? 1.0 : 0.0;
	stamps_[next_] = counter_++;
	next_ = (next_ + 1) % capacity_;
	size_ = std::min(size_ + 1, capacity_);
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t batch, std::mt19937_64 &rng) const {
	if (size_ == 0)
		throw EmptyError("replay buffer is empty");
	std::uniform_int_distribution<std::size_t> u(0, size_ - 1);
	std::vector<std::size_t> idx(batch);
	for (auto &i : idx)
		i = u(rng);
	return idx;
}

ReplayBatch ReplayBuffer::gather(const std::vector<std::size_t> &idx) const {
	const auto b = static_cast<Eigen::Index>(idx.size());
	ReplayBatch out{Eigen::MatrixXd(s_.rows(), b), Eigen::MatrixXd(a_.rows(), b), Eigen::MatrixXd(s_.rows(), b),
	                Eigen::VectorXd(b), Eigen::VectorXd(b)};
	for (Eigen::Index k = 0; k < b; ++k) {
		const auto i = static_cast<Eigen::Index>(idx[k]);
		out.s.col(k) = s_.col(i);
		out.a.col(k) = a_.col(i);
		out.s2.col(k) = s2_.col(i);
		out.r[k] = r_[i];
		out.d[k] = d_[i];
	}
	return out;
}

} // namespace mesbench::rl
