#pragma once

#include <random>
#include <vector>

#include <Eigen/Dense>

namespace mesbench::rl {

struct RolloutBuffer {
	Eigen::MatrixXd obs;     // obs_dim x capacity
	Eigen::MatrixXd actions; // act_dim x capacity (levels stored as doubles in multi-discrete mode)
	std::vector<double> logprob, rewards, values;
	std::vector<char> dones;

	RolloutBuffer(std::size_t obs_dim, std::size_t act_dim, std::size_t capacity);
	void add(const Eigen::VectorXd &o, const Eigen::VectorXd &a, double logp, double r, double v, bool done);
	std::size_t size() const { return n_; }
	std::size_t capacity() const { return static_cast<std::size_t>(obs.cols()); }
	bool full() const { return n_ == capacity(); }
	void clear() { n_ = 0; }

private:
	std::size_t n_ = 0;
};

struct GaeResult {
	std::vector<double> advantages;
	std::vector<double> returns;
};

// values holds one entry per step plus the bootstrap value of the state after
// the last step. dones[t] marks that step t ended an episode.
GaeResult gae(const std::vector<double> &rewards, const std::vector<double> &values, const std::vector<char> &dones,
              double gamma, double lambda);

struct ReplayBatch {
	Eigen::MatrixXd s, a, s2; // column per sample
	Eigen::VectorXd r, d;
};

class ReplayBuffer {
public:
	ReplayBuffer(std::size_t obs_dim, std::size_t act_dim, std::size_t capacity);

	void add(const Eigen::VectorXd &s, const Eigen::VectorXd &a, double r, const Eigen::VectorXd &s2, bool done);
	std::size_t size() const { return size_; }
	std::size_t capacity() const { return capacity_; }
	// Uniform over stored entries, with replacement.
	std::vector<std::size_t> sample_indices(std::size_t batch, std::mt19937_64 &rng) const;
	ReplayBatch gather(const std::vector<std::size_t> &idx) const;
	ReplayBatch sample(std::size_t batch, std::mt19937_64 &rng) const { return gather(sample_indices(batch, rng)); }
	// Insertion counter of slot i, for tests of the overwrite order.
	std::size_t stamp(std::size_t i) const { return stamps_.at(i); }

private:
	std::size_t capacity_, size_ = 0, next_ = 0, counter_ = 0;
	Eigen::MatrixXd s_, a_, s2_;
	Eigen::VectorXd r_, d_;
	std::vector<std::size_t> stamps_;
};

} // namespace mesbench::rl
