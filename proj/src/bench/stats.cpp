#include <algorithm>
#include <cmath>

#include "mesbench/bench/bench.hpp"
#include "mesbench/core/errors.hpp"
#include "mesbench/rl/env.hpp"

namespace mesbench::bench {

RuntimeStats runtime_stats(const std::vector<double> &samples) {
	if (samples.empty())
		throw EmptyError("runtime_stats: no samples");
	RuntimeStats s;
	s.min = *std::min_element(samples.begin(), samples.end());
	s.max = *std::max_element(samples.begin(), samples.end());
	for (double v : samples)
		s.total += v;
	s.mean = s.total / static_cast<double>(samples.size());
	double ss = 0.0;
	for (double v : samples)
		ss += (v - s.mean) * (v - s.mean);
	s.std = std::sqrt(ss / static_cast<double>(samples.size()));
	return s;
}

double relative_performance(double j_ref, double j) {
	if (!(j_ref > 0.0) || !(j > 0.0))
		throw DomainError("relative_performance needs positive objectives (j_ref = " + std::to_string(j_ref) +
		                  ", j = " + std::to_string(j) + ")");
	return 100.0 * j_ref / j;
}

std::uint64_t heldout_seed(std::uint64_t seed) {
	std::uint64_t z = seed + 0xD1B54A32D192ED03ULL;
	z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
	z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
	return z ^ (z >> 31);
}

data::Profiles year_profiles(std::uint64_t data_seed, const MesConfig &cfg, std::size_t extra_steps) {
	TimeGrid g = cfg.grid;
	g.n_steps = 35040 + extra_steps;
	return data::synth_profiles(data_seed, g, cfg);
}

std::vector<std::size_t> heldout_week_starts(std::size_t n_steps, std::size_t episode_len) {
	if (n_steps < episode_len)
		throw RangeError("held-out weeks need at least one episode of data");
	const std::size_t per_day = 96;
	std::vector<std::size_t> out;
	for (std::size_t day : {14u, 119u, 301u})
		out.push_back(std::min(day * per_day, n_steps - episode_len));
	return out;
}

double evaluate_agent(const rl::Agent &agent, const plant::ExogenousData &data, const std::vector<std::size_t> &starts) {
	if (starts.empty())
		throw EmptyError("evaluate_agent: no episodes");
	rl::Env env(agent.spec(), data);
	double total = 0.0;
	for (std::size_t s : starts) {
		Eigen::VectorXd obs = env.reset_at(s);
		for (;;) {
			const auto out = env.step_normalized(agent.act(obs));
			total += out.reward;
			if (out.done)
				break;
			obs = out.obs;
		}
	}
	return total / static_cast<double>(starts.size());
}

} // namespace mesbench::bench
