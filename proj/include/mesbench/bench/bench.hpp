#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mesbench/core/config.hpp"
#include "mesbench/data/timeseries.hpp"
#include "mesbench/mpc/mpc.hpp"
#include "mesbench/plant/plant.hpp"
#include "mesbench/rl/agent.hpp"
#include "mesbench/rl/ppo.hpp"
#include "mesbench/rl/td3.hpp"

namespace mesbench::bench {

struct RuntimeStats {
	double min = 0.0, mean = 0.0, std = 0.0, max = 0.0, total = 0.0;
};

// Population standard deviation. EmptyError on no samples.
RuntimeStats runtime_stats(const std::vector<double> &samples);

// 100 * j_ref / j. DomainError unless both are positive.
double relative_performance(double j_ref, double j);

// Data seeds: training profiles use the seed itself, held-out evaluation and
// benchmark windows use derived seeds so no controller is scored on data it
// was trained on.
std::uint64_t heldout_seed(std::uint64_t seed);

// Year-long profiles on the default 15-minute grid.
data::Profiles year_profiles(std::uint64_t data_seed, const MesConfig &cfg, std::size_t extra_steps = 0);

// Three fixed held-out weeks (winter, spring, autumn) for learning curves.
std::vector<std::size_t> heldout_week_starts(std::size_t n_steps, std::size_t episode_len = 672);

// Mean undiscounted return of the greedy policy over the given episode starts,
// SoC half full at each start.
double evaluate_agent(const rl::Agent &agent, const plant::ExogenousData &data, const std::vector<std::size_t> &starts);

// ---------------------------------------------------------------------------
// Benchmark

struct AgentEntry {
	std::string name;
	// One agent per benchmark seed, or a single agent shared by all seeds.
	std::vector<std::shared_ptr<const rl::Agent>> agents;
};

struct BenchmarkOptions {
	MesConfig cfg;
	std::size_t eval_weeks = 4;
	std::vector<std::uint64_t> seeds{1, 2, 3};
	std::size_t start_day = 0;
	mpc::MpcConfig mpc;
	bool run_perfect_mpc = true;
	bool run_realistic_mpc = true;
	std::size_t jobs = 1;
};

struct ControllerResult {
	std::string name;
	std::vector<double> j_per_seed, cost_per_seed, comfort_per_seed; // comfort in MWh
	double j = 0.0, cost = 0.0, comfort = 0.0;                       // means over seeds
	double relative = 0.0;                                           // percent of the perfect-MPC reference, NaN if undefined
	RuntimeStats runtime;                                            // per step, all seeds pooled
	bool failed = false;
	std::string error;
};

struct BenchmarkReport {
	CaseLabel case_label = CaseLabel::simple;
	std::vector<std::uint64_t> seeds;
	std::size_t eval_steps = 0;
	std::vector<ControllerResult> rows;

	const ControllerResult &at(const std::string &name) const;
};

inline constexpr const char *kPerfectMpc = "lmpc_perfect";
inline constexpr const char *kRealisticMpc = "lmpc_realistic";
inline constexpr const char *kRandomAgent = "random";

// Random uniform setpoints in normalized units, seeded per episode.
plant::Controller random_controller(const MesConfig &cfg, std::uint64_t seed);

BenchmarkReport run_benchmark(const BenchmarkOptions &opt, const std::vector<AgentEntry> &agents = {});

void write_report_csv(std::ostream &out, const BenchmarkReport &r);
void write_runtime_csv(std::ostream &out, const BenchmarkReport &r);
void write_report_text(std::ostream &out, const BenchmarkReport &r);

// ---------------------------------------------------------------------------
// Learning curves

struct LearningOptions {
	std::string kind = "td3"; // ppo | td3
	MesConfig cfg;
	std::size_t budget = 50000;
	std::size_t eval_every = 5000;
	std::vector<std::uint64_t> seeds{1, 2, 3};
	std::optional<rl::PpoHyper> ppo;
	std::optional<rl::Td3Hyper> td3;
	std::size_t jobs = 1;
};

struct LearningCurve {
	std::string kind;
	std::vector<std::uint64_t> seeds;
	std::vector<std::size_t> steps;
	std::vector<std::vector<double>> returns; // [seed][point]
	std::vector<std::shared_ptr<rl::Agent>> agents; // trained agents, one per seed

	double mean_at(std::size_t point) const;
	double std_at(std::size_t point) const;
};

std::shared_ptr<rl::Agent> make_agent(const std::string &kind, const rl::EnvSpec &spec, std::uint64_t seed,
                                      const std::optional<rl::PpoHyper> &ppo = {},
                                      const std::optional<rl::Td3Hyper> &td3 = {});
rl::ActionMode default_action_mode(const std::string &kind, CaseLabel c);

LearningCurve learning_curve(const LearningOptions &opt);
void write_curve_csv(std::ostream &out, const LearningCurve &c);

// ---------------------------------------------------------------------------
// Random search

struct HyperRange {
	enum class Kind { log_uniform, uniform, integer, categorical };
	std::string name;
	Kind kind = Kind::uniform;
	double lo = 0.0, hi = 0.0;
	std::vector<std::string> choices;
};

using HyperSample = std::map<std::string, std::string>;

struct HyperSpace {
	std::vector<HyperRange> ranges;

	void check() const; // DomainError on empty or inverted ranges
	HyperSample draw(std::mt19937_64 &rng) const;

	static HyperSpace ppo_default();
	static HyperSpace td3_default();
	static HyperSpace collapsed(const rl::PpoHyper &h);
	static HyperSpace collapsed(const rl::Td3Hyper &h);
};

rl::PpoHyper apply_ppo(rl::PpoHyper base, const HyperSample &s);
rl::Td3Hyper apply_td3(rl::Td3Hyper base, const HyperSample &s);

struct Trial {
	std::size_t id = 0;
	HyperSample params;
	double score = 0.0; // held-out mean return, higher is better
	double best_so_far = 0.0;
	bool failed = false;
	std::string error;
};

struct SearchResult {
	std::vector<Trial> trials;
	std::size_t best = 0;
	const Trial &best_trial() const { return trials.at(best); }
};

struct SearchOptions {
	std::string kind = "ppo";
	MesConfig cfg;
	HyperSpace space;
	std::size_t trials = 8;
	std::size_t train_budget = 10000;
	std::uint64_t seed = 1;
	std::size_t jobs = 1;
};

SearchResult random_search(const SearchOptions &opt);
void write_history_csv(std::ostream &out, const SearchResult &r);

} // namespace mesbench::bench
