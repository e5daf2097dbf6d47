#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mesbench/core/config.hpp"
#include "mesbench/core/model.hpp"
#include "mesbench/data/forecast.hpp"
#include "mesbench/data/timeseries.hpp"
#include "mesbench/milp/solver.hpp"
#include "mesbench/plant/plant.hpp"

namespace mesbench::mpc {

struct MpcConfig {
	std::size_t n_steps = 288; // prediction horizon N
	std::size_t c_steps = 96;  // control horizon C
	// Empty means perfect foresight; otherwise noisy forecasts per series.
	std::optional<data::ForecastSpec> forecast;
	bool model_equals_plant = false; // run the plant with kappa = 0 and no derating
	double slack_penalty_factor = 10.0; // heat slack price on retry, in units of b
	milp::MilpLimits limits{200, 1e-3, true};
	milp::Tolerances tolerances;

	void check() const; // throws DomainError unless 1 <= C <= N
};

struct BuildOptions {
	bool soft_comfort = false;
	double slack_price = 0.0; // currency per MWh of unmet or surplus heat
};

// The MILP plus where each physical quantity lives in it. Units inside the
// model are MW, MWh and currency per MWh.
struct MpcModel {
	milp::MilpProblem problem;
	std::map<std::string, std::vector<int>> index; // e.g. "chp.el", "chp.on", "bess.ch", "bess.soc", "gas"
	std::size_t n_steps = 0;
	double dt_h = 0.0;

	const std::vector<int> &vars(const std::string &key) const;
	bool has(const std::string &key) const { return index.count(key) > 0; }
};

MpcModel build_problem(const MesConfig &cfg, const std::vector<plant::ExogenousFrame> &forecast,
                       const SystemState &x0, std::size_t n_steps, const BuildOptions &opt = {});

// MILP solution -> one projected ControlAction per step.
std::vector<ControlAction> plan_actions(const MpcModel &model, const std::vector<double> &x, const MesConfig &cfg);

struct MpcPlan {
	std::vector<ControlAction> actions;
	double objective = 0.0;
	milp::MilpSolution solution;
	bool softened = false;
	bool relaxed_fallback = false; // no incumbent in the node budget; projected LP relaxation used
	double seconds = 0.0;
};

MpcPlan solve_plan(const MesConfig &cfg, const MpcConfig &mpc_cfg, const std::vector<plant::ExogenousFrame> &forecast,
                   const SystemState &x0, std::size_t n_steps);

struct SolveLog {
	std::size_t t = 0;
	std::size_t n = 0;
	std::size_t c = 0;
	double seconds = 0.0;
	std::size_t node_count = 0;
	double objective = 0.0;
	milp::Status status = milp::Status::Optimal;
	double gap = 0.0;
	bool softened = false;
};

struct MpcRun {
	plant::Episode episode;
	std::vector<SolveLog> solves;
};

// Receding-horizon loop over [t0, t0 + n_run): measure, forecast N steps,
// solve, apply the first C actions to the plant, repeat.
MpcRun receding_horizon_run(const MesConfig &cfg, const MpcConfig &mpc_cfg, const data::Profiles &profiles,
                            std::size_t t0, std::size_t n_run, const SystemState *start = nullptr);

// Wall time is the only nondeterministic column; leave it out for
// reproducible artifacts.
void write_solve_log_csv(std::ostream &out, const std::vector<SolveLog> &solves, bool with_timing = true);

} // namespace mesbench::mpc
