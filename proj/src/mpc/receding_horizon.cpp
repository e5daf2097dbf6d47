#include <chrono>
#include <cstdio>
#include <ostream>

#include "mesbench/core/errors.hpp"
#include "mesbench/core/units.hpp"
#include "mesbench/mpc/mpc.hpp"

namespace mesbench::mpc {

void MpcConfig::check() const {
	if (c_steps < 1 || c_steps > n_steps)
		throw DomainError("mpc: control horizon must satisfy 1 <= C <= N (C = " + std::to_string(c_steps) +
		                  ", N = " + std::to_string(n_steps) + ")");
}

namespace {

double slack_price(const MesConfig &cfg, const MpcConfig &mc, const std::vector<plant::ExogenousFrame> &fc) {
	double b = cfg.reward_weights.b;
	if (!(b > 0.0)) {
		double pmax = cfg.gas_price;
		for (const auto &f : fc)
			pmax = std::max(pmax, f.x_el);
		b = 2.0 * pmax;
	}
	return mc.slack_penalty_factor * units::from_mw(b);
}

} // namespace

MpcPlan solve_plan(const MesConfig &cfg, const MpcConfig &mc, const std::vector<plant::ExogenousFrame> &forecast,
                   const SystemState &x0, std::size_t n_steps) {
	const auto t0 = std::chrono::steady_clock::now();
	MpcPlan plan;
	auto model = build_problem(cfg, forecast, x0, n_steps);
	plan.solution = milp::solve_milp(model.problem, mc.limits, mc.tolerances);

	if (plan.solution.status == milp::Status::Infeasible) {
		BuildOptions soft{true, slack_price(cfg, mc, forecast)};
		model = build_problem(cfg, forecast, x0, n_steps, soft);
		plan.solution = milp::solve_milp(model.problem, mc.limits, mc.tolerances);
		plan.softened = true;
	}
	if (plan.solution.status == milp::Status::GapLimit && !plan.solution.has_solution()) {
		auto relaxed = milp::solve_lp(model.problem.base, mc.tolerances);
		if (relaxed.status == milp::Status::Optimal) {
			relaxed.status = milp::Status::GapLimit;
			relaxed.node_count = plan.solution.node_count;
			plan.solution = std::move(relaxed);
			plan.relaxed_fallback = true;
		}
	}
	if (!plan.solution.has_solution())
		throw SolverFailure("mpc: no usable plan (status " + milp::to_string(plan.solution.status) + ", " +
		                    std::to_string(model.problem.base.num_vars()) + " vars, " +
		                    std::to_string(model.problem.base.num_rows()) + " rows, t = " +
		                    std::to_string(x0.t_index) + ")");
	plan.objective = plan.solution.objective;
	plan.actions = plan_actions(model, plan.solution.x, cfg);
	plan.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
	return plan;
}

MpcRun receding_horizon_run(const MesConfig &cfg_in, const MpcConfig &mc, const data::Profiles &profiles,
                            std::size_t t0, std::size_t n_run, const SystemState *start) {
	mc.check();
	const auto data = data::to_exogenous(profiles);
	MesConfig cfg = cfg_in;
	if (cfg.reward_weights.b_auto)
		cfg = with_resolved_weights(cfg, data.max_price());
	if (mc.model_equals_plant)
		cfg.plant.linear = true;

	MpcRun run;
	auto &ep = run.episode;
	SystemState state = start ? *start : plant::initial_state(cfg, data, t0);
	state.t_index = t0;
	state.obs = plant::observe(data.at(t0), state.obs.c_e, cfg);
	ep.states.push_back(state);

	const data::ForecastSpec *spec = mc.forecast ? &*mc.forecast : nullptr;
	std::size_t done = 0;
	while (done < n_run) {
		const std::size_t t = t0 + done;
		if (t + mc.n_steps > data.size())
			throw RangeError("mpc: horizon at t = " + std::to_string(t) + " needs data up to " +
			                 std::to_string(t + mc.n_steps) + ", have " + std::to_string(data.size()));
		const auto fc = data::forecast_frames(profiles, spec, t, mc.n_steps);
		const MpcPlan plan = solve_plan(cfg, mc, fc, state, mc.n_steps);
		const std::size_t apply = std::min(mc.c_steps, n_run - done);

		SolveLog log;
		log.t = t;
		log.n = mc.n_steps;
		log.c = apply;
		log.seconds = plan.seconds;
		log.node_count = plan.solution.node_count;
		log.objective = plan.objective;
		log.status = plan.solution.status;
		log.gap = plan.solution.gap;
		log.softened = plan.softened;
		run.solves.push_back(log);

		for (std::size_t k = 0; k < apply; ++k) {
			const ControlAction act = project_action(plan.actions[k], cfg);
			auto res = plant::step(state, act, data.at(state.t_index), cfg);
			ep.objective += objective_contribution(res.loss, cfg.reward_weights);
			ep.cost += res.loss.l_cost;
			ep.comfort_wh += res.loss.l_comfort;
			ep.decision_seconds.push_back(plan.seconds / static_cast<double>(apply));
			state = res.next;
			if (state.t_index < data.size())
				state.obs = plant::observe(data.frames[state.t_index], state.obs.c_e, cfg);
			ep.actions.push_back(act);
			ep.steps.push_back(std::move(res));
			ep.states.push_back(state);
		}
		done += apply;
	}
	return run;
}

void write_solve_log_csv(std::ostream &out, const std::vector<SolveLog> &solves, bool with_timing) {
	out << (with_timing ? "t,N,C,solve_seconds,node_count,objective,status,gap,softened\n"
	                    : "t,N,C,node_count,objective,status,gap,softened\n");
	char buf[64];
	for (const auto &s : solves) {
		out << s.t << ',' << s.n << ',' << s.c << ',';
		if (with_timing) {
			std::snprintf(buf, sizeof buf, "%.6f", s.seconds);
			out << buf << ',';
		}
		out << s.node_count << ',';
		std::snprintf(buf, sizeof buf, "%.9g", s.objective);
		out << buf << ',' << milp::to_string(s.status) << ',';
		std::snprintf(buf, sizeof buf, "%.3g", s.gap);
		out << buf << ',' << (s.softened ? 1 : 0) << '\n';
	}
}

} // namespace mesbench::mpc
