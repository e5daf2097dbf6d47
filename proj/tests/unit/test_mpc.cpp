#include <catch_amalgamated.hpp>

#include <sstream>

#include "mesbench/core/errors.hpp"
#include "mesbench/core/units.hpp"
#include "mesbench/data/timeseries.hpp"
#include "mesbench/mpc/mpc.hpp"

using namespace mesbench;
using Catch::Approx;

namespace {

MesConfig boiler_only() {
	MesConfig cfg = case1_config();
	std::vector<AssetSpec> keep;
	for (const auto &a : cfg.assets)
		if (a.kind == AssetKind::boiler || a.kind == AssetKind::grid_gas)
			keep.push_back(a);
	cfg.assets = keep;
	for (auto &a : cfg.assets)
		a.follows_heat_demand = false;
	cfg.reward_weights = {1.0, 1e-3, false};
	return cfg;
}

data::Profiles profiles(const MesConfig &cfg, std::size_t days, std::uint64_t seed = 3) {
	TimeGrid g = cfg.grid;
	g.n_steps = days * 96;
	return data::synth_profiles(seed, g, cfg);
}

mpc::MpcConfig exact(std::size_t n, std::size_t c) {
	mpc::MpcConfig m;
	m.n_steps = n;
	m.c_steps = c;
	m.limits = {100000, 1e-9, true};
	return m;
}

} // namespace

TEST_CASE("boiler-only two-step plan", "[mpc][builder]") {
	const MesConfig cfg = boiler_only();
	std::vector<plant::ExogenousFrame> fc(2);
	fc[0].e_th_demand = 1e6;
	fc[1].e_th_demand = 2e6;
	const auto plan = mpc::solve_plan(cfg, exact(2, 2), fc, SystemState{}, 2);
	REQUIRE(plan.solution.status == milp::Status::Optimal);
	// gas price per MWh * 0.25 h * (1 + 2) MW / 0.92
	const double expected = units::from_mw(cfg.gas_price) * 0.25 * 3.0 / 0.92;
	CHECK(plan.objective == Approx(expected).epsilon(1e-9));
	CHECK(plan.actions[0].at("boiler") == Approx(1e6));
	CHECK(plan.actions[1].at("boiler") == Approx(2e6));
	CHECK_FALSE(plan.softened);
}

TEST_CASE("zero demand and zero price cost nothing", "[mpc][builder]") {
	MesConfig cfg = with_resolved_weights(case1_config(), 1e-4);
	std::vector<plant::ExogenousFrame> fc(8);
	SystemState x0;
	x0.soc["bess"] = 0.5 * cfg.asset("bess").e_nom;
	const auto plan = mpc::solve_plan(cfg, exact(8, 8), fc, x0, 8);
	REQUIRE(plan.solution.status == milp::Status::Optimal);
	CHECK(plan.objective == Approx(0.0).margin(1e-9));
}

TEST_CASE("measured state of charge enters only the first link row", "[mpc][builder]") {
	const MesConfig cfg = with_resolved_weights(case1_config(), 1e-4);
	const auto p = profiles(cfg, 1);
	const auto fc = data::forecast_frames(p, nullptr, 0, 12);
	SystemState x0;
	x0.soc["bess"] = 0.3 * cfg.asset("bess").e_nom;
	const auto m = mpc::build_problem(cfg, fc, x0, 12);
	const auto &lp = m.problem.base;
	int links = 0;
	for (std::size_t i = 0; i < lp.num_rows(); ++i) {
		const std::string name = lp.row_name(i);
		if (name.rfind("bess.soc_link", 0) != 0)
			continue;
		++links;
		if (name == "bess.soc_link[0]")
			CHECK(lp.rhs[i] == Approx(units::mwh_from_joules(x0.soc.at("bess"))));
		else
			CHECK(lp.rhs[i] == 0.0);
	}
	CHECK(links == 12);
	CHECK(m.vars("chp.on").size() == 12);
	CHECK(m.problem.int_vars.size() == 12);
	CHECK_THROWS_AS(m.vars("nothing"), UnknownAsset);
}

TEST_CASE("bad horizons are rejected", "[mpc][config]") {
	CHECK_THROWS_AS(exact(10, 0).check(), DomainError);
	CHECK_THROWS_AS(exact(10, 11).check(), DomainError);
	CHECK_NOTHROW(exact(10, 10).check());
	const MesConfig cfg = case1_config();
	std::vector<plant::ExogenousFrame> fc(3);
	CHECK_THROWS_AS(mpc::build_problem(cfg, fc, SystemState{}, 4), RangeError);
	CHECK_THROWS_AS(mpc::build_problem(cfg, fc, SystemState{}, 0), DomainError);
}

TEST_CASE("missing storage state is a state error", "[mpc][builder]") {
	const MesConfig cfg = case1_config();
	std::vector<plant::ExogenousFrame> fc(3);
	CHECK_THROWS_AS(mpc::build_problem(cfg, fc, SystemState{}, 3), StateError);
}

TEST_CASE("closed loop reproduces the open-loop objective", "[mpc][consistency]") {
	for (const auto &base : {case1_config(), case2_config()}) {
		const MesConfig cfg = base;
		const auto p = profiles(cfg, 2, 11);
		auto mc = exact(48, 48);
		mc.model_equals_plant = true;
		const auto run = mpc::receding_horizon_run(cfg, mc, p, 10, 48);
		REQUIRE(run.solves.size() == 1);
		const double open = run.solves[0].objective;
		CHECK(std::abs(run.episode.objective - open) <= 1e-5 * std::max(1.0, std::abs(open)));
	}
}

TEST_CASE("planned actions are feasible setpoints", "[mpc][builder]") {
	const MesConfig cfg = with_resolved_weights(case2_config(), 1e-4);
	const auto p = profiles(cfg, 1, 5);
	const auto fc = data::forecast_frames(p, nullptr, 0, 24);
	const auto exo = data::to_exogenous(p);
	const auto x0 = plant::initial_state(cfg, exo, 0);
	const auto plan = mpc::solve_plan(cfg, exact(24, 24), fc, x0, 24);
	REQUIRE(plan.actions.size() == 24);
	for (const auto &a : plan.actions) {
		REQUIRE(is_feasible(a, cfg));
		REQUIRE(project_action(a, cfg) == a);
	}
}

TEST_CASE("longer control horizons stay close to re-solving every step", "[mpc][horizon]") {
	const MesConfig cfg = case1_config();
	const auto p = profiles(cfg, 3, 21);
	auto every = exact(96, 1);
	auto daily = exact(96, 96);
	every.limits.gap_tol = daily.limits.gap_tol = 1e-6;
	const auto a = mpc::receding_horizon_run(cfg, every, p, 0, 96);
	const auto b = mpc::receding_horizon_run(cfg, daily, p, 0, 96);
	CHECK(a.solves.size() == 96);
	CHECK(b.solves.size() == 1);
	CHECK(std::abs(a.episode.objective - b.episode.objective) <= 0.05 * std::abs(b.episode.objective));
}

TEST_CASE("foresight is worth something over a one-step horizon", "[mpc][horizon]") {
	const MesConfig cfg = case1_config();
	const auto p = profiles(cfg, 3, 8);
	auto greedy = exact(1, 1), ahead = exact(96, 24);
	greedy.model_equals_plant = ahead.model_equals_plant = true;
	const auto g = mpc::receding_horizon_run(cfg, greedy, p, 0, 96);
	const auto h = mpc::receding_horizon_run(cfg, ahead, p, 0, 96);
	CHECK(h.episode.objective <= g.episode.objective + 1e-6 * std::abs(g.episode.objective));
}

TEST_CASE("forecast noise does not help on average", "[mpc][forecast]") {
	MesConfig cfg = case1_config();
	const auto p = profiles(cfg, 6, 2);
	auto spec = data::default_forecast_targets(cfg.case_label, 9);
	data::calibrate(spec, p);
	auto perfect = exact(96, 48), noisy = exact(96, 48);
	perfect.limits.gap_tol = noisy.limits.gap_tol = 1e-4;
	noisy.forecast = spec;
	const auto a = mpc::receding_horizon_run(cfg, perfect, p, 0, 3 * 96);
	const auto b = mpc::receding_horizon_run(cfg, noisy, p, 0, 3 * 96);
	CHECK(a.episode.objective <= b.episode.objective);
}

TEST_CASE("solve log CSV layout", "[mpc][io]") {
	mpc::SolveLog s;
	s.t = 4;
	s.n = 8;
	s.c = 2;
	s.seconds = 0.5;
	s.node_count = 3;
	s.objective = 12.5;
	std::ostringstream with, without;
	mpc::write_solve_log_csv(with, {s});
	mpc::write_solve_log_csv(without, {s}, false);
	CHECK(with.str() == "t,N,C,solve_seconds,node_count,objective,status,gap,softened\n4,8,2,0.500000,3,12.5,Optimal,0,0\n");
	CHECK(without.str() == "t,N,C,node_count,objective,status,gap,softened\n4,8,2,3,12.5,Optimal,0,0\n");
}

TEST_CASE("running past the data is a range error", "[mpc][loop]") {
	const MesConfig cfg = case1_config();
	const auto p = profiles(cfg, 1);
	CHECK_THROWS_AS(mpc::receding_horizon_run(cfg, exact(96, 96), p, 10, 20), RangeError);
}
