#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "mesbench/bench/bench.hpp"
#include "mesbench/core/errors.hpp"

using namespace mesbench;
using namespace mesbench::bench;
using Catch::Approx;

namespace {

rl::PpoHyper tiny_ppo() {
	rl::PpoHyper h = rl::PpoHyper::defaults(CaseLabel::simple);
	h.n_steps = 64;
	h.nminibatches = 2;
	h.noptepochs = 2;
	h.hidden = 8;
	return h;
}

std::size_t lines(const std::string &s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

} // namespace

TEST_CASE("runtime statistics", "[bench][stats]") {
	const auto s = runtime_stats({1.0, 2.0, 3.0});
	CHECK(s.min == 1.0);
	CHECK(s.max == 3.0);
	CHECK(s.mean == 2.0);
	CHECK(s.total == 6.0);
	CHECK(s.std == Approx(std::sqrt(2.0 / 3.0)));
	CHECK(runtime_stats({5.0}).std == 0.0);
	CHECK_THROWS_AS(runtime_stats({}), EmptyError);
}

TEST_CASE("relative performance", "[bench][stats]") {
	CHECK(relative_performance(10.0, 10.0) == 100.0);
	CHECK(relative_performance(10.0, 20.0) == 50.0);
	CHECK(relative_performance(10.0, 8.0) == 125.0);
	CHECK_THROWS_AS(relative_performance(0.0, 10.0), DomainError);
	CHECK_THROWS_AS(relative_performance(10.0, -1.0), DomainError);
}

TEST_CASE("held-out data is separate from training data", "[bench][data]") {
	CHECK(heldout_seed(1) != 1);
	CHECK(heldout_seed(1) != heldout_seed(2));
	const auto w = heldout_week_starts(35040);
	REQUIRE(w.size() == 3);
	for (auto s : w)
		CHECK(s + 672 <= 35040);
	const auto p = year_profiles(1, case1_config(), 96);
	CHECK(p.at(data::kPrice).size() == 35040 + 96);
}

TEST_CASE("learning curve shape", "[bench][curve]") {
	LearningOptions opt;
	opt.kind = "ppo";
	opt.cfg = case1_config();
	opt.ppo = tiny_ppo();
	opt.seeds = {1, 2};

	SECTION("one row per evaluation point plus the start") {
		opt.budget = 256;
		opt.eval_every = 128;
		const auto c = learning_curve(opt);
		CHECK(c.steps == std::vector<std::size_t>{0, 128, 256});
		REQUIRE(c.returns.size() == 2);
		CHECK(c.returns[0].size() == 3);
		CHECK(c.agents.size() == 2);
		std::ostringstream s;
		write_curve_csv(s, c);
		CHECK(lines(s.str()) == 4);
		CHECK(s.str().rfind("step,mean_return,std_return,seed_1,seed_2\n", 0) == 0);
		CHECK(c.mean_at(1) == Approx((c.returns[0][1] + c.returns[1][1]) / 2.0));
	}
	SECTION("zero budget evaluates only the untrained policy") {
		opt.budget = 0;
		const auto c = learning_curve(opt);
		CHECK(c.steps == std::vector<std::size_t>{0});
	}
	SECTION("two runs give the same curve") {
		opt.budget = 128;
		opt.eval_every = 64;
		std::ostringstream a, b;
		write_curve_csv(a, learning_curve(opt));
		write_curve_csv(b, learning_curve(opt));
		CHECK(a.str() == b.str());
	}
}

TEST_CASE("hyper-parameter space", "[bench][search]") {
	std::mt19937_64 rng(1);
	const auto space = HyperSpace::ppo_default();
	REQUIRE_NOTHROW(space.check());
	for (int k = 0; k < 200; ++k) {
		const auto s = space.draw(rng);
		const auto h = apply_ppo(rl::PpoHyper{}, s);
		REQUIRE_NOTHROW(h.check());
		REQUIRE(h.gamma >= 0.8);
		REQUIRE(h.gamma <= 0.999);
		REQUIRE(h.learning_rate >= 1e-5);
		REQUIRE(h.learning_rate <= 1e-2);
		REQUIRE(h.noptepochs >= 1);
		REQUIRE(h.noptepochs <= 10);
	}
	const auto t = HyperSpace::td3_default();
	for (int k = 0; k < 200; ++k)
		REQUIRE_NOTHROW(apply_td3(rl::Td3Hyper{}, t.draw(rng)).check());

	HyperSpace bad;
	CHECK_THROWS_AS(bad.check(), DomainError);
	bad.ranges.push_back({"gamma", HyperRange::Kind::uniform, 1.0, 0.5, {}});
	CHECK_THROWS_AS(bad.check(), DomainError);
	CHECK_THROWS_AS(apply_ppo(rl::PpoHyper{}, {{"gamma", "abc"}}), DomainError);
}

TEST_CASE("collapsed space reproduces the defaults", "[bench][search]") {
	std::mt19937_64 rng(2);
	const auto d = rl::Td3Hyper::defaults(CaseLabel::complex);
	const auto h = apply_td3(rl::Td3Hyper{}, HyperSpace::collapsed(d).draw(rng));
	CHECK(h.gamma == d.gamma);
	CHECK(h.learning_rate == d.learning_rate);
	CHECK(h.batch_size == d.batch_size);
	CHECK(h.train_freq == d.train_freq);
	CHECK(h.noise_type == d.noise_type);
	CHECK(h.noise_std == d.noise_std);
	const auto p = rl::PpoHyper::defaults(CaseLabel::simple);
	const auto q = apply_ppo(rl::PpoHyper{}, HyperSpace::collapsed(p).draw(rng));
	CHECK(q.cliprange == p.cliprange);
	CHECK(q.lambda == p.lambda);
	CHECK(q.n_steps == p.n_steps);
}

TEST_CASE("random search bookkeeping", "[bench][search]") {
	SearchOptions opt;
	opt.kind = "ppo";
	opt.cfg = case1_config();
	opt.space = HyperSpace::collapsed(tiny_ppo());
	opt.train_budget = 64;

	SECTION("a single trial is its own best") {
		opt.trials = 1;
		const auto r = random_search(opt);
		REQUIRE(r.trials.size() == 1);
		CHECK(r.best == 0);
		CHECK(r.best_trial().best_so_far == r.best_trial().score);
	}
	SECTION("best so far never drops") {
		opt.trials = 3;
		opt.space = HyperSpace::ppo_default();
		for (auto &rg : opt.space.ranges)
			if (rg.name == "n_steps")
				rg.choices = {"64"};
		const auto r = random_search(opt);
		REQUIRE(r.trials.size() == 3);
		for (std::size_t i = 1; i < 3; ++i)
			REQUIRE(r.trials[i].best_so_far >= r.trials[i - 1].best_so_far);
		CHECK(r.best_trial().score == r.trials.back().best_so_far);
		std::ostringstream s;
		write_history_csv(s, r);
		CHECK(lines(s.str()) == 4);
		CHECK(s.str().rfind("trial,score,best_so_far,status,", 0) == 0);
	}
}

TEST_CASE("small benchmark", "[bench][benchmark]") {
	BenchmarkOptions opt;
	opt.cfg = case1_config();
	opt.eval_weeks = 1;
	opt.seeds = {1};
	opt.mpc.n_steps = 96;
	opt.mpc.c_steps = 48;
	opt.run_realistic_mpc = false;
	const auto spec = rl::make_env_spec(opt.cfg, data::to_exogenous(year_profiles(1, opt.cfg)),
	                                    default_action_mode("ppo", opt.cfg.case_label), 672);
	AgentEntry untrained{"ppo_untrained", {make_agent("ppo", spec, 1, tiny_ppo())}};
	const auto r = run_benchmark(opt, {untrained});
	CHECK(r.eval_steps == 672);
	const auto &ref = r.at(kPerfectMpc);
	CHECK(ref.relative == Approx(100.0));
	CHECK_FALSE(ref.failed);
	CHECK(r.at(kRandomAgent).j > ref.j);
	CHECK(r.at("ppo_untrained").j_per_seed.size() == 1);
	CHECK_THROWS_AS(r.at("nope"), UnknownAsset);
	std::ostringstream csv, rt, txt;
	write_report_csv(csv, r);
	write_runtime_csv(rt, r);
	write_report_text(txt, r);
	CHECK(lines(csv.str()) == 1 + r.rows.size());
	CHECK(txt.str().find(kPerfectMpc) != std::string::npos);
}
