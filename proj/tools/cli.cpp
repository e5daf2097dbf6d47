#include "cli.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include "mesbench/bench/bench.hpp"
#include "mesbench/core/errors.hpp"
#include "mesbench/data/forecast.hpp"
#include "mesbench/data/timeseries.hpp"
#include "mesbench/mpc/mpc.hpp"
#include "mesbench/plant/plant.hpp"
#include "mesbench/rl/agent.hpp"

#ifndef MESBENCH_DEFAULT_DATA_DIR
#define MESBENCH_DEFAULT_DATA_DIR "."
#endif

namespace mesbench::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// Bad arguments found after parsing. Raised before anything is written.
class UsageError : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

struct Common {
	std::string case_name = "case1";
	std::string config_path;
	std::uint64_t seed = 1;
	std::size_t jobs = 1;
	std::string out = "mesbench_out";
	std::optional<double> comfort_weight; // per MWh
	std::optional<double> gas_price;      // per MWh
	std::string profiles_dir;
};

fs::path data_dir() {
	if (const char *env = std::getenv("MESBENCH_DATA_DIR"); env && *env)
		return env;
	return MESBENCH_DEFAULT_DATA_DIR;
}

// flags > config file > preset
MesConfig resolve_config(const Common &c, std::vector<std::string> &config_paths) {
	MesConfig cfg;
	if (!c.config_path.empty()) {
		cfg = load_config(c.config_path);
		config_paths.push_back(c.config_path);
	} else {
		const fs::path preset = data_dir() / "presets" / (c.case_name + ".cfg");
		if (fs::exists(preset)) {
			cfg = load_config(preset);
			config_paths.push_back(preset.string());
		} else {
			cfg = c.case_name == "case2" ? case2_config() : case1_config();
			config_paths.push_back("builtin:" + c.case_name);
		}
	}
	if (c.comfort_weight) {
		cfg.reward_weights.b = *c.comfort_weight / 1e6;
		cfg.reward_weights.b_auto = false;
	}
	if (c.gas_price)
		cfg.gas_price = *c.gas_price / 1e6;
	validate_config(cfg);
	return cfg;
}

std::size_t steps_per_day(const MesConfig &cfg) {
	const double k = 86400.0 / cfg.grid.step_s;
	if (std::abs(k - std::round(k)) > 1e-9)
		throw ConfigError({"step length must divide a day"});
	return static_cast<std::size_t>(std::llround(k));
}

data::Profiles load_profiles(const Common &c, const MesConfig &cfg, std::size_t n_steps) {
	TimeGrid g = cfg.grid;
	g.n_steps = n_steps;
	if (c.profiles_dir.empty())
		return data::synth_profiles(c.seed, g, cfg);
	data::Profiles p;
	for (const char *name :
	     {data::kThermalDemand, data::kElectricDemand, data::kWindSpeed, data::kIrradiance, data::kPrice})
		p[name] = data::load_timeseries_csv(fs::path(c.profiles_dir) / (std::string(name) + ".csv"),
		                                    data::unit_of(name), g);
	return p;
}

std::vector<std::uint64_t> seed_list(std::uint64_t base, std::size_t count) {
	std::vector<std::uint64_t> s;
	for (std::size_t i = 0; i < count; ++i)
		s.push_back(base + i);
	return s;
}

std::string utc_now() {
	const std::time_t t = std::time(nullptr);
	char buf[32];
	std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
	return buf;
}

// Output directory plus the manifest listing every file written into it.
class Outputs {
public:
	Outputs(std::string command, fs::path dir) : command_(std::move(command)), dir_(std::move(dir)) {}

	void write(const std::string &name, const std::function<void(std::ostream &)> &fn) {
		fs::create_directories(dir_);
		const fs::path p = dir_ / name;
		std::ofstream out(p, std::ios::binary);
		if (!out)
			throw Error("cannot write " + p.string());
		fn(out);
		out.close();
		if (!out)
			throw Error("failed writing " + p.string());
		files_.push_back(name);
	}

	void finish(const std::vector<std::string> &config_paths, const std::vector<std::uint64_t> &seeds,
	            double wall_seconds) {
		json m;
		m["command"] = command_;
		m["tool_version"] = kVersion;
		m["config_paths"] = config_paths;
		m["seeds"] = seeds;
		m["output_dir"] = dir_.string();
		m["finished_utc"] = utc_now();
		m["wall_clock_seconds"] = wall_seconds;
		json arts = json::array();
		for (const auto &f : files_)
			arts.push_back({{"file", f}, {"sha256", sha256_file(dir_ / f)}});
		m["artifacts"] = arts;
		fs::create_directories(dir_);
		std::ofstream out(dir_ / "manifest.json");
		out << m.dump(2) << '\n';
	}

private:
	std::string command_;
	fs::path dir_;
	std::vector<std::string> files_;
};

std::string f6(double v) {
	char buf[64];
	std::snprintf(buf, sizeof buf, "%.6f", v);
	return buf;
}

void write_summary(std::ostream &out, const std::string &controller, const plant::Episode &ep) {
	out << "controller,steps,objective,cost,comfort_mwh\n";
	out << controller << ',' << ep.steps.size() << ',' << f6(ep.objective) << ',' << f6(ep.cost) << ','
	    << f6(ep.comfort_wh / 1e6) << '\n';
}

bench::HyperSample read_hyper(const std::string &path) {
	std::ifstream in(path);
	if (!in)
		throw Error("cannot open " + path);
	json j;
	try {
		in >> j;
	} catch (const json::exception &e) {
		throw ParseError(path + ": " + e.what());
	}
	if (j.contains("params"))
		j = j["params"];
	if (!j.is_object())
		throw ParseError(path + ": expected a JSON object of hyper-parameters");
	bench::HyperSample s;
	for (auto it = j.begin(); it != j.end(); ++it)
		s[it.key()] = it.value().is_string() ? it.value().get<std::string>() : it.value().dump();
	return s;
}

struct Ctx {
	Common c;
	std::string command;
	std::vector<std::string> config_paths;
	std::chrono::steady_clock::time_point t_start = std::chrono::steady_clock::now();

	double elapsed() const {
		return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
	}
};

// ---------------------------------------------------------------------------

struct DataGenArgs {
	std::size_t days = 365;
};

void cmd_data_gen(Ctx &ctx, const DataGenArgs &a) {
	if (a.days == 0)
		throw UsageError("--days must be positive");
	if (!ctx.c.profiles_dir.empty())
		throw UsageError("data-gen synthesizes profiles; --profiles is not accepted");
	const MesConfig cfg = resolve_config(ctx.c, ctx.config_paths);
	const auto profiles = load_profiles(ctx.c, cfg, a.days * steps_per_day(cfg));
	Outputs out(ctx.command, ctx.c.out);
	for (const auto &[name, ts] : profiles)
		out.write(name + ".csv", [&](std::ostream &o) { data::write_timeseries_csv(o, ts, name); });
	out.write("config.json", [&](std::ostream &o) { o << dump_config(cfg); });
	out.finish(ctx.config_paths, {ctx.c.seed}, ctx.elapsed());
}

struct SimulateArgs {
	std::string controller = "random";
	std::string agent;
	std::size_t start_day = 0, days = 7;
	double soc = 0.5;
};

void cmd_simulate(Ctx &ctx, const SimulateArgs &a) {
	if (a.controller == "agent" && a.agent.empty())
		throw UsageError("--controller agent needs --agent PATH");
	if (a.controller != "agent" && !a.agent.empty())
		throw UsageError("--agent is only used with --controller agent");
	if (a.days == 0)
		throw UsageError("--days must be positive");
	MesConfig cfg = resolve_config(ctx.c, ctx.config_paths);
	const std::size_t spd = steps_per_day(cfg), t0 = a.start_day * spd, n = a.days * spd;
	const auto profiles = load_profiles(ctx.c, cfg, t0 + n);
	const auto exo = data::to_exogenous(profiles);
	cfg = with_resolved_weights(cfg, exo.max_price());

	std::unique_ptr<rl::Agent> agent;
	plant::Controller ctrl;
	if (a.controller == "zero") {
		ctrl = [cfg](const SystemState &) { return zero_action(cfg); };
	} else if (a.controller == "random") {
		ctrl = bench::random_controller(cfg, ctx.c.seed);
	} else {
		agent = rl::load_agent_file(a.agent);
		if (agent->spec().action_dim() != controllable_setpoints(cfg).size())
			throw ShapeError("agent acts on " + std::to_string(agent->spec().action_dim()) +
			                 " setpoints, configuration has " + std::to_string(controllable_setpoints(cfg).size()));
		ctrl = agent->controller();
	}
	std::map<std::string, double> soc;
	for (const auto &as : cfg.assets)
		if (as.is_storage())
			soc[as.id] = a.soc;
	const auto ep = plant::run_episode(ctrl, plant::initial_state(cfg, exo, t0, soc), n, exo, cfg);
	Outputs out(ctx.command, ctx.c.out);
	out.write("trajectory.csv", [&](std::ostream &o) { plant::write_trajectory_csv(o, ep, exo, cfg); });
	out.write("summary.csv", [&](std::ostream &o) { write_summary(o, a.controller, ep); });
	out.finish(ctx.config_paths, {ctx.c.seed}, ctx.elapsed());
}

struct MpcArgs {
	std::size_t horizon = 288, control = 96;
	std::string forecast = "perfect";
	bool model_equals_plant = false;
	std::size_t start_day = 0, days = 7;
	std::size_t max_nodes = 200;
	double gap = 1e-3;
};

mpc::MpcConfig mpc_config(const MpcArgs &a) {
	mpc::MpcConfig mc;
	mc.n_steps = a.horizon;
	mc.c_steps = a.control;
	mc.model_equals_plant = a.model_equals_plant;
	mc.limits.max_nodes = a.max_nodes;
	mc.limits.gap_tol = a.gap;
	return mc;
}

void check_mpc_args(const MpcArgs &a) {
	if (a.horizon == 0 || a.control == 0 || a.control > a.horizon)
		throw UsageError("need 1 <= --control <= --horizon");
	if (a.max_nodes == 0)
		throw UsageError("--max-nodes must be positive");
	if (!(a.gap >= 0.0))
		throw UsageError("--gap must be non-negative");
}

void cmd_mpc_run(Ctx &ctx, const MpcArgs &a) {
	check_mpc_args(a);
	if (a.days == 0)
		throw UsageError("--days must be positive");
	MesConfig cfg = resolve_config(ctx.c, ctx.config_paths);
	const std::size_t spd = steps_per_day(cfg), t0 = a.start_day * spd, n = a.days * spd;
	const auto profiles = load_profiles(ctx.c, cfg, t0 + n + a.horizon);
	const auto exo = data::to_exogenous(profiles);
	cfg = with_resolved_weights(cfg, exo.max_price());
	auto mc = mpc_config(a);
	if (a.forecast == "realistic") {
		auto fs = data::default_forecast_targets(cfg.case_label, ctx.c.seed);
		data::calibrate(fs, profiles);
		mc.forecast = fs;
	}
	const auto run = mpc::receding_horizon_run(cfg, mc, profiles, t0, n);
	Outputs out(ctx.command, ctx.c.out);
	out.write("trajectory.csv", [&](std::ostream &o) { plant::write_trajectory_csv(o, run.episode, exo, cfg); });
	out.write("solves.csv", [&](std::ostream &o) { mpc::write_solve_log_csv(o, run.solves, false); });
	out.write("summary.csv", [&](std::ostream &o) { write_summary(o, "lmpc_" + a.forecast, run.episode); });
	out.write("solve_times.csv", [&](std::ostream &o) {
		o << "t,solve_seconds\n";
		for (const auto &s : run.solves)
			o << s.t << ',' << f6(s.seconds) << '\n';
	});
	out.finish(ctx.config_paths, {ctx.c.seed}, ctx.elapsed());
}

struct TrainArgs {
	std::string kind;
	std::size_t steps = 50000, eval_every = 5000, seeds = 1;
	std::string hyper;
};

void cmd_train(Ctx &ctx, const TrainArgs &a) {
	if (a.eval_every == 0)
		throw UsageError("--eval-every must be positive");
	if (a.steps > 0 && a.steps < a.eval_every)
		throw UsageError("--steps must be 0 or at least --eval-every");
	if (a.seeds == 0)
		throw UsageError("--seeds must be positive");
	const MesConfig cfg = resolve_config(ctx.c, ctx.config_paths);
	bench::LearningOptions lo;
	lo.kind = a.kind;
	lo.cfg = cfg;
	lo.budget = a.steps;
	lo.eval_every = a.eval_every;
	lo.seeds = seed_list(ctx.c.seed, a.seeds);
	lo.jobs = ctx.c.jobs;
	if (!a.hyper.empty()) {
		const auto s = read_hyper(a.hyper);
		ctx.config_paths.push_back(a.hyper);
		if (a.kind == "ppo")
			lo.ppo = bench::apply_ppo(rl::PpoHyper::defaults(cfg.case_label), s);
		else
			lo.td3 = bench::apply_td3(rl::Td3Hyper::defaults(cfg.case_label), s);
	}
	const auto curve = bench::learning_curve(lo);
	Outputs out(ctx.command, ctx.c.out);
	out.write("curve.csv", [&](std::ostream &o) { bench::write_curve_csv(o, curve); });
	for (std::size_t i = 0; i < curve.agents.size(); ++i)
		out.write("agent_" + a.kind + "_seed" + std::to_string(lo.seeds[i]) + ".txt",
		          [&](std::ostream &o) { curve.agents[i]->save(o); });
	out.finish(ctx.config_paths, lo.seeds, ctx.elapsed());
}

struct EvaluateArgs {
	std::vector<std::string> agents;
	std::size_t weeks = 4, start_day = 0, seeds = 1;
};

void cmd_evaluate(Ctx &ctx, const EvaluateArgs &a) {
	if (a.weeks == 0 || a.seeds == 0)
		throw UsageError("--weeks and --seeds must be positive");
	std::vector<std::unique_ptr<rl::Agent>> agents;
	for (const auto &p : a.agents) {
		agents.push_back(rl::load_agent_file(p));
		ctx.config_paths.push_back(p);
	}
	const auto seeds = seed_list(ctx.c.seed, a.seeds);
	std::ostringstream csv;
	csv << "agent,seed,heldout_return,objective,cost,comfort_mwh\n";
	for (std::size_t i = 0; i < agents.size(); ++i) {
		const auto &ag = *agents[i];
		const MesConfig &cfg = ag.spec().cfg; // evaluated on the plant it was trained for
		const std::size_t spd = steps_per_day(cfg), t0 = a.start_day * spd, n = a.weeks * 7 * spd;
		for (auto s : seeds) {
			const auto held = data::to_exogenous(bench::year_profiles(bench::heldout_seed(s), cfg, 0));
			if (t0 + n > held.size())
				throw RangeError("evaluation window runs past the end of the year");
			const double ret = bench::evaluate_agent(ag, held, bench::heldout_week_starts(held.size()));
			const auto ep =
			    plant::run_episode(ag.controller(), plant::initial_state(cfg, held, t0), n, held, cfg);
			csv << fs::path(a.agents[i]).filename().string() << ',' << s << ',' << f6(ret) << ',' << f6(ep.objective)
			    << ',' << f6(ep.cost) << ',' << f6(ep.comfort_wh / 1e6) << '\n';
		}
	}
	Outputs out(ctx.command, ctx.c.out);
	out.write("evaluation.csv", [&](std::ostream &o) { o << csv.str(); });
	out.finish(ctx.config_paths, seeds, ctx.elapsed());
}

struct BenchmarkArgs {
	std::size_t weeks = 4, seeds = 3, start_day = 0;
	bool full_year = false, no_perfect = false, no_realistic = false;
	std::vector<std::string> agents; // name=path
	std::vector<std::string> train;
	std::size_t train_steps = 50000;
	MpcArgs mpc;
};

void cmd_benchmark(Ctx &ctx, const BenchmarkArgs &a) {
	check_mpc_args(a.mpc);
	if (a.seeds == 0 || (a.weeks == 0 && !a.full_year))
		throw UsageError("--weeks and --seeds must be positive");
	if (!a.train.empty() && a.train_steps == 0)
		throw UsageError("--train-steps must be positive");
	std::vector<std::pair<std::string, std::string>> named;
	for (const auto &s : a.agents) {
		const auto eq = s.find('=');
		if (eq == std::string::npos || eq == 0 || eq + 1 == s.size())
			throw UsageError("--agent expects NAME=PATH, got '" + s + "'");
		named.emplace_back(s.substr(0, eq), s.substr(eq + 1));
	}
	const MesConfig cfg = resolve_config(ctx.c, ctx.config_paths);
	bench::BenchmarkOptions bo;
	bo.cfg = cfg;
	bo.eval_weeks = a.full_year ? 52 : a.weeks;
	bo.seeds = seed_list(ctx.c.seed, a.seeds);
	bo.start_day = a.start_day;
	bo.mpc = mpc_config(a.mpc);
	bo.run_perfect_mpc = !a.no_perfect;
	bo.run_realistic_mpc = !a.no_realistic;
	bo.jobs = ctx.c.jobs;

	Outputs out(ctx.command, ctx.c.out);
	std::vector<bench::AgentEntry> entries;
	for (const auto &[name, path] : named) {
		entries.push_back({name, {std::shared_ptr<const rl::Agent>(rl::load_agent_file(path))}});
		ctx.config_paths.push_back(path);
	}
	std::vector<bench::LearningCurve> curves;
	for (const auto &kind : a.train) {
		bench::LearningOptions lo;
		lo.kind = kind;
		lo.cfg = cfg;
		lo.budget = a.train_steps;
		lo.eval_every = a.train_steps;
		lo.seeds = bo.seeds;
		lo.jobs = ctx.c.jobs;
		curves.push_back(bench::learning_curve(lo));
		bench::AgentEntry e{kind, {}};
		for (const auto &ag : curves.back().agents)
			e.agents.push_back(ag);
		entries.push_back(std::move(e));
		out.write("curve_" + kind + ".csv", [&](std::ostream &o) { bench::write_curve_csv(o, curves.back()); });
	}
	const auto rep = bench::run_benchmark(bo, entries);
	out.write("report.csv", [&](std::ostream &o) { bench::write_report_csv(o, rep); });
	out.write("report.txt", [&](std::ostream &o) { bench::write_report_text(o, rep); });
	out.write("runtime.csv", [&](std::ostream &o) { bench::write_runtime_csv(o, rep); });
	out.finish(ctx.config_paths, bo.seeds, ctx.elapsed());
	bench::write_report_text(std::cout, rep);
}

struct HpoArgs {
	std::string kind;
	std::size_t trials = 8, train_steps = 10000;
	bool collapsed = false;
};

void cmd_hpo(Ctx &ctx, const HpoArgs &a) {
	if (a.trials == 0 || a.train_steps == 0)
		throw UsageError("--trials and --train-steps must be positive");
	const MesConfig cfg = resolve_config(ctx.c, ctx.config_paths);
	bench::SearchOptions so;
	so.kind = a.kind;
	so.cfg = cfg;
	so.trials = a.trials;
	so.train_budget = a.train_steps;
	so.seed = ctx.c.seed;
	so.jobs = ctx.c.jobs;
	if (a.kind == "ppo")
		so.space = a.collapsed ? bench::HyperSpace::collapsed(rl::PpoHyper::defaults(cfg.case_label))
		                       : bench::HyperSpace::ppo_default();
	else
		so.space = a.collapsed ? bench::HyperSpace::collapsed(rl::Td3Hyper::defaults(cfg.case_label))
		                       : bench::HyperSpace::td3_default();
	const auto res = bench::random_search(so);
	Outputs out(ctx.command, ctx.c.out);
	out.write("history.csv", [&](std::ostream &o) { bench::write_history_csv(o, res); });
	const auto &best = res.best_trial();
	if (!best.failed) {
		json j;
		j["kind"] = a.kind;
		j["trial"] = best.id;
		j["score"] = f6(best.score);
		j["params"] = best.params;
		out.write("best.json", [&](std::ostream &o) { o << j.dump(2) << '\n'; });
	}
	out.finish(ctx.config_paths, {ctx.c.seed}, ctx.elapsed());
	if (best.failed)
		throw SolverFailure("every trial failed; first error: " + best.error);
}

struct PlotArgs {
	std::string what;
	std::string in, out;
	std::vector<std::string> columns;
};

void cmd_plot(const PlotArgs &a) {
	std::error_code ec;
	if (fs::exists(a.out) && fs::equivalent(a.in, a.out, ec))
		throw UsageError("refusing to overwrite the input CSV");
	if (a.what == "curve" && !a.columns.empty())
		throw UsageError("--columns applies to dispatch plots only");
	std::ifstream in(a.in);
	if (!in)
		throw Error("cannot open " + a.in);
	std::ostringstream svg;
	if (a.what == "dispatch")
		plot_dispatch_svg(in, svg, a.columns);
	else
		plot_curve_svg(in, svg);
	if (fs::path(a.out).has_parent_path())
		fs::create_directories(fs::path(a.out).parent_path());
	std::ofstream out(a.out, std::ios::binary);
	if (!out)
		throw Error("cannot write " + a.out);
	out << svg.str();
}

void add_common(CLI::App *sub, Common &c, bool with_data = true) {
	sub->add_option("--case", c.case_name, "built-in preset")->check(CLI::IsMember({"case1", "case2"}));
	sub->add_option("--config", c.config_path, "JSON configuration (overrides the preset)")
	    ->check(CLI::ExistingFile);
	sub->add_option("--seed", c.seed, "base seed for every random draw");
	sub->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
	sub->add_option("--out", c.out, "output directory");
	sub->add_option("--comfort-weight", c.comfort_weight, "comfort weight b, currency per MWh")
	    ->check(CLI::PositiveNumber);
	sub->add_option("--gas-price", c.gas_price, "gas price, currency per MWh")->check(CLI::NonNegativeNumber);
	if (with_data)
		sub->add_option("--profiles", c.profiles_dir, "directory of <series>.csv profiles instead of synthetic data")
		    ->check(CLI::ExistingDirectory);
}

void add_mpc(CLI::App *sub, MpcArgs &m) {
	sub->add_option("--horizon", m.horizon, "prediction horizon N in steps");
	sub->add_option("--control", m.control, "control horizon C in steps");
	sub->add_option("--max-nodes", m.max_nodes, "branch-and-bound node limit per solve");
	sub->add_option("--gap", m.gap, "relative optimality gap per solve");
}

std::string joined(const std::vector<std::string> &args) {
	std::string s = "mesbench";
	for (const auto &a : args)
		s += ' ' + a;
	return s;
}

} // namespace

std::string sha256_file(const fs::path &p) {
	std::ifstream in(p, std::ios::binary);
	if (!in)
		throw Error("cannot read " + p.string());
	std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> md(EVP_MD_CTX_new(), EVP_MD_CTX_free);
	if (!md || EVP_DigestInit_ex(md.get(), EVP_sha256(), nullptr) != 1)
		throw Error("sha256 init failed");
	char buf[1 << 16];
	while (in) {
		in.read(buf, sizeof buf);
		if (in.gcount() > 0)
			EVP_DigestUpdate(md.get(), buf, static_cast<std::size_t>(in.gcount()));
	}
	unsigned char h[EVP_MAX_MD_SIZE];
	unsigned int len = 0;
	EVP_DigestFinal_ex(md.get(), h, &len);
	std::string hex;
	char two[3];
	for (unsigned i = 0; i < len; ++i) {
		std::snprintf(two, sizeof two, "%02x", h[i]);
		hex += two;
	}
	return hex;
}

int run(const std::vector<std::string> &args) {
	std::vector<const char *> argv{"mesbench"};
	for (const auto &a : args)
		argv.push_back(a.c_str());
	return run(static_cast<int>(argv.size()), argv.data());
}

int run(int argc, const char *const *argv) {
	CLI::App app{"Benchmark of MILP model-predictive control against PPO and TD3 on multi-energy systems."};
	app.name("mesbench");
	app.set_version_flag("--version", kVersion);
	app.require_subcommand(1);
	app.failure_message(CLI::FailureMessage::help);

	Ctx ctx;
	DataGenArgs dg;
	SimulateArgs sim;
	MpcArgs mpc;
	TrainArgs tr;
	EvaluateArgs ev;
	BenchmarkArgs bm;
	HpoArgs hp;
	PlotArgs pl;

	auto *s_dg = app.add_subcommand("data-gen", "write synthetic demand, weather and price profiles");
	add_common(s_dg, ctx.c, false);
	s_dg->add_option("--days", dg.days, "length in days");

	auto *s_sim = app.add_subcommand("simulate", "run one controller over one window");
	add_common(s_sim, ctx.c);
	s_sim->add_option("--controller", sim.controller)->check(CLI::IsMember({"zero", "random", "agent"}));
	s_sim->add_option("--agent", sim.agent, "agent checkpoint")->check(CLI::ExistingFile);
	s_sim->add_option("--start-day", sim.start_day);
	s_sim->add_option("--days", sim.days);
	s_sim->add_option("--soc", sim.soc, "initial state of charge, fraction")->check(CLI::Range(0.0, 1.0));

	auto *s_mpc = app.add_subcommand("mpc-run", "receding-horizon MILP controller over one window");
	add_common(s_mpc, ctx.c);
	add_mpc(s_mpc, mpc);
	s_mpc->add_option("--forecast", mpc.forecast)->check(CLI::IsMember({"perfect", "realistic"}));
	s_mpc->add_flag("--model-equals-plant", mpc.model_equals_plant, "linear plant without derating");
	s_mpc->add_option("--start-day", mpc.start_day);
	s_mpc->add_option("--days", mpc.days);

	auto *s_tr = app.add_subcommand("train", "train PPO or TD3 and write its learning curve");
	add_common(s_tr, ctx.c, false);
	s_tr->add_option("kind", tr.kind)->required()->check(CLI::IsMember({"ppo", "td3"}));
	s_tr->add_option("--steps", tr.steps, "training budget in environment steps");
	s_tr->add_option("--eval-every", tr.eval_every);
	s_tr->add_option("--seeds", tr.seeds, "number of seeds, counting up from --seed");
	s_tr->add_option("--hyper", tr.hyper, "JSON hyper-parameters (hpo best.json works)")->check(CLI::ExistingFile);

	auto *s_ev = app.add_subcommand("evaluate", "score saved agents on held-out data");
	add_common(s_ev, ctx.c, false);
	s_ev->add_option("--agent", ev.agents, "agent checkpoint, repeatable")->required()->check(CLI::ExistingFile);
	s_ev->add_option("--weeks", ev.weeks);
	s_ev->add_option("--start-day", ev.start_day);
	s_ev->add_option("--seeds", ev.seeds);

	auto *s_bm = app.add_subcommand("benchmark", "all controllers on identical data, relative performance");
	add_common(s_bm, ctx.c, false);
	add_mpc(s_bm, bm.mpc);
	s_bm->add_option("--weeks", bm.weeks, "evaluation window in weeks");
	s_bm->add_option("--seeds", bm.seeds, "number of seeds, counting up from --seed");
	s_bm->add_option("--start-day", bm.start_day);
	s_bm->add_flag("--full-year", bm.full_year, "evaluate 52 weeks");
	s_bm->add_flag("--no-perfect", bm.no_perfect, "skip the perfect-foresight MPC");
	s_bm->add_flag("--no-realistic", bm.no_realistic, "skip the forecast-driven MPC");
	s_bm->add_option("--agent", bm.agents, "NAME=PATH of a saved agent, repeatable");
	s_bm->add_option("--train", bm.train, "train these agent kinds per seed first")
	    ->check(CLI::IsMember({"ppo", "td3"}))
	    ->delimiter(',');
	s_bm->add_option("--train-steps", bm.train_steps);

	auto *s_hp = app.add_subcommand("hpo", "random hyper-parameter search");
	add_common(s_hp, ctx.c, false);
	s_hp->add_option("kind", hp.kind)->required()->check(CLI::IsMember({"ppo", "td3"}));
	s_hp->add_option("--trials", hp.trials);
	s_hp->add_option("--train-steps", hp.train_steps);
	s_hp->add_flag("--collapsed", hp.collapsed, "search space pinned to the case defaults");

	auto *s_pl = app.add_subcommand("plot", "SVG from a trajectory or learning-curve CSV");
	s_pl->add_option("what", pl.what)->required()->check(CLI::IsMember({"dispatch", "curve"}));
	s_pl->add_option("--in", pl.in)->required()->check(CLI::ExistingFile);
	s_pl->add_option("--out", pl.out, "SVG file")->required();
	s_pl->add_option("--columns", pl.columns)->delimiter(',');

	try {
		app.parse(argc, argv);
	} catch (const CLI::ParseError &e) {
		const int code = app.exit(e);
		return code == 0 ? 0 : 1;
	}

	std::vector<std::string> args(argv + 1, argv + argc);
	ctx.command = joined(args);
	CLI::App *sub = app.get_subcommands().front();
	try {
		const std::string name = sub->get_name();
		if (name == "data-gen")
			cmd_data_gen(ctx, dg);
		else if (name == "simulate")
			cmd_simulate(ctx, sim);
		else if (name == "mpc-run")
			cmd_mpc_run(ctx, mpc);
		else if (name == "train")
			cmd_train(ctx, tr);
		else if (name == "evaluate")
			cmd_evaluate(ctx, ev);
		else if (name == "benchmark")
			cmd_benchmark(ctx, bm);
		else if (name == "hpo")
			cmd_hpo(ctx, hp);
		else
			cmd_plot(pl);
	} catch (const UsageError &e) {
		std::cerr << "error: " << e.what() << "\n\n" << sub->help();
		return 1;
	} catch (const std::exception &e) {
		std::cerr << "error: " << e.what() << '\n';
		return 2;
	}
	return 0;
}

} // namespace mesbench::cli
