#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <random>

#include "mesbench/bench/bench.hpp"
#include "mesbench/core/errors.hpp"
#include "mesbench/core/units.hpp"
#include "parallel.hpp"

namespace mesbench::bench {

const ControllerResult &BenchmarkReport::at(const std::string &name) const {
	for (const auto &r : rows)
		if (r.name == name)
			return r;
	throw UnknownAsset("no controller named '" + name + "' in the report");
}

plant::Controller random_controller(const MesConfig &cfg, std::uint64_t seed) {
	auto rng = std::make_shared<std::mt19937_64>(seed);
	const std::size_t dim = controllable_setpoints(cfg).size();
	return [rng, dim, cfg](const SystemState &) {
		std::uniform_real_distribution<double> u(-1.0, 1.0);
		std::vector<double> v(dim);
		for (auto &x : v)
			x = u(*rng);
		return action_from_normalized(v, cfg);
	};
}

namespace {

struct Outcome {
	double j = 0.0, cost = 0.0, comfort_mwh = 0.0;
	std::vector<double> seconds;
	bool failed = false;
	std::string error;
};

struct SeedData {
	MesConfig cfg;
	data::Profiles profiles;
	plant::ExogenousData exo;
	data::ForecastSpec forecast;
	std::size_t t0 = 0;
};

Outcome summarize(const plant::Episode &ep) {
	Outcome o;
	o.j = ep.objective;
	o.cost = ep.cost;
	o.comfort_mwh = ep.comfort_wh / 1e6;
	o.seconds = ep.decision_seconds;
	return o;
}

std::string fmt(double v, const char *f = "%.6f") {
	if (std::isnan(v))
		return "nan";
	char buf[64];
	std::snprintf(buf, sizeof buf, f, v);
	return buf;
}

} // namespace

BenchmarkReport run_benchmark(const BenchmarkOptions &opt, const std::vector<AgentEntry> &agents) {
	if (opt.seeds.empty())
		throw EmptyError("benchmark: no seeds");
	if (opt.eval_weeks == 0)
		throw DomainError("benchmark: eval_weeks must be positive");
	opt.mpc.check();
	validate_config(opt.cfg);
	for (const auto &a : agents)
		if (a.agents.size() != 1 && a.agents.size() != opt.seeds.size())
			throw ShapeError("benchmark: agent '" + a.name + "' needs one instance or one per seed");

	BenchmarkReport rep;
	rep.case_label = opt.cfg.case_label;
	rep.seeds = opt.seeds;
	rep.eval_steps = opt.eval_weeks * 7 * 96;

	std::vector<std::string> names;
	if (opt.run_perfect_mpc)
		names.push_back(kPerfectMpc);
	if (opt.run_realistic_mpc)
		names.push_back(kRealisticMpc);
	for (const auto &a : agents)
		names.push_back(a.name);
	names.push_back(kRandomAgent);

	// Identical exogenous data and initial state for every controller of a seed.
	std::vector<SeedData> seeds(opt.seeds.size());
	detail::parallel_for(seeds.size(), opt.jobs, [&](std::size_t i) {
		auto &sd = seeds[i];
		sd.t0 = opt.start_day * 96;
		TimeGrid g = opt.cfg.grid;
		g.n_steps = sd.t0 + rep.eval_steps + opt.mpc.n_steps;
		sd.profiles = data::synth_profiles(heldout_seed(opt.seeds[i]), g, opt.cfg);
		sd.exo = data::to_exogenous(sd.profiles);
		sd.cfg = with_resolved_weights(opt.cfg, sd.exo.max_price());
		sd.forecast = data::default_forecast_targets(opt.cfg.case_label, opt.seeds[i]);
		data::calibrate(sd.forecast, sd.profiles);
	});

	const std::size_t nc = names.size();
	std::vector<Outcome> outcomes(nc * seeds.size());
	detail::parallel_for(outcomes.size(), opt.jobs, [&](std::size_t task) {
		const std::size_t si = task / nc, ci = task % nc;
		const auto &sd = seeds[si];
		const auto &name = names[ci];
		Outcome &o = outcomes[task];
		try {
			const SystemState start = plant::initial_state(sd.cfg, sd.exo, sd.t0);
			if (name == kPerfectMpc || name == kRealisticMpc) {
				mpc::MpcConfig mc = opt.mpc;
				mc.forecast.reset();
				if (name == kRealisticMpc)
					mc.forecast = sd.forecast;
				o = summarize(mpc::receding_horizon_run(sd.cfg, mc, sd.profiles, sd.t0, rep.eval_steps, &start).episode);
			} else if (name == kRandomAgent) {
				o = summarize(plant::run_episode(random_controller(sd.cfg, opt.seeds[si] ^ 0xA5A5A5A5ULL), start,
				                                 rep.eval_steps, sd.exo, sd.cfg));
			} else {
				const auto &entry = agents[ci - (nc - 1 - agents.size())];
				const auto &agent = entry.agents.size() == 1 ? entry.agents[0] : entry.agents[si];
				o = summarize(plant::run_episode(agent->controller(), start, rep.eval_steps, sd.exo, sd.cfg));
			}
		} catch (const std::exception &e) {
			o.failed = true;
			o.error = e.what();
		}
	});

	for (std::size_t ci = 0; ci < nc; ++ci) {
		ControllerResult r;
		r.name = names[ci];
		std::vector<double> secs;
		for (std::size_t si = 0; si < seeds.size(); ++si) {
			const auto &o = outcomes[si * nc + ci];
			if (o.failed) {
				r.failed = true;
				if (r.error.empty())
					r.error = "seed " + std::to_string(opt.seeds[si]) + ": " + o.error;
				r.j_per_seed.push_back(std::numeric_limits<double>::quiet_NaN());
				r.cost_per_seed.push_back(std::numeric_limits<double>::quiet_NaN());
				r.comfort_per_seed.push_back(std::numeric_limits<double>::quiet_NaN());
				continue;
			}
			r.j_per_seed.push_back(o.j);
			r.cost_per_seed.push_back(o.cost);
			r.comfort_per_seed.push_back(o.comfort_mwh);
			secs.insert(secs.end(), o.seconds.begin(), o.seconds.end());
		}
		const double k = static_cast<double>(seeds.size());
		for (std::size_t si = 0; si < seeds.size(); ++si) {
			r.j += r.j_per_seed[si] / k;
			r.cost += r.cost_per_seed[si] / k;
			r.comfort += r.comfort_per_seed[si] / k;
		}
		if (!secs.empty())
			r.runtime = runtime_stats(secs);
		rep.rows.push_back(std::move(r));
	}

	const ControllerResult *ref = nullptr;
	for (const auto &r : rep.rows)
		if (r.name == kPerfectMpc && !r.failed)
			ref = &r;
	for (auto &r : rep.rows) {
		r.relative = std::numeric_limits<double>::quiet_NaN();
		if (ref && !r.failed && ref->j > 0.0 && r.j > 0.0)
			r.relative = relative_performance(ref->j, r.j);
	}
	return rep;
}

void write_report_csv(std::ostream &out, const BenchmarkReport &r) {
	out << "controller,j_mean,cost_mean,comfort_mwh_mean,relative_pct";
	for (auto s : r.seeds)
		out << ",j_seed_" << s;
	out << ",failed\n";
	for (const auto &c : r.rows) {
		out << c.name << ',' << fmt(c.j) << ',' << fmt(c.cost) << ',' << fmt(c.comfort) << ','
		    << fmt(c.relative, "%.3f");
		for (double j : c.j_per_seed)
			out << ',' << fmt(j);
		out << ',' << (c.failed ? 1 : 0) << '\n';
	}
}

void write_runtime_csv(std::ostream &out, const BenchmarkReport &r) {
	out << "controller,min_s,mean_s,std_s,max_s,total_s\n";
	for (const auto &c : r.rows)
		out << c.name << ',' << fmt(c.runtime.min, "%.6g") << ',' << fmt(c.runtime.mean, "%.6g") << ','
		    << fmt(c.runtime.std, "%.6g") << ',' << fmt(c.runtime.max, "%.6g") << ','
		    << fmt(c.runtime.total, "%.6g") << '\n';
}

void write_report_text(std::ostream &out, const BenchmarkReport &r) {
	char line[256];
	out << "case " << to_string(r.case_label) << ", " << r.eval_steps << " steps per seed, seeds";
	for (auto s : r.seeds)
		out << ' ' << s;
	out << "\n\n";
	std::snprintf(line, sizeof line, "%-18s %14s %14s %12s %9s %12s\n", "controller", "J", "cost", "comfort MWh",
	              "rel %", "step ms");
	out << line;
	for (const auto &c : r.rows) {
		if (c.failed) {
			out << c.name << "  FAILED: " << c.error << '\n';
			continue;
		}
		std::snprintf(line, sizeof line, "%-18s %14.2f %14.2f %12.3f %9.1f %12.4f\n", c.name.c_str(), c.j, c.cost,
		              c.comfort, c.relative, c.runtime.mean * 1e3);
		out << line;
	}
}

} // namespace mesbench::bench
