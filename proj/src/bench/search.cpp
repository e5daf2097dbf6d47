#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <set>

#include "mesbench/bench/bench.hpp"
#include "mesbench/core/errors.hpp"
#include "parallel.hpp"

namespace mesbench::bench {

namespace {

std::string num(double v) {
	char buf[40];
	std::snprintf(buf, sizeof buf, "%.17g", v);
	return buf;
}

HyperRange fixed(const std::string &name, double v, bool integer = false) {
	return {name, integer ? HyperRange::Kind::integer : HyperRange::Kind::uniform, v, v, {}};
}

HyperRange loguni(const std::string &name, double lo, double hi) {
	return {name, HyperRange::Kind::log_uniform, lo, hi, {}};
}

HyperRange uni(const std::string &name, double lo, double hi) { return {name, HyperRange::Kind::uniform, lo, hi, {}}; }

HyperRange integer(const std::string &name, double lo, double hi) {
	return {name, HyperRange::Kind::integer, lo, hi, {}};
}

HyperRange categorical(const std::string &name, std::vector<std::string> choices) {
	return {name, HyperRange::Kind::categorical, 0.0, 0.0, std::move(choices)};
}

double to_double(const HyperSample &s, const std::string &k, double fallback) {
	auto it = s.find(k);
	if (it == s.end())
		return fallback;
	try {
		return std::stod(it->second);
	} catch (const std::logic_error &) {
		throw DomainError("hyper-parameter '" + k + "' is not a number: " + it->second);
	}
}

int to_int(const HyperSample &s, const std::string &k, int fallback) {
	return static_cast<int>(std::lround(to_double(s, k, fallback)));
}

} // namespace

void HyperSpace::check() const {
	if (ranges.empty())
		throw DomainError("hyper space is empty");
	std::set<std::string> seen;
	for (const auto &r : ranges) {
		if (!seen.insert(r.name).second)
			throw DomainError("hyper space lists '" + r.name + "' twice");
		if (r.kind == HyperRange::Kind::categorical) {
			if (r.choices.empty())
				throw DomainError("categorical range '" + r.name + "' has no choices");
		} else if (!(r.lo <= r.hi)) {
			throw DomainError("range '" + r.name + "' is empty (lo > hi)");
		} else if (r.kind == HyperRange::Kind::log_uniform && !(r.lo > 0.0)) {
			throw DomainError("log-uniform range '" + r.name + "' needs lo > 0");
		}
	}
}

HyperSample HyperSpace::draw(std::mt19937_64 &rng) const {
	HyperSample s;
	std::uniform_real_distribution<double> u(0.0, 1.0);
	for (const auto &r : ranges) {
		const double x = u(rng); // one draw per range keeps the stream aligned
		switch (r.kind) {
		case HyperRange::Kind::log_uniform:
			s[r.name] = num(r.lo == r.hi ? r.lo : std::exp(std::log(r.lo) + x * (std::log(r.hi) - std::log(r.lo))));
			break;
		case HyperRange::Kind::uniform:
			s[r.name] = num(r.lo == r.hi ? r.lo : r.lo + x * (r.hi - r.lo));
			break;
		case HyperRange::Kind::integer: {
			const auto lo = static_cast<long long>(std::ceil(r.lo)), hi = static_cast<long long>(std::floor(r.hi));
			const auto span = hi - lo + 1;
			s[r.name] = std::to_string(lo + std::min<long long>(span - 1, static_cast<long long>(x * span)));
			break;
		}
		case HyperRange::Kind::categorical:
			s[r.name] = r.choices[std::min(r.choices.size() - 1, static_cast<std::size_t>(x * r.choices.size()))];
			break;
		}
	}
	return s;
}

HyperSpace HyperSpace::ppo_default() {
	return {{uni("gamma", 0.8, 0.999), loguni("learning_rate", 1e-5, 1e-2), categorical("nminibatches", {"1", "2", "4"}),
	         categorical("n_steps", {"128", "256", "672", "1344"}), loguni("ent_coef", 1e-8, 1e-1),
	         categorical("cliprange", {"0.1", "0.2", "0.3", "0.4"}), integer("noptepochs", 1, 10),
	         uni("lambda", 0.8, 1.0)}};
}

HyperSpace HyperSpace::td3_default() {
	return {{uni("gamma", 0.8, 0.999), loguni("learning_rate", 1e-5, 1e-2),
	         categorical("batch_size", {"16", "24", "64", "100", "256"}), categorical("buffer_size", {"10000", "100000"}),
	         categorical("train_freq", {"96", "672", "2000"}), categorical("gradient_steps", {"100", "672", "2000"}),
	         categorical("noise_type", {"normal", "ornstein_uhlenbeck"}), uni("noise_std", 0.0, 1.0)}};
}

HyperSpace HyperSpace::collapsed(const rl::PpoHyper &h) {
	return {{fixed("gamma", h.gamma), fixed("learning_rate", h.learning_rate), fixed("nminibatches", h.nminibatches, true),
	         fixed("n_steps", h.n_steps, true), fixed("ent_coef", h.ent_coef), fixed("cliprange", h.cliprange),
	         fixed("noptepochs", h.noptepochs, true), fixed("lambda", h.lambda)}};
}

HyperSpace HyperSpace::collapsed(const rl::Td3Hyper &h) {
	return {{fixed("gamma", h.gamma), fixed("learning_rate", h.learning_rate), fixed("batch_size", h.batch_size, true),
	         fixed("buffer_size", h.buffer_size, true), fixed("train_freq", h.train_freq, true),
	         fixed("gradient_steps", h.gradient_steps, true), categorical("noise_type", {to_string(h.noise_type)}),
	         fixed("noise_std", h.noise_std)}};
}

rl::PpoHyper apply_ppo(rl::PpoHyper h, const HyperSample &s) {
	h.gamma = to_double(s, "gamma", h.gamma);
	h.learning_rate = to_double(s, "learning_rate", h.learning_rate);
	h.nminibatches = to_int(s, "nminibatches", h.nminibatches);
	h.n_steps = to_int(s, "n_steps", h.n_steps);
	h.ent_coef = to_double(s, "ent_coef", h.ent_coef);
	h.cliprange = to_double(s, "cliprange", h.cliprange);
	h.noptepochs = to_int(s, "noptepochs", h.noptepochs);
	h.lambda = to_double(s, "lambda", h.lambda);
	return h;
}

rl::Td3Hyper apply_td3(rl::Td3Hyper h, const HyperSample &s) {
	h.gamma = to_double(s, "gamma", h.gamma);
	h.learning_rate = to_double(s, "learning_rate", h.learning_rate);
	h.batch_size = to_int(s, "batch_size", h.batch_size);
	h.buffer_size = to_int(s, "buffer_size", h.buffer_size);
	h.train_freq = to_int(s, "train_freq", h.train_freq);
	h.gradient_steps = to_int(s, "gradient_steps", h.gradient_steps);
	if (auto it = s.find("noise_type"); it != s.end())
		h.noise_type = rl::noise_type_from_string(it->second);
	h.noise_std = to_double(s, "noise_std", h.noise_std);
	return h;
}

SearchResult random_search(const SearchOptions &opt) {
	if (opt.trials < 1)
		throw DomainError("random_search: need at least one trial");
	if (opt.kind != "ppo" && opt.kind != "td3")
		throw DomainError("unknown agent kind '" + opt.kind + "' (expected ppo or td3)");
	opt.space.check();

	SearchResult res;
	res.trials.resize(opt.trials);
	std::mt19937_64 rng(opt.seed);
	for (std::size_t i = 0; i < opt.trials; ++i) {
		res.trials[i].id = i;
		res.trials[i].params = opt.space.draw(rng);
	}

	const auto train = data::to_exogenous(year_profiles(opt.seed, opt.cfg));
	const auto held = data::to_exogenous(year_profiles(heldout_seed(opt.seed), opt.cfg));
	const auto starts = heldout_week_starts(held.size());
	const auto spec = rl::make_env_spec(opt.cfg, train, default_action_mode(opt.kind, opt.cfg.case_label));

	detail::parallel_for(opt.trials, opt.jobs, [&](std::size_t i) {
		auto &t = res.trials[i];
		try {
			std::shared_ptr<rl::Agent> agent;
			if (opt.kind == "ppo")
				agent = make_agent("ppo", spec, opt.seed + i,
				                   apply_ppo(rl::PpoHyper::defaults(opt.cfg.case_label), t.params));
			else
				agent = make_agent("td3", spec, opt.seed + i, {},
				                   apply_td3(rl::Td3Hyper::defaults(opt.cfg.case_label), t.params));
			rl::Env env(spec, train);
			agent->train(env, opt.train_budget);
			t.score = evaluate_agent(*agent, held, starts);
		} catch (const std::exception &e) {
			t.failed = true;
			t.error = e.what();
			t.score = -std::numeric_limits<double>::infinity();
		}
	});

	double best = -std::numeric_limits<double>::infinity();
	bool any = false;
	for (std::size_t i = 0; i < res.trials.size(); ++i) {
		auto &t = res.trials[i];
		if (!t.failed && (!any || t.score > best)) {
			best = t.score;
			res.best = i;
			any = true;
		}
		t.best_so_far = best;
	}
	return res;
}

void write_history_csv(std::ostream &out, const SearchResult &r) {
	std::vector<std::string> keys;
	if (!r.trials.empty())
		for (const auto &[k, v] : r.trials.front().params)
			keys.push_back(k);
	out << "trial,score,best_so_far,status";
	for (const auto &k : keys)
		out << ',' << k;
	out << '\n';
	char buf[64];
	for (const auto &t : r.trials) {
		out << t.id;
		if (t.failed) {
			out << ",nan";
		} else {
			std::snprintf(buf, sizeof buf, ",%.6f", t.score);
			out << buf;
		}
		if (std::isfinite(t.best_so_far)) {
			std::snprintf(buf, sizeof buf, ",%.6f", t.best_so_far);
			out << buf;
		} else {
			out << ",nan";
		}
		out << ',' << (t.failed ? "failed" : "ok");
		for (const auto &k : keys)
			out << ',' << t.params.at(k);
		out << '\n';
	}
}

} // namespace mesbench::bench
