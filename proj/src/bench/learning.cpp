#include <cmath>
#include <cstdio>
#include <ostream>

#include "mesbench/bench/bench.hpp"
#include "mesbench/core/errors.hpp"
#include "parallel.hpp"

namespace mesbench::bench {

rl::ActionMode default_action_mode(const std::string &kind, CaseLabel c) {
	if (kind == "ppo" && c == CaseLabel::complex)
		return rl::ActionMode::multi_discrete;
	return rl::ActionMode::continuous;
}

std::shared_ptr<rl::Agent> make_agent(const std::string &kind, const rl::EnvSpec &spec, std::uint64_t seed,
                                      const std::optional<rl::PpoHyper> &ppo, const std::optional<rl::Td3Hyper> &td3) {
	if (kind == "ppo")
		return std::make_shared<rl::PpoAgent>(spec, ppo.value_or(rl::PpoHyper::defaults(spec.cfg.case_label)), seed);
	if (kind == "td3")
		return std::make_shared<rl::Td3Agent>(spec, td3.value_or(rl::Td3Hyper::defaults(spec.cfg.case_label)), seed);
	throw DomainError("unknown agent kind '" + kind + "' (expected ppo or td3)");
}

double LearningCurve::mean_at(std::size_t point) const {
	double s = 0.0;
	for (const auto &r : returns)
		s += r.at(point);
	return s / static_cast<double>(returns.size());
}

double LearningCurve::std_at(std::size_t point) const {
	const double m = mean_at(point);
	double s = 0.0;
	for (const auto &r : returns)
		s += (r.at(point) - m) * (r.at(point) - m);
	return std::sqrt(s / static_cast<double>(returns.size()));
}

LearningCurve learning_curve(const LearningOptions &opt) {
	if (opt.seeds.empty())
		throw EmptyError("learning_curve: no seeds");
	if (opt.eval_every == 0)
		throw DomainError("learning_curve: eval_every must be positive");
	if (opt.budget > 0 && opt.budget < opt.eval_every)
		throw DomainError("learning_curve: budget must be at least eval_every");
	if (opt.kind != "ppo" && opt.kind != "td3")
		throw DomainError("unknown agent kind '" + opt.kind + "' (expected ppo or td3)");
	LearningCurve c;
	c.kind = opt.kind;
	c.seeds = opt.seeds;
	for (std::size_t s = 0; s <= opt.budget; s += opt.eval_every)
		c.steps.push_back(s);
	c.returns.assign(opt.seeds.size(), std::vector<double>(c.steps.size(), 0.0));
	c.agents.resize(opt.seeds.size());

	detail::parallel_for(opt.seeds.size(), opt.jobs, [&](std::size_t i) {
		const auto seed = opt.seeds[i];
		const auto train = data::to_exogenous(year_profiles(seed, opt.cfg));
		const auto held = data::to_exogenous(year_profiles(heldout_seed(seed), opt.cfg));
		const auto starts = heldout_week_starts(held.size());
		const auto spec = rl::make_env_spec(opt.cfg, train, default_action_mode(opt.kind, opt.cfg.case_label));
		auto agent = make_agent(opt.kind, spec, seed, opt.ppo, opt.td3);
		auto &row = c.returns[i];
		row[0] = evaluate_agent(*agent, held, starts);
		rl::Env env(spec, train);
		std::size_t point = 1;
		agent->train(env, opt.budget, [&](std::size_t k) {
			if (k % opt.eval_every == 0 && point < row.size())
				row[point++] = evaluate_agent(*agent, held, starts);
		});
		c.agents[i] = std::move(agent);
	});
	return c;
}

void write_curve_csv(std::ostream &out, const LearningCurve &c) {
	out << "step,mean_return,std_return";
	for (auto s : c.seeds)
		out << ",seed_" << s;
	out << '\n';
	char buf[64];
	for (std::size_t p = 0; p < c.steps.size(); ++p) {
		out << c.steps[p];
		std::snprintf(buf, sizeof buf, ",%.6f,%.6f", c.mean_at(p), c.std_at(p));
		out << buf;
		for (const auto &r : c.returns) {
			std::snprintf(buf, sizeof buf, ",%.6f", r[p]);
			out << buf;
		}
		out << '\n';
	}
}

} // namespace mesbench::bench
