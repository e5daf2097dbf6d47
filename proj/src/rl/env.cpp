#include "mesbench/rl/env.hpp"

#include <algorithm>
#include <cmath>

#include "mesbench/core/errors.hpp"

namespace mesbench::rl {

std::string to_string(ActionMode m) { return m == ActionMode::continuous ? "continuous" : "multi_discrete"; }

ActionMode action_mode_from_string(const std::string &s) {
	if (s == "continuous")
		return ActionMode::continuous;
	if (s == "multi_discrete")
		return ActionMode::multi_discrete;
	throw ParseError("unknown action mode '" + s + "'");
}

Eigen::VectorXd ObsBounds::normalize(const Observation &o) const {
	const auto v = o.as_vector();
	Eigen::VectorXd out(v.size());
	for (std::size_t i = 0; i < v.size(); ++i) {
		const double span = hi[i] - lo[i];
		out[i] = span > 0.0 ? 2.0 * (v[i] - lo[i]) / span - 1.0 : 0.0;
	}
	return out;
}

ObsBounds scenario_bounds(const MesConfig &cfg, const plant::ExogenousData &data, std::size_t episode_len) {
	if (data.frames.empty())
		throw EmptyError("scenario_bounds: no data");
	ObsBounds b;
	double th = 0.0, el = 0.0, pmin = data.frames[0].x_el, pmax = data.frames[0].x_el;
	for (const auto &f : data.frames) {
		th = std::max(th, f.e_th_demand);
		el = std::max(el, f.e_el_demand);
		pmin = std::min(pmin, f.x_el);
		pmax = std::max(pmax, f.x_el);
	}
	double wind = 0.0, pv = 0.0, el_cap = 0.0, gas_cap = 0.0;
	for (const auto &a : cfg.assets) {
		if (a.kind == AssetKind::wind)
			wind += a.p_nom();
		else if (a.kind == AssetKind::pv)
			pv += a.p_nom();
		if (a.is_converter() || a.is_storage()) {
			for (const auto &o : a.outputs) {
				if (o.carrier == CarrierId::electricity)
					el_cap += o.p_nom;
			}
			if (!a.inputs.empty() && a.inputs.front() == CarrierId::natural_gas)
				for (const auto &o : a.outputs)
					gas_cap += o.p_nom / std::max(o.eta, 1e-6);
			if (!a.inputs.empty() && a.inputs.front() == CarrierId::electricity && !a.is_storage())
				el_cap += a.p_nom() / std::max(a.outputs.front().eta, 1e-6);
		}
	}
	const double dt_h = cfg.grid.step_hours();
	const double per_step = dt_h * (std::max(std::abs(pmin), std::abs(pmax)) * (el + el_cap + wind + pv) +
	                                cfg.gas_price * gas_cap);
	const double ce = std::max(1.0, per_step * static_cast<double>(episode_len));
	b.lo = {0.0, 0.0, 0.0, 0.0, -ce, std::min(0.0, pmin)};
	b.hi = {std::max(th, 1.0), std::max(el, 1.0), std::max(wind, 1.0), std::max(pv, 1.0), ce, std::max(pmax, 1e-12)};
	return b;
}

EnvSpec make_env_spec(const MesConfig &cfg, const plant::ExogenousData &data, ActionMode mode,
                      std::size_t episode_len, int tau) {
	if (episode_len == 0)
		throw DomainError("episode length must be positive");
	if (mode == ActionMode::multi_discrete && tau < 2)
		throw DomainError("tau must be at least 2");
	EnvSpec s;
	s.cfg = with_resolved_weights(cfg, data.max_price());
	validate_config(s.cfg);
	s.episode_len = episode_len;
	s.mode = mode;
	s.tau = tau;
	s.bounds = scenario_bounds(s.cfg, data, episode_len);
	// Typical loss of one step: buying the peak electric demand and burning gas
	// for the peak heat demand at the peak price.
	double th = 0.0, el = 0.0;
	for (const auto &f : data.frames) {
		th = std::max(th, f.e_th_demand);
		el = std::max(el, f.e_el_demand);
	}
	const double ref = s.cfg.grid.step_hours() * (data.max_price() * el + s.cfg.gas_price * th / 0.9);
	s.reward_scale = ref > 0.0 ? 1.0 / ref : 1.0;
	return s;
}

double level_value(int k, int tau) { return -1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(tau - 1); }

Env::Env(EnvSpec spec, plant::ExogenousData data) : spec_(std::move(spec)), data_(std::move(data)) {
	if (data_.size() < spec_.episode_len)
		throw RangeError("env: data holds " + std::to_string(data_.size()) + " steps, episode needs " +
		                 std::to_string(spec_.episode_len));
}

const SystemState &Env::state() const {
	if (!state_)
		throw ProtocolError("env: no state before reset");
	return *state_;
}

Eigen::VectorXd Env::reset(std::uint64_t seed) {
	std::mt19937_64 rng(seed);
	std::uniform_int_distribution<std::size_t> start(0, data_.size() - spec_.episode_len);
	const std::size_t s = start(rng);
	std::uniform_real_distribution<double> frac(0.2, 0.8);
	std::map<std::string, double> soc;
	for (const auto &a : spec_.cfg.assets)
		if (a.is_storage())
			soc[a.id] = frac(rng);
	return reset_at(s, soc);
}

Eigen::VectorXd Env::reset_at(std::size_t start, const std::map<std::string, double> &soc_fraction) {
	if (start + spec_.episode_len > data_.size())
		throw RangeError("env: episode starting at " + std::to_string(start) + " runs past the data");
	start_ = start;
	k_ = 0;
	done_ = false;
	state_ = plant::initial_state(spec_.cfg, data_, start, soc_fraction);
	return spec_.bounds.normalize(state_->obs);
}

EnvStep Env::step(const ControlAction &raw) {
	if (!state_)
		throw ProtocolError("env: step called before reset");
	if (done_)
		throw ProtocolError("env: step called after the episode ended; reset first");
	const ControlAction act = project_action(raw, spec_.cfg);
	EnvStep out;
	out.result = plant::step(*state_, act, data_.at(state_->t_index), spec_.cfg);
	out.reward = reward(out.result.loss, spec_.cfg.reward_weights);
	SystemState next = out.result.next;
	if (next.t_index < data_.size())
		next.obs = plant::observe(data_.frames[next.t_index], next.obs.c_e, spec_.cfg);
	state_ = std::move(next);
	++k_;
	done_ = k_ >= spec_.episode_len;
	out.done = done_;
	out.obs = spec_.bounds.normalize(state_->obs);
	return out;
}

EnvStep Env::step_normalized(const Eigen::VectorXd &u) {
	std::vector<double> v(u.data(), u.data() + u.size());
	for (double &x : v)
		x = std::isnan(x) ? 0.0 : std::clamp(x, -1.0, 1.0);
	return step(action_from_normalized(v, spec_.cfg));
}

} // namespace mesbench::rl
