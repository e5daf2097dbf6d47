#include <algorithm>
#include <cmath>

#include "mesbench/core/errors.hpp"
#include "mesbench/core/model.hpp"

namespace mesbench {

double ControlAction::at(const std::string &key) const {
	auto it = setpoints.find(key);
	return it == setpoints.end() ? 0.0 : it->second;
}

namespace {

double snap_semicontinuous(double v, double p_min, double p_nom) {
	if (!std::isfinite(v))
		return 0.0;
	if (v < 0.5 * p_min || v <= 0.0)
		return 0.0;
	if (v < p_min)
		return p_min;
	return std::min(v, p_nom);
}

} // namespace

ControlAction project_action(const ControlAction &raw, const MesConfig &cfg) {
	const auto specs = controllable_setpoints(cfg);
	for (const auto &[key, value] : raw.setpoints) {
		const bool known = std::any_of(specs.begin(), specs.end(), [&](const SetpointSpec &s) { return s.key == key; });
		if (!known)
			throw UnknownAsset("action references unknown or non-controllable setpoint '" + key + "'");
	}
	ControlAction out;
	for (const auto &s : specs) {
		auto it = raw.setpoints.find(s.key);
		if (it == raw.setpoints.end())
			throw UnknownAsset("action is missing setpoint '" + s.key + "'");
		double v = it->second;
		if (s.storage)
			v = std::isfinite(v) ? std::clamp(v, -s.p_max, s.p_max) : 0.0;
		else
			v = snap_semicontinuous(v, s.p_min, s.p_max);
		out.setpoints[s.key] = v;
	}
	return out;
}

bool is_feasible(const ControlAction &action, const MesConfig &cfg, double tol) {
	for (const auto &s : controllable_setpoints(cfg)) {
		auto it = action.setpoints.find(s.key);
		if (it == action.setpoints.end())
			return false;
		const double v = it->second;
		if (s.storage) {
			if (v < -s.p_max - tol || v > s.p_max + tol)
				return false;
		} else if (!(std::abs(v) <= tol || (v >= s.p_min - tol && v <= s.p_max + tol))) {
			return false;
		}
	}
	return true;
}

ControlAction zero_action(const MesConfig &cfg) {
	ControlAction a;
	for (const auto &s : controllable_setpoints(cfg))
		a.setpoints[s.key] = 0.0;
	return a;
}

ControlAction action_from_normalized(const std::vector<double> &u, const MesConfig &cfg) {
	const auto specs = controllable_setpoints(cfg);
	if (u.size() != specs.size())
		throw ShapeError("normalized action has " + std::to_string(u.size()) + " entries, expected " +
		                 std::to_string(specs.size()));
	ControlAction a;
	for (std::size_t i = 0; i < specs.size(); ++i) {
		const double x = std::clamp(u[i], -1.0, 1.0);
		a.setpoints[specs[i].key] = specs[i].storage ? x * specs[i].p_max : 0.5 * (x + 1.0) * specs[i].p_max;
	}
	return a;
}

std::vector<double> normalized_from_action(const ControlAction &a, const MesConfig &cfg) {
	const auto specs = controllable_setpoints(cfg);
	std::vector<double> u(specs.size());
	for (std::size_t i = 0; i < specs.size(); ++i) {
		const double v = a.at(specs[i].key);
		u[i] = specs[i].storage ? v / specs[i].p_max : 2.0 * v / specs[i].p_max - 1.0;
	}
	return u;
}

} // namespace mesbench
