#pragma once

#include <map>
#include <string>
#include <vector>

#include "mesbench/core/config.hpp"

namespace mesbench {

// Setpoints keyed by SetpointSpec::key. Sign convention for storages:
// positive discharges, negative charges.
struct ControlAction {
	std::map<std::string, double> setpoints;

	double at(const std::string &key) const;
	bool operator==(const ControlAction &) const = default;
};

// The six-component observation shared by RL agents and the MPC.
struct Observation {
	double e_th = 0.0;    // W
	double e_el = 0.0;    // W
	double p_wind = 0.0;  // W
	double p_solar = 0.0; // W
	double c_e = 0.0;     // currency, accumulated since episode start
	double x_el = 0.0;    // currency/Wh

	static constexpr std::size_t kSize = 6;
	std::vector<double> as_vector() const { return {e_th, e_el, p_wind, p_solar, c_e, x_el}; }
};

struct SystemState {
	std::size_t t_index = 0; // cursor into the exogenous data
	Observation obs;
	std::map<std::string, double> soc; // J per storage id
};

struct LossTerms {
	double l_cost = 0.0;     // currency
	double l_comfort = 0.0;  // Wh
	double q_produced = 0.0; // W
};

inline double reward(const LossTerms &loss, const RewardWeights &w) {
	return -(w.a * loss.l_cost + w.b * loss.l_comfort);
}

inline double objective_contribution(const LossTerms &loss, const RewardWeights &w) {
	return w.a * loss.l_cost + w.b * loss.l_comfort;
}

// Maps a raw request onto the feasible action set: semi-continuous setpoints
// snap to {0} U [p_min, p_nom] (nearest, midpoint p_min/2 goes up), storages
// clamp to [-rate, +rate]. Idempotent.
ControlAction project_action(const ControlAction &raw, const MesConfig &cfg);

bool is_feasible(const ControlAction &action, const MesConfig &cfg, double tol = 0.0);

ControlAction zero_action(const MesConfig &cfg);

// Normalized [-1, 1] per setpoint -> physical units. Converters map -1 -> 0 and
// +1 -> p_nom, storages map linearly onto [-rate, +rate].
ControlAction action_from_normalized(const std::vector<double> &u, const MesConfig &cfg);
std::vector<double> normalized_from_action(const ControlAction &a, const MesConfig &cfg);

} // namespace mesbench
