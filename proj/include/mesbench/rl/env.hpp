#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mesbench/core/config.hpp"
#include "mesbench/core/model.hpp"
#include "mesbench/plant/plant.hpp"

namespace mesbench::rl {

enum class ActionMode { continuous, multi_discrete };

std::string to_string(ActionMode m);
ActionMode action_mode_from_string(const std::string &s);

// Min-max bounds of the six observation components, fixed once from scenario
// data and stored with the agent.
struct ObsBounds {
	std::array<double, Observation::kSize> lo{};
	std::array<double, Observation::kSize> hi{};

	Eigen::VectorXd normalize(const Observation &o) const; // -> [-1, 1] inside the bounds
};

ObsBounds scenario_bounds(const MesConfig &cfg, const plant::ExogenousData &data, std::size_t episode_len);

struct EnvSpec {
	MesConfig cfg; // reward weights resolved
	std::size_t episode_len = 672;
	ActionMode mode = ActionMode::continuous;
	int tau = 5; // levels per dimension in multi-discrete mode
	ObsBounds bounds;
	double reward_scale = 1.0; // applied by agents to the reward they learn from

	std::size_t action_dim() const { return controllable_setpoints(cfg).size(); }
	std::size_t obs_dim() const { return Observation::kSize; }
};

// Resolves b, freezes bounds from data and picks a reward scale of order one.
EnvSpec make_env_spec(const MesConfig &cfg, const plant::ExogenousData &data, ActionMode mode,
                      std::size_t episode_len = 672, int tau = 5);

// Level k of tau -> normalized value in [-1, 1].
double level_value(int k, int tau);

struct EnvStep {
	Eigen::VectorXd obs;
	double reward = 0.0;
	bool done = false;
	plant::StepResult result;
};

// Episodic adapter over the plant.
class Env {
public:
	Env(EnvSpec spec, plant::ExogenousData data);

	// Random start inside the data and a random SoC in [0.2, 0.8] e_nom, both from seed.
	Eigen::VectorXd reset(std::uint64_t seed);
	Eigen::VectorXd reset_at(std::size_t start, const std::map<std::string, double> &soc_fraction = {});

	EnvStep step(const ControlAction &raw);
	EnvStep step_normalized(const Eigen::VectorXd &u); // u in [-1, 1]^dim (clipped)

	const EnvSpec &spec() const { return spec_; }
	const plant::ExogenousData &data() const { return data_; }
	const SystemState &state() const;
	std::size_t start() const { return start_; }
	std::size_t steps_taken() const { return k_; }

private:
	EnvSpec spec_;
	plant::ExogenousData data_;
	std::optional<SystemState> state_;
	std::size_t start_ = 0;
	std::size_t k_ = 0;
	bool done_ = false;
};

} // namespace mesbench::rl
