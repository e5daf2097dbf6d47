#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>

#include "mesbench/plant/plant.hpp"
#include "mesbench/rl/env.hpp"
#include "mesbench/rl/mlp.hpp"

namespace mesbench::rl {

// Called after every environment step with the number of steps done so far.
using StepHook = std::function<void(std::size_t)>;

class Agent {
public:
	explicit Agent(EnvSpec spec) : spec_(std::move(spec)) {}
	virtual ~Agent() = default;

	virtual std::string kind() const = 0;
	// Greedy action in normalized units for a normalized observation.
	virtual VectorXd act(const VectorXd &obs) const = 0;
	virtual void train(Env &env, std::size_t steps, const StepHook &hook = {}) = 0;
	virtual void save(std::ostream &out) const = 0;

	const EnvSpec &spec() const { return spec_; }
	// Frozen greedy policy as a plant controller.
	plant::Controller controller() const;

protected:
	EnvSpec spec_;
};

// Episode reset seeds used during training, derived from the agent seed.
std::uint64_t episode_seed(std::uint64_t agent_seed, std::uint64_t episode);

std::unique_ptr<Agent> load_agent(std::istream &in);
std::unique_ptr<Agent> load_agent_file(const std::string &path);
void save_agent_file(const Agent &agent, const std::string &path);

} // namespace mesbench::rl
