#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "mesbench/core/config.hpp"
#include "mesbench/core/model.hpp"

namespace mesbench::plant {

struct ExogenousFrame {
	double wind_speed = 0.0;  // m/s
	double irradiance = 0.0;  // W/m^2
	double e_th_demand = 0.0; // W
	double e_el_demand = 0.0; // W
	double x_el = 0.0;        // currency/Wh
};

struct ExogenousData {
	TimeGrid grid;
	std::vector<ExogenousFrame> frames;

	std::size_t size() const { return frames.size(); }
	const ExogenousFrame &at(std::size_t k) const;
	double max_price() const;
};

struct WindCurve {
	double cut_in = 3.0;   // m/s
	double rated = 12.0;   // m/s
	double cut_out = 25.0; // m/s
};

double wind_power(double speed, const AssetSpec &spec, const WindCurve &curve = {});
double pv_power(double irradiance, const AssetSpec &spec);

// Part-load efficiency eta_nom * (1 - kappa * (1 - load)^2).
double part_load_efficiency(double eta_nom, double kappa, double load);

struct ConverterResult {
	std::map<CarrierId, double> outputs; // W
	CarrierId input_carrier = CarrierId::natural_gas;
	double input = 0.0; // W drawn from input_carrier
};

// Projects (P, Q) onto {0} U {p_min <= P <= p_nom_el, 0 <= Q <= min(q_nom, Q_nom/P_nom * P + 0.2 Q_nom)}.
std::pair<double, double> project_pq(double p_el, double q_th, const AssetSpec &chp);

// setpoint: one value per entry of spec.outputs for extraction CHPs, otherwise
// a single value for the primary (controlled) output.
ConverterResult converter_step(const std::vector<double> &setpoint, const AssetSpec &spec, double kappa);

struct StorageResult {
	double new_soc = 0.0;        // J
	double realized_power = 0.0; // W, + discharge / - charge
};

StorageResult storage_step(double soc, double power, double dt, const AssetSpec &spec, double derating_band = 0.1);

struct AssetFlow {
	std::map<CarrierId, double> inputs;  // W
	std::map<CarrierId, double> outputs; // W
};

struct StepResult {
	SystemState next;
	LossTerms loss;
	std::map<std::string, AssetFlow> dispatch;
	double grid_import_el = 0.0; // W, positive import, negative export
	double gas_consumed = 0.0;   // W
	double elec_residual = 0.0;  // W
	double gas_residual = 0.0;   // W
	double heat_supplied = 0.0;  // W, equals loss.q_produced
};

Observation observe(const ExogenousFrame &frame, double c_e, const MesConfig &cfg);

// Builds the initial state at data index t with the given SoC fractions
// (missing storages default to half full).
SystemState initial_state(const MesConfig &cfg, const ExogenousData &data, std::size_t t,
                          const std::map<std::string, double> &soc_fraction = {});

StepResult step(const SystemState &state, const ControlAction &action, const ExogenousFrame &exo,
                const MesConfig &cfg);

using Controller = std::function<ControlAction(const SystemState &)>;

struct Episode {
	std::vector<SystemState> states; // n + 1 entries
	std::vector<ControlAction> actions;
	std::vector<StepResult> steps;
	std::vector<double> decision_seconds; // wall time spent inside the controller per step
	double objective = 0.0;               // sum of a * l_cost + b * l_comfort
	double cost = 0.0;
	double comfort_wh = 0.0;
};

Episode run_episode(const Controller &controller, const SystemState &start, std::size_t n, const ExogenousData &data,
                    const MesConfig &cfg);

void write_trajectory_csv(std::ostream &out, const Episode &ep, const ExogenousData &data, const MesConfig &cfg);

} // namespace mesbench::plant
