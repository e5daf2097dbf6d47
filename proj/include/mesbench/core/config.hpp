#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mesbench {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct TimeGrid {
	std::int64_t start_epoch = 1546300800; // 2019-01-01T00:00:00Z
	double step_s = 900.0;
	std::size_t n_steps = 1;

	double step_hours() const { return step_s / 3600.0; }
	std::int64_t timestamp(std::size_t k) const { return start_epoch + static_cast<std::int64_t>(std::llround(step_s * k)); }
};

enum class CarrierId { electricity, heat, natural_gas };

enum class AssetKind { wind, pv, boiler, heat_pump, chp, genset, bess, tess, grid_electric, grid_gas };

enum class ChpMode {
	extraction,   // independent electric and thermal setpoints inside the PQ polygon
	backpressure, // one electric setpoint, heat at the nominal heat-to-power ratio
};

enum class CaseLabel { simple, complex };

struct OutputPort {
	CarrierId carrier = CarrierId::electricity;
	double p_nom = 0.0; // W
	double eta = 1.0;   // conversion efficiency of this output; COP for heat pumps
};

struct AssetSpec {
	std::string id;
	AssetKind kind = AssetKind::wind;
	std::vector<OutputPort> outputs;
	std::vector<CarrierId> inputs;
	double p_min_frac = 0.0;
	double e_nom = 0.0; // J, storages only
	double kappa = 0.0; // part-load curvature of the efficiency curve
	double eta_charge = 0.9486832980505138;
	double eta_discharge = 0.9486832980505138;
	ChpMode chp_mode = ChpMode::extraction;
	bool follows_heat_demand = false; // boiler driven by its own residual-demand controller

	double p_nom() const { return outputs.empty() ? 0.0 : outputs.front().p_nom; }
	double p_min() const { return p_min_frac * p_nom(); }
	const OutputPort *output(CarrierId c) const;
	bool is_storage() const { return kind == AssetKind::bess || kind == AssetKind::tess; }
	bool is_converter() const;
	bool is_renewable() const { return kind == AssetKind::wind || kind == AssetKind::pv; }
	bool is_grid() const { return kind == AssetKind::grid_electric || kind == AssetKind::grid_gas; }
};

struct RewardWeights {
	double a = 1.0; // dimensionless cost weight
	double b = 0.0; // currency/Wh comfort weight
	bool b_auto = false;
};

// Knobs that only affect the truth plant (the MPC model always ignores them).
struct PlantOptions {
	double derating_band = 0.1; // fraction of e_nom; 0 disables SoC derating
	bool linear = false;        // force kappa = 0 everywhere (model-equals-plant)
};

struct MesConfig {
	std::vector<AssetSpec> assets;
	TimeGrid grid;
	double gas_price = 2.5e-5; // currency/Wh
	RewardWeights reward_weights;
	CaseLabel case_label = CaseLabel::simple;
	PlantOptions plant;

	const AssetSpec &asset(const std::string &id) const;
	const AssetSpec *find(const std::string &id) const;
	const AssetSpec &first_of(AssetKind kind) const;
	double capacity_sum() const; // sum of finite output p_nom over all assets
	double heat_capacity() const;
	double electric_capacity() const;
};

// One controllable degree of freedom of the plant, in a fixed order shared by
// every controller (RL action vectors index into this list).
struct SetpointSpec {
	std::string key;
	std::size_t asset = 0;
	CarrierId carrier = CarrierId::electricity;
	double p_min = 0.0;
	double p_max = 0.0; // p_nom for converters, rate limit for storages
	bool storage = false;
};

std::vector<SetpointSpec> controllable_setpoints(const MesConfig &cfg);

std::string to_string(CarrierId c);
std::string to_string(AssetKind k);
std::string to_string(CaseLabel c);
AssetKind asset_kind_from_string(const std::string &s);
CarrierId carrier_from_string(const std::string &s);
CaseLabel case_label_from_string(const std::string &s);

// Returns cfg unchanged when every invariant holds; otherwise throws
// ConfigError listing all violations.
const MesConfig &validate_config(const MesConfig &cfg);

// Built-in presets, identical to presets/case1.cfg and presets/case2.cfg.
MesConfig case1_config();
MesConfig case2_config();

MesConfig load_config(const std::filesystem::path &path);
MesConfig parse_config(const std::string &text);
std::string dump_config(const MesConfig &cfg);

// Resolves b_auto: b = 2 x max day-ahead price (currency/Wh).
MesConfig with_resolved_weights(MesConfig cfg, double max_price);

} // namespace mesbench
