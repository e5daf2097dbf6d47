#include "mesbench/core/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mesbench/core/errors.hpp"
#include "mesbench/core/units.hpp"

namespace mesbench {

namespace {

std::string join(const std::vector<std::string> &parts) {
	std::string out;
	for (const auto &p : parts) {
		if (!out.empty())
			out += "; ";
		out += p;
	}
	return out;
}

} // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : Error("invalid configuration: " + join(violations)), violations_(std::move(violations)) {}

const OutputPort *AssetSpec::output(CarrierId c) const {
	for (const auto &o : outputs)
		if (o.carrier == c)
			return &o;
	return nullptr;
}

bool AssetSpec::is_converter() const {
	switch (kind) {
	case AssetKind::boiler:
	case AssetKind::heat_pump:
	case AssetKind::chp:
	case AssetKind::genset:
		return true;
	default:
		return false;
	}
}

const AssetSpec *MesConfig::find(const std::string &id) const {
	for (const auto &a : assets)
		if (a.id == id)
			return &a;
	return nullptr;
}

const AssetSpec &MesConfig::asset(const std::string &id) const {
	if (const auto *a = find(id))
		return *a;
	throw UnknownAsset("unknown asset '" + id + "'");
}

const AssetSpec &MesConfig::first_of(AssetKind kind) const {
	for (const auto &a : assets)
		if (a.kind == kind)
			return a;
	throw UnknownAsset("no asset of kind " + to_string(kind));
}

double MesConfig::capacity_sum() const {
	double s = 0.0;
	for (const auto &a : assets)
		for (const auto &o : a.outputs)
			if (std::isfinite(o.p_nom))
				s += o.p_nom;
	return s;
}

double MesConfig::heat_capacity() const {
	double s = 0.0;
	for (const auto &a : assets)
		if (a.is_converter())
			if (const auto *o = a.output(CarrierId::heat))
				s += o->p_nom;
	return s;
}

double MesConfig::electric_capacity() const {
	double s = 0.0;
	for (const auto &a : assets)
		if (a.is_converter() || a.is_renewable())
			if (const auto *o = a.output(CarrierId::electricity))
				s += o->p_nom;
	return s;
}

std::vector<SetpointSpec> controllable_setpoints(const MesConfig &cfg) {
	std::vector<SetpointSpec> out;
	for (std::size_t i = 0; i < cfg.assets.size(); ++i) {
		const auto &a = cfg.assets[i];
		if (a.is_storage()) {
			out.push_back({a.id, i, a.outputs.front().carrier, 0.0, a.p_nom(), true});
		} else if (a.kind == AssetKind::chp && a.chp_mode == ChpMode::extraction) {
			for (const auto &o : a.outputs) {
				const std::string suffix = o.carrier == CarrierId::heat ? ".th" : ".el";
				out.push_back({a.id + suffix, i, o.carrier, a.p_min_frac * o.p_nom, o.p_nom, false});
			}
		} else if (a.kind == AssetKind::chp) {
			const auto *el = a.output(CarrierId::electricity);
			out.push_back({a.id, i, CarrierId::electricity, a.p_min_frac * el->p_nom, el->p_nom, false});
		} else if (a.is_converter() && !a.follows_heat_demand) {
			out.push_back({a.id, i, a.outputs.front().carrier, a.p_min(), a.p_nom(), false});
		}
	}
	return out;
}

std::string to_string(CarrierId c) {
	switch (c) {
	case CarrierId::electricity:
		return "electricity";
	case CarrierId::heat:
		return "heat";
	case CarrierId::natural_gas:
		return "natural_gas";
	}
	return "?";
}

std::string to_string(AssetKind k) {
	switch (k) {
	case AssetKind::wind:
		return "wind";
	case AssetKind::pv:
		return "pv";
	case AssetKind::boiler:
		return "boiler";
	case AssetKind::heat_pump:
		return "heat_pump";
	case AssetKind::chp:
		return "chp";
	case AssetKind::genset:
		return "genset";
	case AssetKind::bess:
		return "bess";
	case AssetKind::tess:
		return "tess";
	case AssetKind::grid_electric:
		return "grid_electric";
	case AssetKind::grid_gas:
		return "grid_gas";
	}
	return "?";
}

std::string to_string(CaseLabel c) { return c == CaseLabel::simple ? "simple" : "complex"; }

AssetKind asset_kind_from_string(const std::string &s) {
	for (auto k : {AssetKind::wind, AssetKind::pv, AssetKind::boiler, AssetKind::heat_pump, AssetKind::chp,
	               AssetKind::genset, AssetKind::bess, AssetKind::tess, AssetKind::grid_electric, AssetKind::grid_gas})
		if (to_string(k) == s)
			return k;
	throw ConfigError({"unknown asset kind '" + s + "'"});
}

CarrierId carrier_from_string(const std::string &s) {
	for (auto c : {CarrierId::electricity, CarrierId::heat, CarrierId::natural_gas})
		if (to_string(c) == s)
			return c;
	throw ConfigError({"unknown carrier '" + s + "'"});
}

CaseLabel case_label_from_string(const std::string &s) {
	if (s == "simple" || s == "case1")
		return CaseLabel::simple;
	if (s == "complex" || s == "case2")
		return CaseLabel::complex;
	throw ConfigError({"unknown case label '" + s + "'"});
}

const MesConfig &validate_config(const MesConfig &cfg) {
	std::vector<std::string> v;
	if (!(cfg.grid.step_s > 0.0))
		v.push_back("grid.step_s must be > 0");
	if (cfg.grid.n_steps < 1)
		v.push_back("grid.n_steps must be >= 1");
	if (!(cfg.gas_price >= 0.0) || !std::isfinite(cfg.gas_price))
		v.push_back("gas_price must be finite and >= 0");
	if (!(cfg.reward_weights.a > 0.0))
		v.push_back("reward_weights.a must be > 0");
	if (!cfg.reward_weights.b_auto && !(cfg.reward_weights.b > 0.0))
		v.push_back("reward_weights.b must be > 0");
	if (cfg.plant.derating_band < 0.0 || cfg.plant.derating_band >= 0.5)
		v.push_back("plant.derating_band must lie in [0, 0.5)");

	int n_grid_el = 0, n_grid_gas = 0;
	std::vector<std::string> seen;
	for (const auto &a : cfg.assets) {
		const std::string who = "asset '" + a.id + "'";
		if (a.id.empty())
			v.push_back("asset with empty id");
		if (std::find(seen.begin(), seen.end(), a.id) != seen.end())
			v.push_back(who + ": duplicate id");
		seen.push_back(a.id);
		if (a.kind == AssetKind::grid_electric)
			++n_grid_el;
		if (a.kind == AssetKind::grid_gas)
			++n_grid_gas;
		if (!(a.p_min_frac >= 0.0 && a.p_min_frac <= 1.0))
			v.push_back(who + ": p_min_frac must lie in [0, 1]");
		if (a.is_storage() && !(a.e_nom > 0.0))
			v.push_back(who + ": storage requires e_nom > 0");
		if (!a.is_storage() && a.e_nom != 0.0)
			v.push_back(who + ": e_nom only allowed on storages");
		if (a.outputs.empty())
			v.push_back(who + ": needs at least one output");
		for (const auto &o : a.outputs) {
			if (!(o.p_nom > 0.0))
				v.push_back(who + ": p_nom must be > 0 for output " + to_string(o.carrier));
			if (!(o.eta > 0.0))
				v.push_back(who + ": eta must be > 0 for output " + to_string(o.carrier));
			if (a.is_grid() && o.carrier == CarrierId::heat)
				v.push_back(who + ": heat carrier cannot be grid connected");
		}
		if (a.kappa < 0.0 || a.kappa >= 1.0)
			v.push_back(who + ": kappa must lie in [0, 1)");
		if (a.is_storage() && !(a.eta_charge > 0.0 && a.eta_charge <= 1.0 && a.eta_discharge > 0.0 &&
		                        a.eta_discharge <= 1.0))
			v.push_back(who + ": storage efficiencies must lie in (0, 1]");
		if (a.kind == AssetKind::chp && (!a.output(CarrierId::electricity) || !a.output(CarrierId::heat)))
			v.push_back(who + ": chp needs electricity and heat outputs");
		if (a.follows_heat_demand && a.kind != AssetKind::boiler)
			v.push_back(who + ": only boilers can follow heat demand");
	}
	if (n_grid_el != 1)
		v.push_back("exactly one grid_electric asset required, found " + std::to_string(n_grid_el));
	if (n_grid_gas != 1)
		v.push_back("exactly one grid_gas asset required, found " + std::to_string(n_grid_gas));
	if (!v.empty())
		throw ConfigError(std::move(v));
	return cfg;
}

namespace {

AssetSpec grid(const std::string &id, AssetKind kind, CarrierId c) {
	AssetSpec a;
	a.id = id;
	a.kind = kind;
	a.outputs = {{c, kInf, 1.0}};
	a.inputs = {c};
	return a;
}

AssetSpec single(const std::string &id, AssetKind kind, CarrierId out, double p_nom_mw, double p_min_frac,
                 double eta, std::vector<CarrierId> inputs, double kappa) {
	AssetSpec a;
	a.id = id;
	a.kind = kind;
	a.outputs = {{out, units::from_mw(p_nom_mw), eta}};
	a.inputs = std::move(inputs);
	a.p_min_frac = p_min_frac;
	a.kappa = kappa;
	return a;
}

AssetSpec storage(const std::string &id, AssetKind kind, CarrierId c, double rate_mw, double e_nom_mwh) {
	AssetSpec a = single(id, kind, c, rate_mw, 0.0, 1.0, {c}, 0.0);
	a.e_nom = units::joules_from_mwh(e_nom_mwh);
	return a;
}

constexpr double kPlantKappa = 0.1;

} // namespace

MesConfig case1_config() {
	MesConfig cfg;
	cfg.case_label = CaseLabel::simple;
	cfg.grid.n_steps = 35040;
	cfg.reward_weights = {1.0, 0.0, true};
	cfg.assets.push_back(grid("grid_el", AssetKind::grid_electric, CarrierId::electricity));
	cfg.assets.push_back(grid("grid_gas", AssetKind::grid_gas, CarrierId::natural_gas));
	cfg.assets.push_back(single("wind", AssetKind::wind, CarrierId::electricity, 5.0, 0.0, 1.0, {}, 0.0));
	cfg.assets.push_back(single("pv", AssetKind::pv, CarrierId::electricity, 3.0, 0.0, 1.0, {}, 0.0));
	auto boiler = single("boiler", AssetKind::boiler, CarrierId::heat, 8.0, 0.0, 0.92, {CarrierId::natural_gas},
	                     kPlantKappa);
	boiler.follows_heat_demand = true;
	cfg.assets.push_back(boiler);
	AssetSpec chp;
	chp.id = "chp";
	chp.kind = AssetKind::chp;
	chp.outputs = {{CarrierId::electricity, units::from_mw(6.0), 0.38}, {CarrierId::heat, units::from_mw(6.0), 0.45}};
	chp.inputs = {CarrierId::natural_gas};
	chp.p_min_frac = 0.25;
	chp.kappa = kPlantKappa;
	chp.chp_mode = ChpMode::extraction;
	cfg.assets.push_back(chp);
	cfg.assets.push_back(storage("bess", AssetKind::bess, CarrierId::electricity, 2.5, 10.0));
	return cfg;
}

MesConfig case2_config() {
	MesConfig cfg;
	cfg.case_label = CaseLabel::complex;
	cfg.grid.n_steps = 35040;
	cfg.reward_weights = {1.0, 0.0, true};
	cfg.assets.push_back(grid("transformer", AssetKind::grid_electric, CarrierId::electricity));
	cfg.assets.push_back(grid("grid_gas", AssetKind::grid_gas, CarrierId::natural_gas));
	cfg.assets.push_back(single("wind", AssetKind::wind, CarrierId::electricity, 0.8, 0.015, 1.0, {}, 0.0));
	cfg.assets.push_back(single("pv", AssetKind::pv, CarrierId::electricity, 1.0, 0.0, 1.0, {}, 0.0));
	cfg.assets.push_back(single("boiler", AssetKind::boiler, CarrierId::heat, 2.0, 0.10, 0.92, {CarrierId::natural_gas},
	                            kPlantKappa));
	cfg.assets.push_back(single("heat_pump", AssetKind::heat_pump, CarrierId::heat, 1.0, 0.25, 3.0,
	                            {CarrierId::electricity}, kPlantKappa));
	AssetSpec chp;
	chp.id = "chp";
	chp.kind = AssetKind::chp;
	chp.outputs = {{CarrierId::electricity, units::from_mw(0.8), 0.38}, {CarrierId::heat, units::from_mw(1.0), 0.45}};
	chp.inputs = {CarrierId::natural_gas};
	chp.p_min_frac = 0.50;
	chp.kappa = kPlantKappa;
	chp.chp_mode = ChpMode::backpressure;
	cfg.assets.push_back(chp);
	cfg.assets.push_back(single("genset", AssetKind::genset, CarrierId::electricity, 0.5, 0.50, 0.35,
	                            {CarrierId::natural_gas}, kPlantKappa));
	cfg.assets.push_back(storage("tess", AssetKind::tess, CarrierId::heat, 0.5, 3.5));
	cfg.assets.push_back(storage("bess", AssetKind::bess, CarrierId::electricity, 0.5, 2.0));
	return cfg;
}

MesConfig with_resolved_weights(MesConfig cfg, double max_price) {
	if (cfg.reward_weights.b_auto) {
		cfg.reward_weights.b = 2.0 * max_price;
		cfg.reward_weights.b_auto = false;
	}
	return cfg;
}

// ---------------------------------------------------------------------------
// Config file: JSON tree, powers in MW, energies in MWh, prices per MWh.

namespace {

using nlohmann::json;

double number_or_inf(const json &j) {
	if (j.is_string()) {
		const auto s = j.get<std::string>();
		if (s == "inf" || s == "+inf")
			return kInf;
		throw ConfigError({"expected number or \"inf\", got '" + s + "'"});
	}
	return j.get<double>();
}

json inf_or_number(double v) {
	if (std::isinf(v))
		return "inf";
	return v;
}

} // namespace

MesConfig parse_config(const std::string &text) {
	json root;
	try {
		root = json::parse(text);
	} catch (const json::exception &e) {
		throw ConfigError({std::string("malformed config: ") + e.what()});
	}
	MesConfig cfg;
	try {
		cfg.case_label = case_label_from_string(root.value("case", std::string("simple")));
		if (root.contains("grid")) {
			const auto &g = root["grid"];
			cfg.grid.start_epoch = g.value("start_epoch", cfg.grid.start_epoch);
			cfg.grid.step_s = g.value("step_s", cfg.grid.step_s);
			cfg.grid.n_steps = g.value("n_steps", cfg.grid.n_steps);
		}
		cfg.gas_price = root.value("gas_price_per_mwh", 25.0) / 1.0e6;
		if (root.contains("reward_weights")) {
			const auto &w = root["reward_weights"];
			cfg.reward_weights.a = w.value("a", 1.0);
			if (w.contains("b_per_mwh") && w["b_per_mwh"].is_string() && w["b_per_mwh"] == "auto") {
				cfg.reward_weights.b_auto = true;
				cfg.reward_weights.b = 0.0;
			} else if (w.contains("b_per_mwh")) {
				cfg.reward_weights.b = w["b_per_mwh"].get<double>() / 1.0e6;
				cfg.reward_weights.b_auto = false;
			} else {
				cfg.reward_weights.b_auto = true;
			}
		} else {
			cfg.reward_weights.b_auto = true;
		}
		if (root.contains("plant")) {
			cfg.plant.derating_band = root["plant"].value("derating_band", cfg.plant.derating_band);
			cfg.plant.linear = root["plant"].value("linear", cfg.plant.linear);
		}
		for (const auto &ja : root.at("assets")) {
			AssetSpec a;
			a.id = ja.at("id").get<std::string>();
			a.kind = asset_kind_from_string(ja.at("kind").get<std::string>());
			for (const auto &jo : ja.at("outputs")) {
				OutputPort o;
				o.carrier = carrier_from_string(jo.at("carrier").get<std::string>());
				const double p = number_or_inf(jo.at("p_nom_mw"));
				o.p_nom = std::isinf(p) ? kInf : units::from_mw(p);
				o.eta = jo.value("eta", 1.0);
				a.outputs.push_back(o);
			}
			for (const auto &ji : ja.value("inputs", json::array()))
				a.inputs.push_back(carrier_from_string(ji.get<std::string>()));
			a.p_min_frac = ja.value("p_min_frac", 0.0);
			a.e_nom = units::joules_from_mwh(ja.value("e_nom_mwh", 0.0));
			a.kappa = ja.value("kappa", 0.0);
			a.eta_charge = ja.value("eta_charge", a.eta_charge);
			a.eta_discharge = ja.value("eta_discharge", a.eta_discharge);
			const auto mode = ja.value("chp_mode", std::string("extraction"));
			if (mode == "extraction")
				a.chp_mode = ChpMode::extraction;
			else if (mode == "backpressure")
				a.chp_mode = ChpMode::backpressure;
			else
				throw ConfigError({"asset '" + a.id + "': unknown chp_mode '" + mode + "'"});
			a.follows_heat_demand = ja.value("follows_heat_demand", false);
			cfg.assets.push_back(std::move(a));
		}
	} catch (const json::exception &e) {
		throw ConfigError({std::string("config schema: ") + e.what()});
	}
	validate_config(cfg);
	return cfg;
}

MesConfig load_config(const std::filesystem::path &path) {
	std::ifstream in(path);
	if (!in)
		throw ConfigError({"cannot open config file " + path.string()});
	std::stringstream ss;
	ss << in.rdbuf();
	return parse_config(ss.str());
}

std::string dump_config(const MesConfig &cfg) {
	json root;
	root["case"] = to_string(cfg.case_label);
	root["grid"] = {{"start_epoch", cfg.grid.start_epoch}, {"step_s", cfg.grid.step_s}, {"n_steps", cfg.grid.n_steps}};
	root["gas_price_per_mwh"] = cfg.gas_price * 1.0e6;
	json w = {{"a", cfg.reward_weights.a}};
	if (cfg.reward_weights.b_auto)
		w["b_per_mwh"] = "auto";
	else
		w["b_per_mwh"] = cfg.reward_weights.b * 1.0e6;
	root["reward_weights"] = w;
	root["plant"] = {{"derating_band", cfg.plant.derating_band}, {"linear", cfg.plant.linear}};
	json assets = json::array();
	for (const auto &a : cfg.assets) {
		json ja;
		ja["id"] = a.id;
		ja["kind"] = to_string(a.kind);
		json outs = json::array();
		for (const auto &o : a.outputs)
			outs.push_back({{"carrier", to_string(o.carrier)},
			                {"p_nom_mw", inf_or_number(std::isinf(o.p_nom) ? o.p_nom : units::mw(o.p_nom))},
			                {"eta", o.eta}});
		ja["outputs"] = outs;
		json ins = json::array();
		for (auto c : a.inputs)
			ins.push_back(to_string(c));
		ja["inputs"] = ins;
		ja["p_min_frac"] = a.p_min_frac;
		if (a.is_storage()) {
			ja["e_nom_mwh"] = units::mwh_from_joules(a.e_nom);
			ja["eta_charge"] = a.eta_charge;
			ja["eta_discharge"] = a.eta_discharge;
		}
		if (a.kappa != 0.0)
			ja["kappa"] = a.kappa;
		if (a.kind == AssetKind::chp)
			ja["chp_mode"] = a.chp_mode == ChpMode::extraction ? "extraction" : "backpressure";
		if (a.follows_heat_demand)
			ja["follows_heat_demand"] = true;
		assets.push_back(ja);
	}
	root["assets"] = assets;
	return root.dump(2) + "\n";
}

} // namespace mesbench
