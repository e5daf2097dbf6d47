#include <cmath>

#include "mesbench/core/errors.hpp"
#include "mesbench/core/units.hpp"
#include "mesbench/mpc/mpc.hpp"

namespace mesbench::mpc {

using milp::RowSense;
using milp::Term;

namespace {

std::string tag(CarrierId c) {
	switch (c) {
	case CarrierId::electricity:
		return "el";
	case CarrierId::heat:
		return "th";
	case CarrierId::natural_gas:
		return "gas";
	}
	return "?";
}

std::string at(const std::string &name, std::size_t t) { return name + "[" + std::to_string(t) + "]"; }

void check_supported(const MesConfig &cfg) {
	std::vector<std::string> v;
	bool has_gas_grid = false, burns_gas = false;
	for (const auto &a : cfg.assets) {
		if (a.kind == AssetKind::grid_gas)
			has_gas_grid = true;
		if (a.is_converter()) {
			if (a.inputs.size() != 1 ||
			    (a.inputs[0] != CarrierId::natural_gas && a.inputs[0] != CarrierId::electricity))
				v.push_back(a.id + ": converters need exactly one gas or electricity input");
			else if (a.inputs[0] == CarrierId::natural_gas)
				burns_gas = true;
			if (a.kind == AssetKind::chp) {
				if (!a.output(CarrierId::electricity) || !a.output(CarrierId::heat))
					v.push_back(a.id + ": a CHP needs an electricity and a heat output");
			} else if (a.outputs.size() != 1) {
				v.push_back(a.id + ": only CHPs may have more than one output");
			}
			if (a.follows_heat_demand && a.outputs.front().carrier != CarrierId::heat)
				v.push_back(a.id + ": follows_heat_demand needs a heat output");
		}
		if (a.is_storage() && a.outputs.front().carrier == CarrierId::natural_gas)
			v.push_back(a.id + ": gas storage is not modelled");
	}
	if (burns_gas && !has_gas_grid)
		v.push_back("gas-fired converters need a grid_gas asset");
	if (!v.empty())
		throw ConfigError(std::move(v));
}

} // namespace

const std::vector<int> &MpcModel::vars(const std::string &key) const {
	auto it = index.find(key);
	if (it == index.end())
		throw UnknownAsset("no model variable '" + key + "'");
	return it->second;
}

MpcModel build_problem(const MesConfig &cfg, const std::vector<plant::ExogenousFrame> &forecast,
                       const SystemState &x0, std::size_t n_steps, const BuildOptions &opt) {
	check_supported(cfg);
	if (n_steps == 0)
		throw DomainError("build_problem: horizon must be at least one step");
	if (forecast.size() < n_steps)
		throw RangeError("build_problem: forecast covers " + std::to_string(forecast.size()) + " of " +
		                 std::to_string(n_steps) + " steps");

	MpcModel m;
	m.n_steps = n_steps;
	m.dt_h = cfg.grid.step_hours();
	const double dt = m.dt_h;
	auto &lp = m.problem.base;
	auto &ints = m.problem.int_vars;

	bool any_el = false, any_heat = false;
	for (const auto &a : cfg.assets) {
		for (const auto &o : a.outputs) {
			any_el |= o.carrier == CarrierId::electricity;
			any_heat |= o.carrier == CarrierId::heat;
		}
		for (auto c : a.inputs)
			any_el |= c == CarrierId::electricity;
	}

	auto var = [&](const std::string &key, std::size_t t, double lo, double hi, double cost) {
		const int j = lp.add_var(lo, hi, cost, at(key, t));
		m.index[key].push_back(j);
		return j;
	};

	for (std::size_t t = 0; t < n_steps; ++t) {
		const auto &f = forecast[t];
		const double price = units::from_mw(f.x_el); // per MWh
		std::vector<Term> el, heat, gas_link;
		double el_rhs = units::mw(f.e_el_demand);
		int gas_var = -1;

		for (const auto &a : cfg.assets) {
			switch (a.kind) {
			case AssetKind::grid_electric:
				el.push_back({var(a.id + ".imp", t, 0.0, milp::kInf, price * dt), 1.0});
				el.push_back({var(a.id + ".exp", t, 0.0, milp::kInf, -price * dt), -1.0});
				break;
			case AssetKind::grid_gas:
				gas_var = var("gas", t, 0.0, milp::kInf, units::from_mw(cfg.gas_price) * dt);
				break;
			case AssetKind::wind:
				el_rhs -= units::mw(plant::wind_power(f.wind_speed, a));
				break;
			case AssetKind::pv:
				el_rhs -= units::mw(plant::pv_power(f.irradiance, a));
				break;
			case AssetKind::bess:
			case AssetKind::tess: {
				const double rate = units::mw(a.p_nom());
				const double e_nom = units::mwh_from_joules(a.e_nom);
				const int ch = var(a.id + ".ch", t, 0.0, rate, 0.0);
				const int dis = var(a.id + ".dis", t, 0.0, rate, 0.0);
				const int soc = var(a.id + ".soc", t, 0.0, e_nom, 0.0);
				auto &bal = a.outputs.front().carrier == CarrierId::heat ? heat : el;
				bal.push_back({dis, 1.0});
				bal.push_back({ch, -1.0});
				// soc[t] is the state after step t; the measured SoC enters row 0 as a constant.
				std::vector<Term> link{{soc, 1.0}, {ch, -a.eta_charge * dt}, {dis, dt / a.eta_discharge}};
				double rhs = 0.0;
				if (t == 0) {
					auto it = x0.soc.find(a.id);
					if (it == x0.soc.end())
						throw StateError("initial state has no SoC for storage '" + a.id + "'");
					rhs = units::mwh_from_joules(it->second);
				} else {
					link.push_back({m.index[a.id + ".soc"][t - 1], -1.0});
				}
				lp.add_row(std::move(link), RowSense::eq, rhs, at(a.id + ".soc_link", t));
				break;
			}
			case AssetKind::chp: {
				const auto &pe = *a.output(CarrierId::electricity);
				const auto &ph = *a.output(CarrierId::heat);
				const double p_nom = units::mw(pe.p_nom), q_nom = units::mw(ph.p_nom);
				const double ratio = q_nom / p_nom;
				const int p = var(a.id + ".el", t, 0.0, p_nom, 0.0);
				el.push_back({p, 1.0});
				int on = -1;
				if (a.p_min_frac > 0.0) {
					on = var(a.id + ".on", t, 0.0, 1.0, 0.0);
					ints.push_back(on);
					lp.add_row({{p, 1.0}, {on, -a.p_min_frac * p_nom}}, RowSense::ge, 0.0, at(a.id + ".pmin", t));
					lp.add_row({{p, 1.0}, {on, -p_nom}}, RowSense::le, 0.0, at(a.id + ".pmax", t));
				}
				if (a.chp_mode == ChpMode::extraction) {
					const int q = var(a.id + ".th", t, 0.0, q_nom, 0.0);
					heat.push_back({q, 1.0});
					if (on >= 0) {
						lp.add_row({{q, 1.0}, {on, -a.p_min_frac * q_nom}}, RowSense::ge, 0.0, at(a.id + ".qmin", t));
						lp.add_row({{q, 1.0}, {on, -q_nom}}, RowSense::le, 0.0, at(a.id + ".qmax", t));
						lp.add_row({{q, 1.0}, {p, -ratio}, {on, -0.2 * q_nom}}, RowSense::le, 0.0,
						           at(a.id + ".pq", t));
					} else {
						lp.add_row({{q, 1.0}, {p, -ratio}}, RowSense::le, 0.2 * q_nom, at(a.id + ".pq", t));
					}
					gas_link.push_back({p, -1.0 / pe.eta});
					gas_link.push_back({q, -1.0 / ph.eta});
				} else {
					heat.push_back({p, ratio});
					gas_link.push_back({p, -(1.0 / pe.eta + ratio / ph.eta)});
				}
				break;
			}
			case AssetKind::boiler:
			case AssetKind::heat_pump:
			case AssetKind::genset: {
				const auto &o = a.outputs.front();
				const double p_nom = units::mw(o.p_nom);
				const int p = var(a.id + "." + tag(o.carrier), t, 0.0, p_nom, 0.0);
				(o.carrier == CarrierId::heat ? heat : el).push_back({p, 1.0});
				if (a.p_min_frac > 0.0) {
					const int on = var(a.id + ".on", t, 0.0, 1.0, 0.0);
					ints.push_back(on);
					lp.add_row({{p, 1.0}, {on, -a.p_min_frac * p_nom}}, RowSense::ge, 0.0, at(a.id + ".pmin", t));
					lp.add_row({{p, 1.0}, {on, -p_nom}}, RowSense::le, 0.0, at(a.id + ".pmax", t));
				}
				if (a.inputs.front() == CarrierId::natural_gas)
					gas_link.push_back({p, -1.0 / o.eta});
				else
					el.push_back({p, -1.0 / o.eta});
				break;
			}
			}
		}

		if (gas_var >= 0) {
			gas_link.push_back({gas_var, 1.0});
			lp.add_row(std::move(gas_link), RowSense::eq, 0.0, at("gas_link", t));
		}
		if (any_heat) {
			if (opt.soft_comfort) {
				heat.push_back({var("heat.short", t, 0.0, milp::kInf, opt.slack_price * dt), 1.0});
				heat.push_back({var("heat.surplus", t, 0.0, milp::kInf, opt.slack_price * dt), -1.0});
			}
			lp.add_row(std::move(heat), RowSense::eq, units::mw(f.e_th_demand), at("heat_balance", t));
		}
		if (any_el)
			lp.add_row(std::move(el), RowSense::eq, el_rhs, at("el_balance", t));
	}
	return m;
}

std::vector<ControlAction> plan_actions(const MpcModel &model, const std::vector<double> &x, const MesConfig &cfg) {
	const auto specs = controllable_setpoints(cfg);
	std::vector<ControlAction> out(model.n_steps);
	for (const auto &s : specs) {
		const auto &a = cfg.assets[s.asset];
		const std::vector<int> *ch = nullptr, *dis = nullptr, *v = nullptr;
		if (s.storage) {
			ch = &model.vars(a.id + ".ch");
			dis = &model.vars(a.id + ".dis");
		} else if (a.kind == AssetKind::chp && a.chp_mode == ChpMode::backpressure) {
			v = &model.vars(a.id + ".el");
		} else if (a.kind == AssetKind::chp) {
			v = &model.vars(s.key);
		} else {
			v = &model.vars(a.id + "." + tag(s.carrier));
		}
		const double eps = 1e-9 * s.p_max;
		for (std::size_t t = 0; t < model.n_steps; ++t) {
			double w = s.storage ? units::from_mw(x[(*dis)[t]] - x[(*ch)[t]]) : units::from_mw(x[(*v)[t]]);
			if (std::abs(w) < eps)
				w = 0.0;
			out[t].setpoints[s.key] = w;
		}
	}
	for (auto &a : out)
		a = project_action(a, cfg);
	return out;
}

} // namespace mesbench::mpc
