#include "mesbench/plant/plant.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "mesbench/core/errors.hpp"

namespace mesbench::plant {

const ExogenousFrame &ExogenousData::at(std::size_t k) const {
	if (k >= frames.size())
		throw RangeError("exogenous index " + std::to_string(k) + " beyond data length " + std::to_string(frames.size()));
	return frames[k];
}

double ExogenousData::max_price() const {
	double m = 0.0;
	for (const auto &f : frames)
		m = std::max(m, f.x_el);
	return m;
}

double wind_power(double speed, const AssetSpec &spec, const WindCurve &curve) {
	const double p_nom = spec.p_nom();
	if (!(speed >= curve.cut_in) || speed > curve.cut_out)
		return 0.0;
	if (speed >= curve.rated)
		return p_nom;
	const double ci3 = curve.cut_in * curve.cut_in * curve.cut_in;
	const double r3 = curve.rated * curve.rated * curve.rated;
	return p_nom * (speed * speed * speed - ci3) / (r3 - ci3);
}

double pv_power(double irradiance, const AssetSpec &spec) {
	if (!(irradiance > 0.0))
		return 0.0;
	return std::min(spec.p_nom(), spec.p_nom() * irradiance / 1000.0);
}

double part_load_efficiency(double eta_nom, double kappa, double load) {
	const double l = std::clamp(load, 0.0, 1.0);
	return eta_nom * (1.0 - kappa * (1.0 - l) * (1.0 - l));
}

namespace {

struct Point {
	double p, q;
};

Point closest_on_segment(Point x, Point a, Point b) {
	const double dx = b.p - a.p, dy = b.q - a.q;
	const double len2 = dx * dx + dy * dy;
	double t = len2 > 0.0 ? ((x.p - a.p) * dx + (x.q - a.q) * dy) / len2 : 0.0;
	t = std::clamp(t, 0.0, 1.0);
	return {a.p + t * dx, a.q + t * dy};
}

double dist2(Point a, Point b) { return (a.p - b.p) * (a.p - b.p) + (a.q - b.q) * (a.q - b.q); }

} // namespace

std::pair<double, double> project_pq(double p_el, double q_th, const AssetSpec &chp) {
	const double p_nom = chp.output(CarrierId::electricity)->p_nom;
	const double q_nom = chp.output(CarrierId::heat)->p_nom;
	const double p_min = chp.p_min_frac * p_nom;
	const double ratio = q_nom / p_nom;
	const double slack = 0.2 * q_nom;
	auto q_cap = [&](double p) { return std::min(q_nom, ratio * p + slack); };

	if (p_el == 0.0 && q_th == 0.0)
		return {0.0, 0.0};
	const double tol = 1e-9 * p_nom;
	if (p_el >= p_min - tol && p_el <= p_nom + tol && q_th >= -tol && q_th <= q_cap(p_el) + tol)
		return {std::clamp(p_el, p_min, p_nom), std::clamp(q_th, 0.0, q_cap(std::clamp(p_el, p_min, p_nom)))};

	// Convex polygon, counter-clockwise.
	std::vector<Point> poly{{p_min, 0.0}, {p_nom, 0.0}, {p_nom, q_cap(p_nom)}};
	const double p_knee = (q_nom - slack) / ratio;
	if (p_knee > p_min && p_knee < p_nom)
		poly.push_back({p_knee, q_nom});
	poly.push_back({p_min, q_cap(p_min)});

	const Point x{p_el, q_th};
	Point best = poly.front();
	double best_d = dist2(x, best);
	for (std::size_t i = 0; i < poly.size(); ++i) {
		const Point c = closest_on_segment(x, poly[i], poly[(i + 1) % poly.size()]);
		const double d = dist2(x, c);
		if (d < best_d) {
			best_d = d;
			best = c;
		}
	}
	if (dist2(x, {0.0, 0.0}) <= best_d)
		return {0.0, 0.0};
	return {best.p, best.q};
}

ConverterResult converter_step(const std::vector<double> &setpoint, const AssetSpec &spec, double kappa) {
	ConverterResult r;
	for (const auto &o : spec.outputs)
		r.outputs[o.carrier] = 0.0;
	r.input_carrier = spec.inputs.empty() ? CarrierId::natural_gas : spec.inputs.front();
	if (setpoint.empty())
		return r;

	if (spec.kind == AssetKind::chp) {
		const auto &el = *spec.output(CarrierId::electricity);
		const auto &th = *spec.output(CarrierId::heat);
		double p = setpoint[0];
		double q = spec.chp_mode == ChpMode::extraction && setpoint.size() > 1 ? setpoint[1] : p * th.p_nom / el.p_nom;
		if (spec.chp_mode == ChpMode::extraction) {
			std::tie(p, q) = project_pq(p, q, spec);
		} else if (p < spec.p_min_frac * el.p_nom * (1.0 - 1e-12)) {
			p = 0.0;
			q = 0.0;
		}
		if (p <= 0.0)
			return r;
		const double load = p / el.p_nom;
		r.outputs[CarrierId::electricity] = p;
		r.outputs[CarrierId::heat] = q;
		r.input = p / part_load_efficiency(el.eta, kappa, load) + q / part_load_efficiency(th.eta, kappa, load);
		return r;
	}

	const auto &out = spec.outputs.front();
	const double v = std::clamp(setpoint[0], 0.0, out.p_nom);
	if (v <= 0.0)
		return r;
	const double load = v / out.p_nom;
	r.outputs[out.carrier] = v;
	r.input = v / part_load_efficiency(out.eta, kappa, load);
	return r;
}

StorageResult storage_step(double soc, double power, double dt, const AssetSpec &spec, double derating_band) {
	const double e_nom = spec.e_nom;
	const double rate = spec.p_nom();
	double charge_limit = rate;
	double discharge_limit = rate;
	if (derating_band > 0.0) {
		const double band = derating_band * e_nom;
		charge_limit = rate * std::clamp((e_nom - soc) / band, 0.0, 1.0);
		discharge_limit = rate * std::clamp(soc / band, 0.0, 1.0);
	}
	StorageResult r;
	if (power < 0.0) {
		double p = std::min(-power, charge_limit);
		p = std::min(p, std::max(0.0, e_nom - soc) / (spec.eta_charge * dt));
		r.new_soc = std::clamp(soc + p * spec.eta_charge * dt, 0.0, e_nom);
		r.realized_power = -p;
	} else if (power > 0.0) {
		double p = std::min(power, discharge_limit);
		p = std::min(p, std::max(0.0, soc) * spec.eta_discharge / dt);
		r.new_soc = std::clamp(soc - p * dt / spec.eta_discharge, 0.0, e_nom);
		r.realized_power = p;
	} else {
		r.new_soc = soc;
	}
	return r;
}

Observation observe(const ExogenousFrame &frame, double c_e, const MesConfig &cfg) {
	Observation o;
	o.e_th = frame.e_th_demand;
	o.e_el = frame.e_el_demand;
	o.x_el = frame.x_el;
	o.c_e = c_e;
	for (const auto &a : cfg.assets) {
		if (a.kind == AssetKind::wind)
			o.p_wind += wind_power(frame.wind_speed, a);
		else if (a.kind == AssetKind::pv)
			o.p_solar += pv_power(frame.irradiance, a);
	}
	return o;
}

SystemState initial_state(const MesConfig &cfg, const ExogenousData &data, std::size_t t,
                          const std::map<std::string, double> &soc_fraction) {
	SystemState s;
	s.t_index = t;
	s.obs = observe(data.at(t), 0.0, cfg);
	for (const auto &a : cfg.assets) {
		if (!a.is_storage())
			continue;
		auto it = soc_fraction.find(a.id);
		s.soc[a.id] = (it == soc_fraction.end() ? 0.5 : it->second) * a.e_nom;
	}
	return s;
}

namespace {

double effective_kappa(const AssetSpec &a, const MesConfig &cfg) { return cfg.plant.linear ? 0.0 : a.kappa; }

double effective_band(const MesConfig &cfg) { return cfg.plant.linear ? 0.0 : cfg.plant.derating_band; }

void add_flow(std::map<CarrierId, double> &m, CarrierId c, double v) { m[c] += v; }

} // namespace

StepResult step(const SystemState &state, const ControlAction &action, const ExogenousFrame &exo,
                const MesConfig &cfg) {
	for (const auto &a : cfg.assets) {
		if (!a.is_storage())
			continue;
		auto it = state.soc.find(a.id);
		if (it == state.soc.end())
			throw StateError("state has no SoC for storage '" + a.id + "'");
		if (!(it->second >= 0.0 && it->second <= a.e_nom))
			throw StateError("SoC of '" + a.id + "' out of bounds on entry: " + std::to_string(it->second) + " J");
	}

	const double dt = cfg.grid.step_s;
	StepResult r;
	r.next = state;
	double el_prod = 0.0, el_cons = exo.e_el_demand, heat_other = 0.0, heat_total = 0.0, gas = 0.0;

	// (1) renewables
	for (const auto &a : cfg.assets) {
		if (!a.is_renewable())
			continue;
		const double p = a.kind == AssetKind::wind ? wind_power(exo.wind_speed, a) : pv_power(exo.irradiance, a);
		add_flow(r.dispatch[a.id].outputs, CarrierId::electricity, p);
		el_prod += p;
	}

	auto apply_converter = [&](const AssetSpec &a, const ConverterResult &c) {
		auto &flow = r.dispatch[a.id];
		for (const auto &[carrier, v] : c.outputs) {
			add_flow(flow.outputs, carrier, v);
			if (carrier == CarrierId::electricity)
				el_prod += v;
			else if (carrier == CarrierId::heat)
				heat_total += v;
		}
		add_flow(flow.inputs, c.input_carrier, c.input);
		if (c.input_carrier == CarrierId::natural_gas)
			gas += c.input;
		else if (c.input_carrier == CarrierId::electricity)
			el_cons += c.input;
	};

	// (2) controllable converters
	for (const auto &a : cfg.assets) {
		if (!a.is_converter() || a.follows_heat_demand)
			continue;
		std::vector<double> sp;
		if (a.kind == AssetKind::chp && a.chp_mode == ChpMode::extraction)
			sp = {action.at(a.id + ".el"), action.at(a.id + ".th")};
		else
			sp = {action.at(a.id)};
		const auto c = converter_step(sp, a, effective_kappa(a, cfg));
		if (auto it = c.outputs.find(CarrierId::heat); it != c.outputs.end())
			heat_other += it->second;
		apply_converter(a, c);
	}

	// (3) residual-demand boiler controller
	for (const auto &a : cfg.assets) {
		if (!a.follows_heat_demand)
			continue;
		double sp = std::clamp(exo.e_th_demand - heat_other, 0.0, a.p_nom());
		if (sp < 0.5 * a.p_min())
			sp = 0.0;
		else if (sp < a.p_min())
			sp = a.p_min();
		apply_converter(a, converter_step({sp}, a, effective_kappa(a, cfg)));
	}

	// (4) storages
	for (const auto &a : cfg.assets) {
		if (!a.is_storage())
			continue;
		const auto s = storage_step(state.soc.at(a.id), action.at(a.id), dt, a, effective_band(cfg));
		r.next.soc[a.id] = s.new_soc;
		auto &flow = r.dispatch[a.id];
		const CarrierId c = a.outputs.front().carrier;
		flow.outputs[c] = std::max(0.0, s.realized_power);
		flow.inputs[c] = std::max(0.0, -s.realized_power);
		if (c == CarrierId::electricity) {
			el_prod += flow.outputs[c];
			el_cons += flow.inputs[c];
		} else if (c == CarrierId::heat) {
			heat_total += s.realized_power;
		}
	}

	// (5) electricity balance closed by the grid
	const double net = el_prod - el_cons;
	const double imp = std::max(0.0, -net);
	const double exp = std::max(0.0, net);
	r.grid_import_el = imp - exp;
	// (6) gas balance closed by the gas grid
	r.gas_consumed = gas;
	for (const auto &a : cfg.assets) {
		if (a.kind == AssetKind::grid_electric) {
			r.dispatch[a.id].outputs[CarrierId::electricity] = imp;
			r.dispatch[a.id].inputs[CarrierId::electricity] = exp;
		} else if (a.kind == AssetKind::grid_gas) {
			r.dispatch[a.id].outputs[CarrierId::natural_gas] = gas;
		}
	}

	double prod_check = 0.0, cons_check = exo.e_el_demand, gas_inputs = 0.0;
	for (const auto &[id, flow] : r.dispatch) {
		const auto &a = cfg.asset(id);
		if (auto it = flow.outputs.find(CarrierId::electricity); it != flow.outputs.end())
			prod_check += it->second;
		if (auto it = flow.inputs.find(CarrierId::electricity); it != flow.inputs.end())
			cons_check += it->second;
		if (!a.is_grid())
			if (auto it = flow.inputs.find(CarrierId::natural_gas); it != flow.inputs.end())
				gas_inputs += it->second;
	}
	r.elec_residual = prod_check - cons_check;
	r.gas_residual = r.dispatch[cfg.first_of(AssetKind::grid_gas).id].outputs[CarrierId::natural_gas] - gas_inputs;

	// (7) cost and comfort
	const double dt_h = dt / 3600.0;
	r.heat_supplied = heat_total;
	r.loss.q_produced = heat_total;
	r.loss.l_comfort = std::abs(exo.e_th_demand - heat_total) * dt_h;
	r.loss.l_cost = (imp * exo.x_el + gas * cfg.gas_price - exp * exo.x_el) * dt_h;

	r.next.t_index = state.t_index + 1;
	r.next.obs.c_e = state.obs.c_e + r.loss.l_cost;
	return r;
}

Episode run_episode(const Controller &controller, const SystemState &start, std::size_t n, const ExogenousData &data,
                    const MesConfig &cfg) {
	if (start.t_index + n > data.size())
		throw RangeError("episode of " + std::to_string(n) + " steps from index " + std::to_string(start.t_index) +
		                 " exceeds data length " + std::to_string(data.size()));
	Episode ep;
	ep.states.reserve(n + 1);
	ep.states.push_back(start);
	ep.states.back().obs = observe(data.at(start.t_index), start.obs.c_e, cfg);
	for (std::size_t k = 0; k < n; ++k) {
		const auto &s = ep.states.back();
		const auto t0 = std::chrono::steady_clock::now();
		const ControlAction raw = controller(s);
		const auto t1 = std::chrono::steady_clock::now();
		ep.decision_seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
		const ControlAction act = project_action(raw, cfg);
		auto res = step(s, act, data.at(s.t_index), cfg);
		ep.objective += objective_contribution(res.loss, cfg.reward_weights);
		ep.cost += res.loss.l_cost;
		ep.comfort_wh += res.loss.l_comfort;
		SystemState next = res.next;
		if (next.t_index < data.size())
			next.obs = observe(data.frames[next.t_index], next.obs.c_e, cfg);
		ep.actions.push_back(act);
		ep.steps.push_back(std::move(res));
		ep.states.push_back(std::move(next));
	}
	return ep;
}

} // namespace mesbench::plant
