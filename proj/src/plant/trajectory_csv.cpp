#include <cstdio>
#include <ostream>

#include "mesbench/core/units.hpp"
#include "mesbench/plant/plant.hpp"

namespace mesbench::plant {

namespace {

std::string num(double v) {
	char buf[64];
	std::snprintf(buf, sizeof buf, "%.9g", v);
	return buf;
}

std::string carrier_tag(CarrierId c) {
	switch (c) {
	case CarrierId::electricity:
		return "el";
	case CarrierId::heat:
		return "th";
	case CarrierId::natural_gas:
		return "gas";
	}
	return "x";
}

double flow_of(const std::map<CarrierId, double> &m, CarrierId c) {
	auto it = m.find(c);
	return it == m.end() ? 0.0 : it->second;
}

} // namespace

void write_trajectory_csv(std::ostream &out, const Episode &ep, const ExogenousData &data, const MesConfig &cfg) {
	out << "timestamp,step";
	for (const auto &a : cfg.assets) {
		if (a.is_grid())
			continue;
		if (a.is_storage()) {
			out << "," << a.id << "_power_mw," << a.id << "_soc_mwh";
			continue;
		}
		for (const auto &o : a.outputs)
			out << "," << a.id << "_" << carrier_tag(o.carrier) << "_out_mw";
		for (auto c : a.inputs)
			out << "," << a.id << "_" << carrier_tag(c) << "_in_mw";
	}
	out << ",grid_import_mw,grid_export_mw,gas_mw,e_th_mw,e_el_mw,x_el_per_mwh,l_cost,l_comfort_mwh\n";

	for (std::size_t k = 0; k < ep.steps.size(); ++k) {
		const auto &s = ep.states[k];
		const auto &r = ep.steps[k];
		const auto &f = data.at(s.t_index);
		out << data.grid.timestamp(s.t_index) << "," << s.t_index;
		for (const auto &a : cfg.assets) {
			if (a.is_grid())
				continue;
			auto it = r.dispatch.find(a.id);
			const AssetFlow empty;
			const AssetFlow &flow = it == r.dispatch.end() ? empty : it->second;
			if (a.is_storage()) {
				const CarrierId c = a.outputs.front().carrier;
				out << "," << num(units::mw(flow_of(flow.outputs, c) - flow_of(flow.inputs, c))) << ","
				    << num(units::mwh_from_joules(r.next.soc.at(a.id)));
				continue;
			}
			for (const auto &o : a.outputs)
				out << "," << num(units::mw(flow_of(flow.outputs, o.carrier)));
			for (auto c : a.inputs)
				out << "," << num(units::mw(flow_of(flow.inputs, c)));
		}
		out << "," << num(units::mw(std::max(0.0, r.grid_import_el))) << ","
		    << num(units::mw(std::max(0.0, -r.grid_import_el))) << "," << num(units::mw(r.gas_consumed)) << ","
		    << num(units::mw(f.e_th_demand)) << "," << num(units::mw(f.e_el_demand)) << "," << num(f.x_el * 1.0e6)
		    << "," << num(r.loss.l_cost) << "," << num(r.loss.l_comfort / 1.0e6) << "\n";
	}
}

} // namespace mesbench::plant
