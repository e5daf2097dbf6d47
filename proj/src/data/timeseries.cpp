#include "mesbench/data/timeseries.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "mesbench/core/errors.hpp"

namespace mesbench::data {

double TimeSeries::max() const {
	double m = -kInf;
	for (double v : values)
		m = std::max(m, v);
	return m;
}

double TimeSeries::mean_abs() const {
	if (values.empty())
		return 0.0;
	double s = 0.0;
	for (double v : values)
		s += std::abs(v);
	return s / static_cast<double>(values.size());
}

TimeSeries TimeSeries::slice(std::size_t t0, std::size_t n) const {
	if (t0 + n > values.size())
		throw RangeError("slice [" + std::to_string(t0) + ", " + std::to_string(t0 + n) + ") beyond series of length " +
		                 std::to_string(values.size()));
	TimeSeries out;
	out.grid = grid;
	out.grid.start_epoch = grid.timestamp(t0);
	out.grid.n_steps = n;
	out.unit = unit;
	out.values.assign(values.begin() + static_cast<std::ptrdiff_t>(t0),
	                  values.begin() + static_cast<std::ptrdiff_t>(t0 + n));
	return out;
}

std::string unit_of(const std::string &name) {
	if (name == kThermalDemand || name == kElectricDemand)
		return "W";
	if (name == kWindSpeed)
		return "m/s";
	if (name == kIrradiance)
		return "W/m2";
	if (name == kPrice)
		return "currency/Wh";
	return "";
}

namespace {

// Howard Hinnant's days_from_civil / civil_from_days.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
	y -= m <= 2;
	const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
	const unsigned yoe = static_cast<unsigned>(y - era * 400);
	const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
	const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
	return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t &y, unsigned &m, unsigned &d) {
	z += 719468;
	const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
	const unsigned doe = static_cast<unsigned>(z - era * 146097);
	const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
	y = static_cast<std::int64_t>(yoe) + era * 400;
	const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
	const unsigned mp = (5 * doy + 2) / 153;
	d = doy - (153 * mp + 2) / 5 + 1;
	m = mp < 10 ? mp + 3 : mp - 9;
	y += m <= 2;
}

std::string trim(std::string s) {
	const auto b = s.find_first_not_of(" \t\r\n");
	if (b == std::string::npos)
		return "";
	const auto e = s.find_last_not_of(" \t\r\n");
	return s.substr(b, e - b + 1);
}

} // namespace

std::int64_t parse_iso8601(const std::string &s) {
	int y = 0, mo = 0, d = 0, h = 0, mi = 0;
	double sec = 0.0;
	char sep = 0;
	const int n = std::sscanf(s.c_str(), "%4d-%2d-%2d%c%2d:%2d:%lf", &y, &mo, &d, &sep, &h, &mi, &sec);
	if (n < 3 || (n > 3 && n < 6) || (n >= 4 && sep != 'T' && sep != ' ') || mo < 1 || mo > 12 || d < 1 || d > 31 ||
	    h < 0 || h > 23 || mi < 0 || mi > 59)
		throw ParseError("malformed ISO-8601 timestamp '" + s + "'");
	const std::int64_t days = days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d));
	return days * 86400 + h * 3600 + mi * 60 + static_cast<std::int64_t>(std::llround(sec));
}

std::string format_iso8601(std::int64_t epoch) {
	std::int64_t days = epoch / 86400;
	std::int64_t rem = epoch % 86400;
	if (rem < 0) {
		rem += 86400;
		--days;
	}
	std::int64_t y;
	unsigned m, d;
	civil_from_days(days, y, m, d);
	char buf[32];
	std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ", static_cast<long long>(y), m, d,
	              static_cast<long long>(rem / 3600), static_cast<long long>((rem / 60) % 60),
	              static_cast<long long>(rem % 60));
	return buf;
}

TimeSeries parse_timeseries_csv(std::istream &in, const std::string &expected_unit, const TimeGrid &grid) {
	std::vector<std::int64_t> ts;
	std::vector<double> vs;
	std::string line;
	std::size_t lineno = 0;
	while (std::getline(in, line)) {
		++lineno;
		line = trim(line);
		if (line.empty() || line[0] == '#')
			continue;
		const auto comma = line.find(',');
		if (comma == std::string::npos)
			throw ParseError("line " + std::to_string(lineno) + ": expected two columns");
		const std::string first = trim(line.substr(0, comma));
		const std::string second = trim(line.substr(comma + 1));
		if (ts.empty() && vs.empty() && (first == "timestamp" || first == "time")) {
			const auto lb = second.find('[');
			const auto rb = second.find(']');
			if (lb != std::string::npos && rb != std::string::npos && rb > lb) {
				const std::string unit = second.substr(lb + 1, rb - lb - 1);
				if (!expected_unit.empty() && unit != expected_unit)
					throw UnitError("series unit '" + unit + "' does not match expected '" + expected_unit + "'");
			}
			continue;
		}
		if (second.find(',') != std::string::npos)
			throw ParseError("line " + std::to_string(lineno) + ": expected two columns");
		const std::int64_t t = parse_iso8601(first);
		char *end = nullptr;
		const double v = std::strtod(second.c_str(), &end);
		if (end == second.c_str() || *end != '\0' || !std::isfinite(v))
			throw ParseError("line " + std::to_string(lineno) + ": bad value '" + second + "'");
		if (!ts.empty() && t <= ts.back())
			throw ParseError("line " + std::to_string(lineno) + ": timestamps must be strictly increasing");
		ts.push_back(t);
		vs.push_back(v);
	}
	if (ts.empty())
		throw ParseError("time series file has no data rows");

	// Nominal source interval = smallest spacing (a single row covers one grid step).
	std::int64_t interval = static_cast<std::int64_t>(grid.step_s);
	if (ts.size() >= 2) {
		interval = ts[1] - ts[0];
		for (std::size_t i = 1; i < ts.size(); ++i)
			interval = std::min(interval, ts[i] - ts[i - 1]);
		for (std::size_t i = 1; i < ts.size(); ++i)
			if (ts[i] - ts[i - 1] > 2 * interval)
				throw GapError("gap of " + std::to_string(ts[i] - ts[i - 1]) + " s after " + format_iso8601(ts[i - 1]) +
				               " exceeds two source intervals");
	}

	TimeSeries out;
	out.grid = grid;
	out.unit = expected_unit;
	out.values.resize(grid.n_steps);
	std::size_t j = 0;
	for (std::size_t k = 0; k < grid.n_steps; ++k) {
		const std::int64_t t = grid.timestamp(k);
		if (t < ts.front() - interval || t > ts.back() + interval)
			throw GapError("grid point " + format_iso8601(t) + " not covered by the source data");
		while (j + 1 < ts.size() && ts[j + 1] <= t)
			++j;
		if (t <= ts.front()) {
			out.values[k] = vs.front();
		} else if (j + 1 >= ts.size()) {
			out.values[k] = vs.back();
		} else {
			const double w = static_cast<double>(t - ts[j]) / static_cast<double>(ts[j + 1] - ts[j]);
			out.values[k] = vs[j] + w * (vs[j + 1] - vs[j]);
		}
	}
	return out;
}

TimeSeries load_timeseries_csv(const std::filesystem::path &path, const std::string &expected_unit,
                               const TimeGrid &grid) {
	std::ifstream in(path);
	if (!in)
		throw ParseError("cannot open " + path.string());
	return parse_timeseries_csv(in, expected_unit, grid);
}

void write_timeseries_csv(std::ostream &out, const TimeSeries &ts, const std::string &name) {
	out << "timestamp," << name << "[" << ts.unit << "]\n";
	char buf[64];
	for (std::size_t k = 0; k < ts.values.size(); ++k) {
		std::snprintf(buf, sizeof buf, "%.12g", ts.values[k]);
		out << format_iso8601(ts.grid.timestamp(k)) << "," << buf << "\n";
	}
}

plant::ExogenousData to_exogenous(const Profiles &profiles) {
	auto get = [&](const char *name) -> const TimeSeries & {
		auto it = profiles.find(name);
		if (it == profiles.end())
			throw RangeError(std::string("profiles lack series '") + name + "'");
		return it->second;
	};
	const auto &th = get(kThermalDemand);
	const auto &el = get(kElectricDemand);
	const auto &ws = get(kWindSpeed);
	const auto &ir = get(kIrradiance);
	const auto &px = get(kPrice);
	const std::size_t n = th.size();
	if (el.size() != n || ws.size() != n || ir.size() != n || px.size() != n)
		throw ShapeError("profiles have inconsistent lengths");
	plant::ExogenousData d;
	d.grid = th.grid;
	d.frames.resize(n);
	for (std::size_t k = 0; k < n; ++k)
		d.frames[k] = {ws.values[k], ir.values[k], th.values[k], el.values[k], px.values[k]};
	return d;
}

} // namespace mesbench::data
