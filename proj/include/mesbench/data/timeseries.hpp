#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "mesbench/core/config.hpp"
#include "mesbench/plant/plant.hpp"

namespace mesbench::data {

struct TimeSeries {
	TimeGrid grid;
	std::vector<double> values;
	std::string unit;

	std::size_t size() const { return values.size(); }
	double max() const;
	double mean_abs() const;
	TimeSeries slice(std::size_t t0, std::size_t n) const;
};

// Canonical series names used across the toolkit.
inline constexpr const char *kThermalDemand = "e_th";
inline constexpr const char *kElectricDemand = "e_el";
inline constexpr const char *kWindSpeed = "wind_speed";
inline constexpr const char *kIrradiance = "irradiance";
inline constexpr const char *kPrice = "x_el";

std::string unit_of(const std::string &series_name);

using Profiles = std::map<std::string, TimeSeries>;

// "2019-01-01T00:15:00Z" <-> epoch seconds (UTC).
std::int64_t parse_iso8601(const std::string &s);
std::string format_iso8601(std::int64_t epoch);

// Two-column CSV (ISO-8601 UTC timestamp, value), optional header
// "timestamp,<name>[<unit>]". Values are linearly interpolated onto grid.
TimeSeries load_timeseries_csv(const std::filesystem::path &path, const std::string &expected_unit,
                               const TimeGrid &grid);
TimeSeries parse_timeseries_csv(std::istream &in, const std::string &expected_unit, const TimeGrid &grid);
void write_timeseries_csv(std::ostream &out, const TimeSeries &ts, const std::string &name);

// Deterministic synthetic demand, weather and price profiles.
Profiles synth_profiles(std::uint64_t seed, const TimeGrid &grid, const MesConfig &cfg);
Profiles synth_profiles(std::uint64_t seed, const TimeGrid &grid, CaseLabel case_label);

plant::ExogenousData to_exogenous(const Profiles &profiles);

} // namespace mesbench::data
