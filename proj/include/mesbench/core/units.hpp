#pragma once

// Internal quantities are SI: W, J, s, currency/Wh. Reports use MW and MWh.
namespace mesbench::units {

inline constexpr double kSecondsPerHour = 3600.0;
inline constexpr double kWattsPerMW = 1.0e6;
inline constexpr double kJoulesPerWh = 3600.0;
inline constexpr double kJoulesPerMWh = 3.6e9;

constexpr double mw(double w) { return w / kWattsPerMW; }
constexpr double from_mw(double m) { return m * kWattsPerMW; }
constexpr double mwh_from_joules(double j) { return j / kJoulesPerMWh; }
constexpr double joules_from_mwh(double m) { return m * kJoulesPerMWh; }
constexpr double hours(double seconds) { return seconds / kSecondsPerHour; }

} // namespace mesbench::units
