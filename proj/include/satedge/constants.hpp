#pragma once

#include <cmath>
#include <numbers>

namespace satedge {

inline constexpr double earth_mu = 3.986004418e14;          // m^3/s^2
inline constexpr double earth_rotation_rate = 7.2921159e-5; // rad/s
inline constexpr double earth_radius = 6'371'000.0;         // m, spherical model
inline constexpr double speed_of_light = 299'792'458.0;     // m/s
inline constexpr double seconds_per_day = 86'400.0;

inline constexpr double pi = std::numbers::pi;
inline constexpr double deg_to_rad = pi / 180.0;
inline constexpr double rad_to_deg = 180.0 / pi;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

} // namespace satedge
