#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace satedge {

using Vec3 = Eigen::Vector3d;

enum class Layer { leo, meo };

std::string_view to_string(Layer layer);
Layer layer_from_string(std::string_view name);

struct OrbitalElements {
    int id = 0;
    std::string name;
    double semi_major_axis = 0.0; // m
    double eccentricity = 0.0;
    double inclination = 0.0;     // deg
    double raan = 0.0;            // deg
    double arg_perigee = 0.0;     // deg
    double mean_anomaly = 0.0;    // deg, at epoch
    double epoch = 0.0;           // s, relative to the simulation time origin
    Layer layer = Layer::leo;

    double mean_motion() const;   // rad/s
    double period() const;        // s
};

/// Position and velocity in Earth-fixed axes. The velocity is the inertial
/// velocity resolved in those axes (no omega x r term), so a circular orbit
/// reports |v| = sqrt(mu/a).
struct SatelliteState {
    int id = 0;
    Vec3 position = Vec3::Zero();
    Vec3 velocity = Vec3::Zero();
    double epoch_offset = 0.0;
};

struct GroundUser {
    int id = 0;
    double latitude = 0.0;  // deg
    double longitude = 0.0; // deg
    double altitude = 0.0;  // m
    double transmit_power = 0.05; // W
    double antenna_gain = 5.0;    // dBi
};

struct VisibilityWindow {
    int user_id = 0;
    int satellite_id = 0;
    double start = 0.0;
    double end = 0.0;
    bool currently_visible = false;

    double duration() const { return end - start; }
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---- TLE ingestion ---------------------------------------------------------

struct TleError {
    std::size_t line = 0; // 1-based line number of the offending line
    std::string message;
};

struct TleParseResult {
    std::vector<OrbitalElements> elements;
    std::vector<TleError> errors;
};

/// Parses 2-line or 3-line TLE records. Bad records are reported and skipped.
/// Element epochs are seconds since 2000-01-01T00:00:00 UTC.
TleParseResult parse_tle(std::string_view text);

/// Modulo-10 checksum over the first 68 columns of a TLE line.
int tle_checksum(std::string_view line);

/// Greenwich mean sidereal angle (rad) at the given seconds since
/// 2000-01-01T00:00:00 UTC.
double gmst_at(double seconds_since_2000);

// ---- synthesis and propagation ---------------------------------------------

struct PlaneSpec {
    double inclination = 0.0; // deg
    double altitude = 0.0;    // m above the spherical Earth
    int count = 0;
    double raan = 0.0;        // deg
};

inline constexpr double min_synthesis_altitude = 200'000.0;

/// Circular orbits, evenly spaced in mean anomaly within each plane. Ids are
/// assigned consecutively from first_id.
std::vector<OrbitalElements> synthesize_constellation(std::span<const PlaneSpec> planes, Layer layer,
                                                      int first_id = 0, std::string_view name_prefix = "sat");

/// Solves M = E - e sin E by Newton iteration.
double solve_kepler(double mean_anomaly_rad, double eccentricity, int max_iterations = 50);

/// Two-body propagation to simulation time t, rotated into Earth-fixed axes by
/// earth_angle_at_origin + omega_E t.
SatelliteState propagate(const OrbitalElements& elements, double t, double earth_angle_at_origin = 0.0);

Vec3 user_position(const GroundUser& user);

/// Elevation of the satellite above the user's local horizon, degrees.
double elevation_angle(const GroundUser& user, const Vec3& sat_position);

struct VisibilityOptions {
    double threshold = 10.0; // deg
    double horizon = 600.0;  // s
    double step = 10.0;      // s, must not exceed max_visibility_step
    double tolerance = 0.1;  // s, endpoint refinement
    double earth_angle_at_origin = 0.0;
};

inline constexpr double max_visibility_step = 60.0;

/// Maximal intervals in [0, horizon] where the elevation is at or above the
/// threshold, sorted and non-overlapping.
std::vector<VisibilityWindow> visibility_windows(const GroundUser& user, const OrbitalElements& elements,
                                                 const VisibilityOptions& options);

} // namespace satedge
