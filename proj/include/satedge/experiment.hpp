#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "satedge/link_model.hpp"
#include "satedge/micp_solver.hpp"
#include "satedge/network_topology.hpp"
#include "satedge/offload_problem.hpp"

namespace satedge {

enum class ScenarioMode { leo_only, meo_only, hybrid };
std::string_view to_string(ScenarioMode mode);
ScenarioMode mode_from_string(std::string_view name);

struct ConstellationConfig {
    std::vector<PlaneSpec> leo_planes;
    std::vector<PlaneSpec> meo_planes;
    std::string tle_file;  // replaces leo_planes when set
    int tle_nearest = 200; // TLE satellites kept, nearest the region at the origin
    SatelliteResources leo{0, Layer::leo, 25, 180e3, 5e9, 0.0, 20.0};
    SatelliteResources meo{0, Layer::meo, 50, 180e3, 10e9, 0.0, 20.0};
};

struct ExperimentConfig {
    std::vector<ScenarioMode> modes{ScenarioMode::leo_only, ScenarioMode::meo_only, ScenarioMode::hybrid};
    std::vector<double> thresholds{10, 20, 30, 40, 50};
    int realizations = 50;
    double poisson_rate = 5.0;
    int user_count = 20;
    double center_latitude = 62.0;
    double center_longitude = -77.5;
    double region_radius = 300e3; // m
    std::vector<double> task_bits{1e6, 2e6};
    double cycles_per_bit = 1000.0;
    double deadline = 3.0;
    double user_power_dbm = 17.0;
    double user_gain_dbi = 5.0;
    double alpha1 = 0.1;
    double alpha2 = 0.1;
    std::uint64_t seed = 1;
    bool jitter_epoch = true;
    double horizon = 600.0;
    double visibility_step = 10.0;
    double visibility_tolerance = 0.1;
    ConstellationConfig constellation;
    LinkRule link_rule;
    CandidateOptions candidates;
    LinkParameters link;
    P2Options p2;
    SolverConfig solver;
    int workers = 1;
    std::string archive_dir; // dump every assembled instance here when set
    /// Receives one block of solver trace lines per solved instance. Called
    /// from worker threads; must be thread-safe. Not part of the file format.
    std::function<void(const std::string&)> trace;
};

/// Desk-scale defaults: a 4 x 40 LEO shell at 550 km and 65 deg, 30 MEO
/// satellites at 2100 km on three near-polar planes, and a 1e-3 relative MIP
/// gap with a 30 s limit per instance. Admission counts are integral, so the
/// gap only affects the delay and energy terms.
ExperimentConfig default_experiment_config();

/// Throws ConfigError naming the offending field.
void validate(const ExperimentConfig& config);

ExperimentConfig parse_experiment_config(std::string_view json_text);
ExperimentConfig load_experiment_config(const std::string& path);

struct Constellation {
    std::vector<OrbitalElements> elements; // LEO first, ids 0..n-1
    std::vector<SatelliteResources> resources;
    double earth_angle = 0.0;   // rad at the simulation origin
    double jitter_period = 0.0; // s, one orbital period of the first satellite
};

/// Synthesized shells, or the TLE file (epochs shifted so the latest one is the
/// origin, keeping the tle_nearest satellites closest to the region center).
Constellation build_constellation(const ExperimentConfig& config);

struct ActiveSample {
    std::vector<int> users; // indices into the user population, sorted
    std::vector<Task> tasks;
    int drawn = 0; // Poisson draw before clamping
};

/// n ~ Poisson(lambda) clamped to the population, n distinct users uniformly,
/// tasks with zeta uniform over task_bits, X = zeta * cycles_per_bit.
ActiveSample sample_active_users(const ExperimentConfig& config, std::mt19937_64& rng);

/// User population uniformly distributed within the region radius.
std::vector<GroundUser> place_users(const ExperimentConfig& config);

struct RealizationRecord {
    ScenarioMode mode = ScenarioMode::hybrid;
    double threshold = 0.0;
    int realization = 0;
    int active = 0;
    int admitted = 0;
    int blocked_by_coverage = 0;
    std::optional<double> admission_rate;
    std::optional<double> average_delay;
    std::optional<double> average_energy;
    double objective = 0.0;       // convexified optimum
    double audited_objective = 0.0;
    SolveStatus status = SolveStatus::optimal;
    long nodes = 0;
    bool audit_feasible = true;
    int audit_violations = 0;
    bool exact_resolve = false;
    int demoted = 0;
    double reciprocal_error = 0.0; // max relative |vartheta - 1/(b+eps)| over i = 1 before tightening
    double inactive_residual = 0.0; // max |b|, |f|, |vartheta|, |phi| over i = 0
    double seconds = 0.0;
};

struct MetricsRow {
    ScenarioMode mode = ScenarioMode::hybrid;
    double threshold = 0.0;
    std::optional<double> admission_rate_mean, admission_rate_std;
    std::optional<double> avg_delay_mean, avg_delay_std;
    std::optional<double> avg_energy_mean, avg_energy_std;
    int n_realizations = 0;
    long blocked_by_coverage = 0;
    int status_optimal = 0;
    int status_limit = 0;

    bool operator==(const MetricsRow&) const = default;
};

struct MetricsTable {
    std::vector<MetricsRow> rows;
    double wall_time = 0.0; // not serialized

    const MetricsRow* find(ScenarioMode mode, double threshold) const;
};

struct ExperimentResult {
    MetricsTable table;
    std::vector<RealizationRecord> records; // ordered by (realization, mode, threshold)
};

using ProgressCallback = std::function<void(int done, int total)>;

ExperimentResult run_experiment(const ExperimentConfig& config, const ProgressCallback& progress = {});

/// Aggregates records into one row per (mode, threshold) in config order.
MetricsTable aggregate(const ExperimentConfig& config, const std::vector<RealizationRecord>& records);

// ---- CSV ----------------------------------------------------------------------

inline constexpr const char* csv_header =
    "mode,threshold_deg,admission_rate_mean,admission_rate_std,avg_delay_s_mean,avg_delay_s_std,"
    "avg_energy_j_mean,avg_energy_j_std,n_realizations,blocked_by_coverage,status_optimal,status_limit";

std::string to_csv(const MetricsTable& table);
/// Throws std::runtime_error naming the path when it cannot be written, and
/// std::invalid_argument for an empty table.
void emit_csv(const MetricsTable& table, const std::string& path);
MetricsTable parse_csv(std::string_view text);

/// Human-readable summary with hybrid-versus-LEO gaps per threshold.
std::string report(const MetricsTable& table);

} // namespace satedge
