#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "satedge/conic_model.hpp"
#include "satedge/link_model.hpp"
#include "satedge/network_topology.hpp"

namespace satedge {

struct Task {
    int user_id = 0;
    double bits = 1e6;     // zeta
    double cycles = 1e9;   // X
    double deadline = 3.0; // tau_max, s
};

/// Offloading candidate: user -> s_k, then path k to the compute node.
struct OffloadCandidate {
    Path path;
    double user_distance = 0.0; // d_{u, s_k}
};

/// Forwarding candidate: compute node -> path -> destination visible to the user.
struct ForwardCandidate {
    Path path;
    double user_distance = 0.0; // d_{dest, u}
};

struct UserProblem {
    GroundUser user;
    Task task;
    std::vector<OffloadCandidate> offload;
    std::vector<ForwardCandidate> forward;
    std::vector<LinkBudget> budgets;         // per visible satellite
    std::vector<VisibilityWindow> windows;   // all windows of this user at the current threshold
    double rho_max = 1.0;
    bool rho_fallback = false;

    const LinkBudget* budget(int satellite_id) const;
    /// Window open at t = 0, if any.
    const VisibilityWindow* current_window(int satellite_id) const;
    /// First window intersecting [0, until], if any.
    const VisibilityWindow* window_within(int satellite_id, double until) const;
    /// Indices into `forward` whose source is the compute node of offload[k].
    std::vector<int> partners(int k) const;
};

struct ProblemInstance {
    std::vector<UserProblem> users;
    std::vector<SatelliteResources> satellites; // sorted by id
    LinkParameters link;
    double alpha1 = 0.1;
    double alpha2 = 0.1;

    const SatelliteResources& satellite(int id) const;
    bool has_satellite(int id) const;
};

/// Everything assemble_instance needs from one decision epoch.
struct Snapshot {
    std::vector<SatelliteState> states;
    std::vector<SatelliteResources> resources; // same order as states
    ConstellationGraph graph;
    std::vector<Path> paths;
};

struct ActiveUser {
    GroundUser user;
    Task task;
    std::vector<VisibilityWindow> windows;
};

/// Fading power |g|^2 for a (user id, satellite id) pair.
using FadingSource = std::function<double(int user_id, int satellite_id)>;

struct AssemblyOptions {
    CandidateOptions candidates;
    LinkParameters link;
    double alpha1 = 0.1;
    double alpha2 = 0.1;
};

ProblemInstance assemble_instance(const Snapshot& snapshot, std::span<const ActiveUser> users,
                                  const FadingSource& fading, const AssemblyOptions& options);

/// Checks the structural invariants (paths exist in the snapshot set, budgets
/// present for every source). Returns an empty string when sound.
std::string check_instance(const ProblemInstance& instance);

// ---- convexified program -----------------------------------------------------

struct P2Options {
    double epsilon1 = 1e-4;
    double epsilon2 = 1e-4;
    double big_m1 = 0.0; // 0 selects 1/epsilon + 1
    double big_m2 = 0.0;
    /// Adds perspective cones (b + eps i) vartheta >= i^2, (f + eps i) phi >= i^2
    /// and an energy epigraph e i >= c f^2. They are valid for every integral
    /// point and tighten the continuous relaxation.
    bool perspective = true;
    /// Exact reciprocal cones b vartheta >= 1, f phi >= 1 in place of the
    /// epsilon-shifted disjunctions. Only meaningful with every binary fixed.
    bool exact = false;
};

struct UserVars {
    std::vector<int> i, b, f, theta, phi, energy; // per offload candidate; energy = -1 without epigraph
    std::vector<int> y;                          // per forward candidate
};

struct ConvexMIProgram {
    ConicModel model;
    std::vector<int> binaries; // i then y, user by user
    std::vector<UserVars> users;
    double m1 = 0.0, m2 = 0.0, epsilon1 = 0.0, epsilon2 = 0.0;
    P2Options options;
};

/// Convexified program. Candidates that cannot close the loop (no forward
/// partner) and users without any such candidate have their binaries fixed
/// at zero.
ConvexMIProgram build_p2(const ProblemInstance& instance, const P2Options& options = {});

/// Number of rows and cones build_p2 emits, from the instance sizes alone.
struct ConstraintCount {
    int linear = 0;
    int cones = 0;
};
ConstraintCount expected_constraint_count(const ProblemInstance& instance, const P2Options& options);

// ---- solutions ----------------------------------------------------------------

enum class SolveStatus { optimal, infeasible, gap_limit, time_limit };
std::string_view to_string(SolveStatus status);

struct UserSolution {
    std::vector<int> i, y;
    std::vector<double> b, f, theta, phi;

    bool admitted() const;
    int offload_index() const; // -1 when not admitted
    int forward_index() const;
};

struct Solution {
    std::vector<UserSolution> users;
    double objective = 0.0; // of the program it came from
    double bound = 0.0;
    SolveStatus status = SolveStatus::optimal;
    long nodes = 0;
};

Solution zero_solution(const ProblemInstance& instance);
Solution extract_solution(const ConvexMIProgram& program, std::span<const double> x);
std::vector<double> to_point(const ConvexMIProgram& program, const Solution& solution);

/// vartheta := 1/(b + eps1), phi := 1/(f + eps2) where i = 1; zero elsewhere.
void tighten(Solution& solution, double epsilon1, double epsilon2);

struct DelayEnergyBreakdown {
    double transmission = 0.0;
    double computation = 0.0;
    double propagation_offload = 0.0;
    double propagation_forward = 0.0;
    double transmit_energy = 0.0;
    double compute_energy = 0.0;

    double delay() const { return transmission + computation + propagation_offload + propagation_forward; }
    double energy() const { return transmit_energy + compute_energy; }
};

/// Original (non-auxiliary) delay and energy of an admitted user. Returns
/// nullopt if the user is not admitted or an allocation is zero.
std::optional<DelayEnergyBreakdown> breakdown(const ProblemInstance& instance, int user, const UserSolution& s);

/// Objective with the original reciprocal delays.
double original_objective(const ProblemInstance& instance, const Solution& solution);

// ---- feasibility audit ------------------------------------------------------------

struct AuditEntry {
    std::string tag;   // constraint label, e.g. "(15)"
    int user = -1;     // user index, or -1
    int index = -1;    // candidate index or satellite id
    double margin = 0; // >= 0 when satisfied
    std::string detail;
};

struct AuditReport {
    std::vector<AuditEntry> margins;    // every evaluated constraint
    std::vector<AuditEntry> violations; // the failing subset
    double objective = 0.0;

    bool feasible() const { return violations.empty(); }
    std::string summary() const;
};

/// Evaluates the original constraints with true reciprocals at a solution.
AuditReport audit_p1(const ProblemInstance& instance, const Solution& solution, double tolerance = 1e-9);

struct Metrics {
    int active_users = 0;
    int admitted = 0;
    int blocked_by_coverage = 0; // users with no usable offloading candidate
    std::optional<double> admission_rate;
    std::optional<double> average_delay;
    std::optional<double> average_energy;
    double objective = 0.0;
};

Metrics evaluate_solution(const ProblemInstance& instance, const Solution& solution);

/// True when the user has at least one candidate with a forwarding partner.
bool user_is_servable(const UserProblem& user);

} // namespace satedge
