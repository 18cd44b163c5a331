#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "satedge/conic_engine.hpp"
#include "satedge/offload_problem.hpp"

namespace satedge {

enum class BranchingRule { most_fractional, pseudo_cost };

struct SolverConfig {
    double rel_gap_tol = 1e-6;
    double abs_feas_tol = 1e-8;
    long max_bb_nodes = 20000;
    double time_limit = 300.0; // s, 0 disables
    BranchingRule branching = BranchingRule::most_fractional;
    bool root_rounding = true;
    EngineOptions engine;
};

/// -1 free, 0 or 1 fixed; indexed like ConvexMIProgram::binaries.
using Fixings = std::vector<std::int8_t>;

struct RelaxedSolution {
    EngineStatus status = EngineStatus::iteration_limit;
    std::vector<double> x;
    double objective = 0.0;
    double upper_bound = 0.0;
    double max_violation = 0.0;
    double complementarity = 0.0;
    double min_infeasibility = 0.0;
};

struct BBNode {
    long id = 0;
    long parent = -1;
    int depth = 0;
    Fixings fixings;
    double bound = 0.0; // upper bound inherited from the parent (maximization)
};

RelaxedSolution solve_relaxation(const ConvexMIProgram& program, std::span<const std::int8_t> fixings,
                                 const SolverConfig& config = {});

/// Fixings that pin every binary to the rounded value of x.
Fixings round_all(const ConvexMIProgram& program, std::span<const double> x);

struct BBStats {
    long nodes = 0;
    long pruned_bound = 0;
    long pruned_infeasible = 0;
    long limit_nodes = 0;
    double root_bound = 0.0;
    double heuristic_objective = 0.0;
    std::vector<double> incumbent_x; // full variable vector of the incumbent
};

/// Best-bound branch and bound over the binaries. One trace line per node
/// when `trace` is set. Each full assignment in `starts` is evaluated first
/// and seeds the incumbent when feasible.
Solution branch_and_bound(const ConvexMIProgram& program, const SolverConfig& config = {},
                          std::ostream* trace = nullptr, BBStats* stats = nullptr,
                          std::span<const Fixings> starts = {});

/// Maps the admitted (offload, forward) paths of a solution onto the matching
/// candidates of another instance over the same users, everything else at 0.
/// Empty when some admitted path has no counterpart.
Fixings transfer_assignment(const ProblemInstance& from, const Solution& solution, const ProblemInstance& to,
                            const ConvexMIProgram& program);

/// Greedy rounding of a relaxed point: candidates in decreasing i, each kept
/// when the fully fixed continuous program stays feasible and improves.
/// Returns the variable vector and its objective, or nothing.
struct HeuristicResult {
    std::vector<double> x;
    double objective = 0.0;
};
std::optional<HeuristicResult> rounding_heuristic(const RelaxedSolution& relaxed, const ConvexMIProgram& program,
                                                  const SolverConfig& config = {});

struct OracleResult {
    Solution solution;
    std::vector<double> x;
    long assignments = 0; // binary assignments enumerated
};

inline constexpr int oracle_max_users = 4;
inline constexpr int oracle_max_candidates = 4;

/// Enumerates every assignment satisfying the routing constraints and solves
/// the continuous program for each. Throws std::invalid_argument beyond
/// oracle_max_users users or oracle_max_candidates candidates per role.
OracleResult exhaustive_oracle(const ConvexMIProgram& program, const ProblemInstance& instance,
                               const SolverConfig& config = {});

struct RepairResult {
    Solution tightened; // solver output after the epsilon tightening
    Solution final;     // audited solution used for metrics
    AuditReport audit;
    bool exact_resolve = false;
    int demoted = 0;
};

/// Tightens, audits against the original constraints and, on failure,
/// re-solves the continuous part with exact reciprocals (b vartheta >= 1),
/// demoting users until the audit passes.
RepairResult audit_and_repair(const ProblemInstance& instance, const ConvexMIProgram& program,
                              const Solution& solution, const SolverConfig& config = {});

} // namespace satedge
