#pragma once

#include <string>
#include <vector>

#include "satedge/conic_model.hpp"

namespace satedge {

struct EngineOptions {
    double gap_tolerance = 1e-9;          // absolute duality gap at return
    double relative_gap_tolerance = 1e-9;
    double feasibility_tolerance = 1e-8;  // scaled primal and dual residuals
    int max_iterations = 100;
};

enum class EngineStatus { optimal, infeasible, iteration_limit };

struct EngineResult {
    EngineStatus status = EngineStatus::iteration_limit;
    std::vector<double> x;
    double objective = 0.0;
    double upper_bound = 0.0;        // dual bound: no feasible point does better
    double min_infeasibility = 0.0;  // positive when infeasible
    double complementarity = 0.0;    // s'z at return
    double max_violation = 0.0;      // of the returned point against the model
    int iterations = 0;
    std::string reason;
};

/// Smallest s >= 0 with (u + s)(v + s) >= z^2 and u + s, v + s >= 0.
double cone_violation(double u, double v, double z);

/// Maximizes a ConicModel with a homogeneous self-dual interior point method
/// (Nesterov-Todd scaling, Mehrotra predictor-corrector).
///
/// Fixed variables (lower == upper) and rows that pin a variable are removed
/// first; bounds and rows left with a single free variable become bounds.
/// Cones stay in rotated form and concave terms get an
/// epigraph. Infeasibility is reported from a dual ray; the upper bound is the
/// dual objective corrected for the remaining dual residual.
EngineResult solve_conic(const ConicModel& model, const EngineOptions& options = {});

} // namespace satedge
