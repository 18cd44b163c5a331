#pragma once

#include <span>
#include <string>
#include <vector>

namespace satedge {

struct Term {
    int var = 0;
    double coef = 0.0;
};

struct AffineExpr {
    std::vector<Term> terms;
    double constant = 0.0;

    double eval(std::span<const double> x) const
    {
        double v = constant;
        for (const auto& t : terms) v += t.coef * x[t.var];
        return v;
    }
};

/// sum(coef * x) <= rhs
struct LinearConstraint {
    std::vector<Term> terms;
    double rhs = 0.0;
    std::string tag;
    int user = -1; // owning user or satellite for reports, -1 when global
    int index = -1;

    double activity(std::span<const double> x) const
    {
        double v = 0.0;
        for (const auto& t : terms) v += t.coef * x[t.var];
        return v;
    }
};

/// Rotated second-order cone u * v >= z^2 with u, v >= 0.
struct ConeConstraint {
    AffineExpr u;
    AffineExpr v;
    AffineExpr z;
    std::string tag;
    int user = -1;
    int index = -1;

    /// u v - z^2, negative when violated.
    double margin(std::span<const double> x) const
    {
        const double zz = z.eval(x);
        return u.eval(x) * v.eval(x) - zz * zz;
    }
};

/// maximize  c.x - sum(q_j x_j^2) + c0  over linear rows, rotated cones and
/// box bounds. q >= 0, so the objective is concave.
struct ConicModel {
    int num_vars = 0;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<LinearConstraint> linear;
    std::vector<ConeConstraint> cones;
    std::vector<double> objective;
    std::vector<double> concave;
    double objective_constant = 0.0;

    int add_var(double lo, double hi, double cost = 0.0)
    {
        lower.push_back(lo);
        upper.push_back(hi);
        objective.push_back(cost);
        concave.push_back(0.0);
        return num_vars++;
    }

    double objective_value(std::span<const double> x) const
    {
        double v = objective_constant;
        for (int j = 0; j < num_vars; ++j) v += objective[j] * x[j] - concave[j] * x[j] * x[j];
        return v;
    }

    /// Largest violation of any row, cone or bound at x (0 when feasible).
    double max_violation(std::span<const double> x) const;
};

} // namespace satedge
