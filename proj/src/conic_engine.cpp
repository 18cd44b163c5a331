#include "satedge/conic_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

namespace satedge {

double cone_violation(double u, double v, double z)
{
    if (u >= 0.0 && v >= 0.0 && u * v >= z * z) return 0.0;
    const double root = 0.5 * (-(u + v) + std::sqrt((u - v) * (u - v) + 4.0 * z * z));
    return std::max({root, -u, -v, 0.0});
}

double ConicModel::max_violation(std::span<const double> x) const
{
    double worst = 0.0;
    for (int j = 0; j < num_vars; ++j) {
        worst = std::max(worst, lower[j] - x[j]);
        worst = std::max(worst, x[j] - upper[j]);
    }
    for (const auto& row : linear) worst = std::max(worst, row.activity(x) - row.rhs);
    for (const auto& cone : cones) worst = std::max(worst, cone_violation(cone.u.eval(x), cone.v.eval(x), cone.z.eval(x)));
    return worst;
}

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

struct SparseVec {
    std::vector<int> idx;
    std::vector<double> val;
    double constant = 0.0;

    double eval(const Eigen::VectorXd& x) const
    {
        double v = constant;
        for (std::size_t k = 0; k < idx.size(); ++k) v += val[k] * x[idx[k]];
        return v;
    }
    double dot(const Eigen::VectorXd& d) const
    {
        double v = 0.0;
        for (std::size_t k = 0; k < idx.size(); ++k) v += val[k] * d[idx[k]];
        return v;
    }
};

// a.x <= rhs, stored as a SparseVec with constant = -rhs so that the slack is
// -eval(x).
struct Row {
    SparseVec a;
    double slack(const Eigen::VectorXd& x) const { return -a.eval(x); }
};

struct Cone {
    SparseVec u, v, z;
};

struct Reduced {
    int n = 0;
    std::vector<Row> rows;
    std::vector<Cone> cones;
    Eigen::VectorXd c; // maximize c.x - q.x^2
    Eigen::VectorXd q;

};

// ---- presolve --------------------------------------------------------------

struct Presolved {
    bool infeasible = false;
    std::string reason;
    std::vector<double> lo, hi;
    std::vector<char> fixed;
    std::vector<double> value;
    std::vector<LinearConstraint> rows; // rows still active, in original variables
    std::vector<ConeConstraint> cones;
};

bool is_fixed_range(double lo, double hi)
{
    return std::isfinite(lo) && std::isfinite(hi) && hi - lo <= 1e-12 * std::max(1.0, std::abs(lo));
}

Presolved presolve(const ConicModel& m, double feas_tol)
{
    Presolved p;
    p.lo = m.lower;
    p.hi = m.upper;
    p.fixed.assign(m.num_vars, 0);
    p.value.assign(m.num_vars, 0.0);
    std::vector<LinearConstraint> rows = m.linear;
    std::vector<ConeConstraint> cones = m.cones;
    std::vector<char> row_alive(rows.size(), 1);
    std::vector<char> cone_alive(cones.size(), 1);

    auto fail = [&](std::string why) {
        p.infeasible = true;
        p.reason = std::move(why);
        return p;
    };
    auto fix = [&](int j, double v) {
        p.fixed[j] = 1;
        p.value[j] = v;
        p.lo[j] = p.hi[j] = v;
    };
    auto tighten = [&](int j, double coef, double bound) -> bool {
        // coef * x_j <= bound
        if (coef > 0.0) {
            const double ub = bound / coef;
            if (ub < p.hi[j]) {
                p.hi[j] = ub;
                return true;
            }
        } else if (coef < 0.0) {
            const double lb = bound / coef;
            if (lb > p.lo[j]) {
                p.lo[j] = lb;
                return true;
            }
        }
        return false;
    };

    bool changed = true;
    int passes = 0;
    while (changed && passes++ < 100) {
        changed = false;
        for (int j = 0; j < m.num_vars; ++j) {
            if (p.fixed[j]) continue;
            if (p.lo[j] > p.hi[j] + feas_tol)
                return fail("bounds of variable " + std::to_string(j) + " cross");
            if (p.lo[j] > p.hi[j] || is_fixed_range(p.lo[j], p.hi[j])) {
                fix(j, p.lo[j] > p.hi[j] ? 0.5 * (p.lo[j] + p.hi[j]) : p.lo[j]);
                changed = true;
            }
        }
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (!row_alive[r]) continue;
            const auto& row = rows[r];
            double constant = 0.0;
            int free_count = 0;
            int last_free = -1;
            double last_coef = 0.0;
            double min_activity = 0.0;
            bool min_finite = true;
            for (const auto& t : row.terms) {
                if (t.coef == 0.0) continue;
                if (p.fixed[t.var]) {
                    constant += t.coef * p.value[t.var];
                    continue;
                }
                ++free_count;
                last_free = t.var;
                last_coef = t.coef;
                const double b = t.coef > 0.0 ? p.lo[t.var] : p.hi[t.var];
                if (!std::isfinite(b)) min_finite = false;
                else min_activity += t.coef * b;
            }
            const double rhs = row.rhs - constant;
            const double scale = std::max(1.0, std::abs(row.rhs));
            if (free_count == 0) {
                if (-rhs > feas_tol * scale) return fail("row " + row.tag + " violated by fixings");
                row_alive[r] = 0;
                changed = true;
            } else if (free_count == 1) {
                tighten(last_free, last_coef, rhs);
                row_alive[r] = 0;
                changed = true;
            } else if (min_finite) {
                if (min_activity > rhs + feas_tol * scale) return fail("row " + row.tag + " cannot be satisfied");
                if (min_activity >= rhs - 1e-12 * scale) {
                    for (const auto& t : row.terms) {
                        if (t.coef == 0.0 || p.fixed[t.var]) continue;
                        fix(t.var, t.coef > 0.0 ? p.lo[t.var] : p.hi[t.var]);
                    }
                    row_alive[r] = 0;
                    changed = true;
                }
            }
        }
        for (std::size_t k = 0; k < cones.size(); ++k) {
            if (!cone_alive[k]) continue;
            const auto& cone = cones[k];
            auto split = [&](const AffineExpr& e, double& constant, std::vector<Term>& free_terms) {
                constant = e.constant;
                free_terms.clear();
                for (const auto& t : e.terms) {
                    if (t.coef == 0.0) continue;
                    if (p.fixed[t.var]) constant += t.coef * p.value[t.var];
                    else free_terms.push_back(t);
                }
            };
            double cu, cv, cz;
            std::vector<Term> fu, fv, fz;
            split(cone.u, cu, fu);
            split(cone.v, cv, fv);
            split(cone.z, cz, fz);
            if (fu.empty() && fv.empty() && fz.empty()) {
                if (cone_violation(cu, cv, cz) > feas_tol) return fail("cone " + cone.tag + " violated by fixings");
                cone_alive[k] = 0;
                changed = true;
                continue;
            }
            if (!fz.empty()) continue;
            // One side constant: the cone reduces to a linear bound on the other.
            auto reduce = [&](double c_const, double c_other, const std::vector<Term>& other) -> bool {
                LinearConstraint lc;
                lc.tag = cone.tag;
                lc.user = cone.user;
                lc.index = cone.index;
                for (const auto& t : other) lc.terms.push_back({t.var, -t.coef});
                if (c_const > 0.0) {
                    lc.rhs = c_other - cz * cz / c_const;
                } else if (c_const >= -feas_tol && std::abs(cz) <= feas_tol) {
                    lc.rhs = c_other;
                } else {
                    return false;
                }
                rows.push_back(std::move(lc));
                row_alive.push_back(1);
                return true;
            };
            if (fu.empty()) {
                if (!reduce(cu, cv, fv)) return fail("cone " + cone.tag + " has no feasible completion");
                cone_alive[k] = 0;
                changed = true;
            } else if (fv.empty()) {
                if (!reduce(cv, cu, fu)) return fail("cone " + cone.tag + " has no feasible completion");
                cone_alive[k] = 0;
                changed = true;
            }
        }
    }

    for (std::size_t r = 0; r < rows.size(); ++r)
        if (row_alive[r]) p.rows.push_back(rows[r]);
    for (std::size_t k = 0; k < cones.size(); ++k)
        if (cone_alive[k]) p.cones.push_back(cones[k]);
    return p;
}

// ---- reduced problem --------------------------------------------------------

struct Mapping {
    std::vector<int> to_reduced; // -1 for fixed
    std::vector<int> to_full;
};

SparseVec reduce_expr(const std::vector<Term>& terms, double constant, const Presolved& p, const Mapping& map)
{
    SparseVec out;
    out.constant = constant;
    for (const auto& t : terms) {
        if (t.coef == 0.0) continue;
        if (p.fixed[t.var]) {
            out.constant += t.coef * p.value[t.var];
            continue;
        }
        const int j = map.to_reduced[t.var];
        const auto it = std::find(out.idx.begin(), out.idx.end(), j);
        if (it != out.idx.end()) out.val[it - out.idx.begin()] += t.coef;
        else {
            out.idx.push_back(j);
            out.val.push_back(t.coef);
        }
    }
    return out;
}

Reduced build_reduced(const ConicModel& m, const Presolved& p, Mapping& map)
{
    map.to_reduced.assign(m.num_vars, -1);
    map.to_full.clear();
    for (int j = 0; j < m.num_vars; ++j) {
        if (p.fixed[j]) continue;
        map.to_reduced[j] = static_cast<int>(map.to_full.size());
        map.to_full.push_back(j);
    }
    Reduced r;
    r.n = static_cast<int>(map.to_full.size());
    r.c = Eigen::VectorXd::Zero(r.n);
    r.q = Eigen::VectorXd::Zero(r.n);
    for (int k = 0; k < r.n; ++k) {
        const int j = map.to_full[k];
        r.c[k] = m.objective[j];
        r.q[k] = m.concave[j];
        if (std::isfinite(p.hi[j])) r.rows.push_back({SparseVec{{k}, {1.0}, -p.hi[j]}});
        if (std::isfinite(p.lo[j])) r.rows.push_back({SparseVec{{k}, {-1.0}, p.lo[j]}});
    }
    for (const auto& row : p.rows) {
        SparseVec a = reduce_expr(row.terms, 0.0, p, map);
        a.constant -= row.rhs;
        r.rows.push_back({std::move(a)});
    }
    for (const auto& cone : p.cones) {
        r.cones.push_back({reduce_expr(cone.u.terms, cone.u.constant, p, map),
                           reduce_expr(cone.v.terms, cone.v.constant, p, map),
                           reduce_expr(cone.z.terms, cone.z.constant, p, map)});
    }
    return r;
}

// ---- cone program -------------------------------------------------------------

// minimize c.x  subject to  G x + s = h,  s in K.  K is R+^l followed by
// 3-dimensional rotated cones {(a, b, c) : 2 a b >= c^2, a, b >= 0}.
struct ConeProgram {
    int n = 0;
    int l = 0;
    int soc = 0;
    Eigen::SparseMatrix<double> G;
    Eigen::VectorXd h, c;

    int m() const { return l + 3 * soc; }
    int degree() const { return l + soc; }
};

// Cone blocks hold (u, v, sqrt2 z) for u v >= z^2; concave terms q x^2 get an
// epigraph w >= q x^2, i.e. (w, 1, sqrt(2q) x).
ConeProgram to_cone_program(const Reduced& r)
{
    ConeProgram p;
    int extra = 0;
    for (int j = 0; j < r.n; ++j)
        if (r.q[j] > 0.0) ++extra;
    p.n = r.n + extra;
    p.l = static_cast<int>(r.rows.size());
    p.soc = static_cast<int>(r.cones.size()) + extra;
    p.c = Eigen::VectorXd::Zero(p.n);
    p.c.head(r.n) = -r.c;
    p.h = Eigen::VectorXd::Zero(p.m());
    std::vector<Eigen::Triplet<double>> trip;
    int row = 0;
    for (const auto& rw : r.rows) {
        for (std::size_t k = 0; k < rw.a.idx.size(); ++k) trip.emplace_back(row, rw.a.idx[k], rw.a.val[k]);
        p.h[row] = -rw.a.constant;
        ++row;
    }
    const double sqrt2 = std::sqrt(2.0);
    auto put = [&](int at, const SparseVec& e, double scale) {
        for (std::size_t k = 0; k < e.idx.size(); ++k) trip.emplace_back(at, e.idx[k], -scale * e.val[k]);
        p.h[at] = scale * e.constant;
    };
    for (const auto& cone : r.cones) {
        put(row, cone.u, 1.0);
        put(row + 1, cone.v, 1.0);
        put(row + 2, cone.z, sqrt2);
        row += 3;
    }
    int w = r.n;
    for (int j = 0; j < r.n; ++j) {
        if (!(r.q[j] > 0.0)) continue;
        p.c[w] = 1.0;
        trip.emplace_back(row, w, -1.0);
        p.h[row + 1] = 1.0;
        trip.emplace_back(row + 2, j, -std::sqrt(2.0 * r.q[j]));
        row += 3;
        ++w;
    }
    p.G.resize(p.m(), p.n);
    p.G.setFromTriplets(trip.begin(), trip.end());
    p.G.makeCompressed();
    return p;
}

// ---- Nesterov-Todd scaling ----------------------------------------------------

// Cone blocks are kept in rotated coordinates y = (u, v, sqrt2 z) with
// 2 y1 y2 >= y3^2, which is the second-order cone under an orthogonal change of
// basis. Working there avoids forming u + v and u - v, whose difference loses
// the margin of nearly tight cones.
using Mat3 = Eigen::Matrix3d;
using Vec3d = Eigen::Vector3d;

const Mat3 jmat = (Mat3() << 0, 1, 0, 1, 0, 0, 0, 0, -1).finished();
const Vec3d unit_e = Vec3d(1.0, 1.0, 0.0) / std::sqrt(2.0);

double jdot(const Vec3d& a, const Vec3d& b) { return a[0] * b[1] + a[1] * b[0] - a[2] * b[2]; }

struct Scaling {
    Eigen::VectorXd d;          // linear part: W = diag(d)
    std::vector<Mat3> w, w_inv; // cone blocks (symmetric)
};

class ConeOps {
public:
    explicit ConeOps(const ConeProgram& p) : l_(p.l), soc_(p.soc) {}

    Vec3d block(const Eigen::VectorXd& v, int k) const { return v.segment<3>(l_ + 3 * k); }

    // Largest alpha with x + alpha dx in K (inf when unbounded).
    double max_step(const Eigen::VectorXd& x, const Eigen::VectorXd& dx) const
    {
        double alpha = inf;
        for (int i = 0; i < l_; ++i)
            if (dx[i] < 0.0) alpha = std::min(alpha, -x[i] / dx[i]);
        for (int k = 0; k < soc_; ++k) alpha = std::min(alpha, cone_step(block(x, k), block(dx, k)));
        return alpha;
    }

    // x_i for linear entries, x0 - |xbar| for cone blocks
    double min_margin(const Eigen::VectorXd& x) const
    {
        double m = inf;
        for (int i = 0; i < l_; ++i) m = std::min(m, x[i]);
        for (int k = 0; k < soc_; ++k) {
            const Vec3d y = block(x, k);
            const double x0 = unit_e.dot(y);
            m = std::min(m, x0 - (y - x0 * unit_e).norm());
        }
        return m;
    }

    void add_identity(Eigen::VectorXd& x, double a) const
    {
        for (int i = 0; i < l_; ++i) x[i] += a;
        for (int k = 0; k < soc_; ++k) x.segment<3>(l_ + 3 * k) += a * unit_e;
    }

    Scaling scaling(const Eigen::VectorXd& s, const Eigen::VectorXd& z) const
    {
        Scaling W;
        W.d.resize(l_);
        for (int i = 0; i < l_; ++i) W.d[i] = std::sqrt(s[i] / z[i]);
        W.w.resize(soc_);
        W.w_inv.resize(soc_);
        for (int k = 0; k < soc_; ++k) {
            const Vec3d sk = block(s, k), zk = block(z, k);
            const double sn = std::sqrt(std::max(jdot(sk, sk), 1e-300));
            const double zn = std::sqrt(std::max(jdot(zk, zk), 1e-300));
            const Vec3d sb = sk / sn, zb = zk / zn;
            const double beta = std::sqrt(sn / zn);
            const double gamma = std::sqrt(std::max(0.5 * (1.0 + sb.dot(zb)), 1e-300));
            Vec3d v = (sb + jmat * zb) / (2.0 * gamma);
            v += unit_e;
            v /= std::sqrt(2.0 * unit_e.dot(v));
            W.w[k] = beta * (2.0 * v * v.transpose() - jmat);
            W.w_inv[k] = (2.0 * jmat * v * v.transpose() * jmat - jmat) / beta;
        }
        return W;
    }

    Eigen::VectorXd apply(const Scaling& W, const Eigen::VectorXd& x, bool inverse) const
    {
        Eigen::VectorXd y(x.size());
        for (int i = 0; i < l_; ++i) y[i] = inverse ? x[i] / W.d[i] : x[i] * W.d[i];
        for (int k = 0; k < soc_; ++k)
            y.segment<3>(l_ + 3 * k) = (inverse ? W.w_inv[k] : W.w[k]) * block(x, k);
        return y;
    }

    // Jordan product: (a'b) e + a0 (b - b0 e) + b0 (a - a0 e), with a0 = e'a.
    Eigen::VectorXd circ(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const
    {
        Eigen::VectorXd y(a.size());
        for (int i = 0; i < l_; ++i) y[i] = a[i] * b[i];
        for (int k = 0; k < soc_; ++k) {
            const Vec3d u = block(a, k), v = block(b, k);
            const double u0 = unit_e.dot(u), v0 = unit_e.dot(v);
            y.segment<3>(l_ + 3 * k) = u.dot(v) * unit_e + u0 * (v - v0 * unit_e) + v0 * (u - u0 * unit_e);
        }
        return y;
    }

    // Solves lambda o x = d.
    Eigen::VectorXd circ_solve(const Eigen::VectorXd& lambda, const Eigen::VectorXd& d) const
    {
        Eigen::VectorXd x(d.size());
        for (int i = 0; i < l_; ++i) x[i] = d[i] / lambda[i];
        for (int k = 0; k < soc_; ++k) {
            const Vec3d u = block(lambda, k), e = block(d, k);
            const double u0 = unit_e.dot(u), e0 = unit_e.dot(e);
            const double x0 = (2.0 * u0 * e0 - u.dot(e)) / jdot(u, u);
            const Vec3d xbar = ((e - e0 * unit_e) - x0 * (u - u0 * unit_e)) / u0;
            x.segment<3>(l_ + 3 * k) = x0 * unit_e + xbar;
        }
        return x;
    }

    Eigen::VectorXd identity(int m, double a) const
    {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
        add_identity(e, a);
        return e;
    }

private:
    static double cone_step(const Vec3d& x, const Vec3d& d)
    {
        // smallest positive root of jdot(x + alpha d, x + alpha d) = 0
        const double a = jdot(d, d);
        const double b = 2.0 * jdot(x, d);
        const double c = jdot(x, x);
        if (c <= 0.0) return 0.0;
        const double scale = std::max({std::abs(a), std::abs(b), c});
        if (std::abs(a) <= 1e-15 * scale) return b < 0.0 ? -c / b : inf;
        const double disc = b * b - 4.0 * a * c;
        if (disc < 0.0) return inf;
        if (a > 0.0 && b >= 0.0) return inf;
        const double sq = std::sqrt(disc);
        const double qq = -0.5 * (b + (b >= 0.0 ? sq : -sq));
        double best = inf;
        for (double r : {qq / a, qq != 0.0 ? c / qq : inf})
            if (r > 0.0) best = std::min(best, r);
        return best;
    }

    int l_, soc_;
};

// ---- KKT system --------------------------------------------------------------

// Solves [0 G'; G -W^2] [x; z] = [a; b] with a sparse LDL' factorization of
// the statically regularized quasi-definite matrix and iterative refinement.
class KktSolver {
public:
    KktSolver(const ConeProgram& p, const ConeOps& ops) : p_(p), ops_(ops)
    {
        const int n = p.n, m = p.m();
        std::vector<Eigen::Triplet<double>> trip;
        for (int j = 0; j < n; ++j) trip.emplace_back(j, j, 0.0);
        for (int c = 0; c < n; ++c)
            for (Eigen::SparseMatrix<double>::InnerIterator it(p.G, c); it; ++it)
                trip.emplace_back(n + static_cast<int>(it.row()), c, it.value());
        for (int i = 0; i < p.l; ++i) trip.emplace_back(n + i, n + i, 0.0);
        for (int k = 0; k < p.soc; ++k) {
            const int o = n + p.l + 3 * k;
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b <= a; ++b) trip.emplace_back(o + a, o + b, 0.0);
        }
        K_.resize(n + m, n + m);
        K_.setFromTriplets(trip.begin(), trip.end());
        K_.makeCompressed();
        for (int j = 0; j < n; ++j) x_diag_.push_back(&K_.coeffRef(j, j));
        for (int i = 0; i < p.l; ++i) lin_.push_back(&K_.coeffRef(n + i, n + i));
        for (int k = 0; k < p.soc; ++k) {
            const int o = n + p.l + 3 * k;
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b <= a; ++b) soc_.push_back(&K_.coeffRef(o + a, o + b));
        }
        ldlt_.analyzePattern(K_);
    }

    bool factor(const Scaling& W)
    {
        W_ = &W;
        for (double delta = 1e-10; delta <= 1e-4; delta *= 100.0) {
            for (double* v : x_diag_) *v = delta;
            for (int i = 0; i < p_.l; ++i) *lin_[i] = -W.d[i] * W.d[i] - delta;
            std::size_t at = 0;
            for (int k = 0; k < p_.soc; ++k) {
                const Mat3 w2 = W.w[k] * W.w[k];
                for (int a = 0; a < 3; ++a)
                    for (int b = 0; b <= a; ++b) *soc_[at++] = -w2(a, b) - (a == b ? delta : 0.0);
            }
            ldlt_.factorize(K_);
            if (ldlt_.info() == Eigen::Success && ldlt_.vectorD().allFinite()) return true;
        }
        return false;
    }

    void solve(const Eigen::VectorXd& a, const Eigen::VectorXd& b, Eigen::VectorXd& x, Eigen::VectorXd& z) const
    {
        const int n = p_.n, m = p_.m();
        Eigen::VectorXd rhs(n + m), sol = Eigen::VectorXd::Zero(n + m);
        rhs << a, b;
        Eigen::VectorXd r = rhs;
        const double ref = 1.0 + rhs.lpNorm<Eigen::Infinity>();
        double last = inf;
        for (int it = 0; it < 8; ++it) {
            const Eigen::VectorXd d = ldlt_.solve(r);
            if (!d.allFinite()) break;
            sol += d;
            x = sol.head(n);
            z = sol.tail(m);
            r.head(n) = a - p_.G.transpose() * z;
            r.tail(m) = b - (p_.G * x - ops_.apply(*W_, ops_.apply(*W_, z, false), false));
            const double res = r.lpNorm<Eigen::Infinity>();
            if (res <= 1e-15 * ref || res > 0.5 * last) break;
            last = res;
        }
        x = sol.head(n);
        z = sol.tail(m);
    }

private:
    const ConeProgram& p_;
    const ConeOps& ops_;
    Eigen::SparseMatrix<double> K_;
    std::vector<double*> x_diag_, lin_, soc_;
    const Scaling* W_ = nullptr;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
};

// ---- homogeneous self-dual interior point method --------------------------------

struct IpmOutcome {
    EngineStatus status = EngineStatus::iteration_limit;
    Eigen::VectorXd x, s, z;
    double pcost = 0.0, dcost = 0.0, gap = 0.0, dres_l1 = 0.0;
    Eigen::VectorXd dual_residual;
    int iterations = 0;
    std::string reason;
};

IpmOutcome interior_point(const ConeProgram& p, const EngineOptions& opt)
{
    IpmOutcome out;
    const ConeOps ops(p);
    KktSolver kkt(p, ops);
    const int m = p.m();
    const double hnorm = std::max(1.0, p.h.norm());
    const double cnorm = std::max(1.0, p.c.norm());

    // identity-scaled start
    Scaling I;
    I.d = Eigen::VectorXd::Ones(p.l);
    I.w.assign(p.soc, Mat3::Identity());
    I.w_inv.assign(p.soc, Mat3::Identity());
    if (!kkt.factor(I)) {
        out.reason = "singular start system";
        return out;
    }
    Eigen::VectorXd x, s, z, tmp;
    kkt.solve(Eigen::VectorXd::Zero(p.n), p.h, x, tmp);
    s = -tmp;
    kkt.solve(-p.c, Eigen::VectorXd::Zero(m), tmp, z);
    for (Eigen::VectorXd* v : {&s, &z}) {
        const double a = -ops.min_margin(*v);
        if (a >= -1e-8) ops.add_identity(*v, 1.0 + std::max(a, 0.0));
    }
    double tau = 1.0, kappa = 1.0;

    auto finish = [&](EngineStatus st, std::string why) {
        out.status = st;
        out.reason = std::move(why);
        out.x = x / tau;
        out.s = s / tau;
        out.z = z / tau;
        return out;
    };

    int stalls = 0;
    for (int iter = 0;; ++iter) {
        out.iterations = iter;
        const Eigen::VectorXd rx = p.G.transpose() * z + p.c * tau;
        const Eigen::VectorXd rz = s + p.G * x - p.h * tau;
        const double cx = p.c.dot(x), hz = p.h.dot(z);
        const double rt = kappa + cx + hz;
        const double mu = (s.dot(z) + tau * kappa) / (p.degree() + 1);

        out.pcost = cx / tau;
        out.dcost = -hz / tau;
        out.gap = s.dot(z) / (tau * tau);
        out.dual_residual = rx / tau;
        const double pres = rz.norm() / tau / hnorm;
        const double dres = rx.norm() / tau / cnorm;
        double relgap = inf;
        if (out.pcost < 0.0) relgap = out.gap / -out.pcost;
        else if (out.dcost > 0.0) relgap = out.gap / out.dcost;
        if (pres <= opt.feasibility_tolerance && dres <= opt.feasibility_tolerance &&
            (out.gap <= opt.gap_tolerance || relgap <= opt.relative_gap_tolerance))
            return finish(EngineStatus::optimal, "");
        if (hz < 0.0 && (p.G.transpose() * z).norm() / cnorm <= opt.feasibility_tolerance * -hz) {
            out.status = EngineStatus::infeasible;
            out.reason = "dual ray certifies infeasibility";
            return out;
        }
        if (cx < 0.0 && (p.G * x + s).norm() / hnorm <= opt.feasibility_tolerance * -cx) {
            out.status = EngineStatus::iteration_limit;
            out.reason = "primal ray: objective unbounded";
            return out;
        }
        if (iter >= opt.max_iterations) {
            const bool close = pres <= 1e3 * opt.feasibility_tolerance && dres <= 1e3 * opt.feasibility_tolerance &&
                               (out.gap <= 1e3 * opt.gap_tolerance || relgap <= 1e3 * opt.relative_gap_tolerance);
            if (close) return finish(EngineStatus::optimal, "reduced accuracy");
            out.reason = "iteration limit";
            return out;
        }

        const Scaling W = ops.scaling(s, z);
        if (!kkt.factor(W)) {
            out.reason = "KKT factorization failed";
            return out;
        }
        const Eigen::VectorXd lambda = ops.apply(W, z, false);
        Eigen::VectorXd x1, z1;
        kkt.solve(-p.c, p.h, x1, z1);
        const double denom = p.c.dot(x1) + p.h.dot(z1) - kappa / tau;

        Eigen::VectorXd dx, dz, ds;
        double dtau = 0.0, dkappa = 0.0;
        Eigen::VectorXd dsa, dza;
        double dtau_a = 0.0, dkappa_a = 0.0;
        double sigma = 0.0;
        double alpha = 0.0;
        for (int pass = 0; pass < 2; ++pass) {
            const double eta = pass == 0 ? 1.0 : 1.0 - sigma;
            Eigen::VectorXd d_s = -ops.circ(lambda, lambda);
            double d_k = -tau * kappa;
            if (pass == 1) {
                d_s -= ops.circ(ops.apply(W, dsa, true), ops.apply(W, dza, false));
                d_s += ops.identity(m, sigma * mu);
                d_k += -dtau_a * dkappa_a + sigma * mu;
            }
            const Eigen::VectorXd dsp = ops.circ_solve(lambda, d_s);
            Eigen::VectorXd x2, z2;
            kkt.solve(-eta * rx, -eta * rz - ops.apply(W, dsp, false), x2, z2);
            dtau = (-eta * rt - p.c.dot(x2) - p.h.dot(z2) - d_k / tau) / denom;
            dx = x2 + dtau * x1;
            dz = z2 + dtau * z1;
            ds = ops.apply(W, dsp - ops.apply(W, dz, false), false);
            dkappa = (d_k - kappa * dtau) / tau;

            alpha = std::min(ops.max_step(s, ds), ops.max_step(z, dz));
            if (dtau < 0.0) alpha = std::min(alpha, -tau / dtau);
            if (dkappa < 0.0) alpha = std::min(alpha, -kappa / dkappa);
            if (pass == 0) {
                sigma = std::pow(1.0 - std::min(1.0, alpha), 3);
                dsa = ds;
                dza = dz;
                dtau_a = dtau;
                dkappa_a = dkappa;
            }
        }
        alpha = std::min(1.0, 0.99 * alpha);
        if (!(alpha > 1e-12)) {
            if (++stalls > 2) {
                out.reason = "step length collapsed";
                const bool close = pres <= 1e3 * opt.feasibility_tolerance &&
                                   dres <= 1e3 * opt.feasibility_tolerance &&
                                   (out.gap <= 1e3 * opt.gap_tolerance || relgap <= 1e3 * opt.relative_gap_tolerance);
                if (close) return finish(EngineStatus::optimal, "reduced accuracy");
                return out;
            }
            continue;
        }
        x += alpha * dx;
        s += alpha * ds;
        z += alpha * dz;
        tau += alpha * dtau;
        kappa += alpha * dkappa;
        // rescale the embedding so tau stays near one
        const double scale = 1.0 / std::max(tau, 1e-300);
        if (tau > 1e6 || tau < 1e-6) {
            x *= scale;
            s *= scale;
            z *= scale;
            kappa *= scale;
            tau = 1.0;
        }
    }
}

} // namespace

EngineResult solve_conic(const ConicModel& model, const EngineOptions& opt)
{
    EngineResult res;
    Presolved pre = presolve(model, opt.feasibility_tolerance);
    if (pre.infeasible) {
        res.status = EngineStatus::infeasible;
        res.reason = pre.reason;
        res.min_infeasibility = inf;
        return res;
    }
    Mapping map;
    const Reduced red = build_reduced(model, pre, map);

    auto assemble_x = [&](const Eigen::VectorXd& xr) {
        res.x = pre.value;
        for (int k = 0; k < red.n; ++k) res.x[map.to_full[k]] = xr[k];
        res.objective = model.objective_value(res.x);
        res.max_violation = model.max_violation(res.x);
    };

    if (red.n == 0) {
        assemble_x(Eigen::VectorXd());
        res.upper_bound = res.objective;
        res.status = EngineStatus::optimal;
        return res;
    }
    if (red.rows.empty() && red.cones.empty()) {
        // only unbounded free variables remain
        res.reason = "free variables without constraints";
        return res;
    }

    const ConeProgram cp = to_cone_program(red);
    EngineOptions run = opt;
    IpmOutcome out;
    for (int attempt = 0;; ++attempt) {
        out = interior_point(cp, run);
        res.iterations += out.iterations;
        res.reason = out.reason;
        res.status = out.status;
        if (out.status == EngineStatus::infeasible) {
            res.min_infeasibility = 1.0;
            return res;
        }
        if (out.status != EngineStatus::optimal) return res;
        assemble_x(out.x.head(red.n));
        // residuals are scaled by |h|, which big-M rows inflate
        if (res.max_violation <= opt.feasibility_tolerance || attempt == 2) break;
        run.feasibility_tolerance *= 1e-2;
    }
    // Dual objective, corrected for the remaining dual residual over a box
    // that contains every feasible point.
    double slack = 0.0;
    for (int k = 0; k < cp.n; ++k) {
        double reach = 10.0 * std::max(1.0, std::abs(out.x[k]));
        if (k < red.n) {
            const int j = map.to_full[k];
            if (std::isfinite(pre.lo[j]) && std::isfinite(pre.hi[j])) reach = std::max(std::abs(pre.lo[j]), std::abs(pre.hi[j]));
        }
        slack += std::abs(out.dual_residual[k]) * reach;
    }
    const double constant_part = res.objective + out.pcost; // objective = constant - pcost at x
    res.upper_bound = std::max(res.objective, constant_part - out.dcost + slack);
    res.complementarity = out.gap;
    return res;
}

} // namespace satedge
