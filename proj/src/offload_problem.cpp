#include "satedge/offload_problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "satedge/constants.hpp"

namespace satedge {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

} // namespace

const LinkBudget* UserProblem::budget(int satellite_id) const
{
    for (const auto& b : budgets)
        if (b.satellite_id == satellite_id) return &b;
    return nullptr;
}

const VisibilityWindow* UserProblem::current_window(int satellite_id) const
{
    for (const auto& w : windows)
        if (w.satellite_id == satellite_id && w.start <= 0.0 && w.end > 0.0) return &w;
    return nullptr;
}

const VisibilityWindow* UserProblem::window_within(int satellite_id, double until) const
{
    const VisibilityWindow* best = nullptr;
    for (const auto& w : windows) {
        if (w.satellite_id != satellite_id || w.end < 0.0 || w.start > until) continue;
        if (!best || w.start < best->start) best = &w;
    }
    return best;
}

std::vector<int> UserProblem::partners(int k) const
{
    std::vector<int> out;
    const int node = offload[k].path.destination;
    for (std::size_t j = 0; j < forward.size(); ++j)
        if (forward[j].path.source == node) out.push_back(static_cast<int>(j));
    return out;
}

const SatelliteResources& ProblemInstance::satellite(int id) const
{
    auto it = std::lower_bound(satellites.begin(), satellites.end(), id,
                               [](const SatelliteResources& s, int v) { return s.id < v; });
    if (it == satellites.end() || it->id != id) throw ConfigError("unknown satellite id " + std::to_string(id));
    return *it;
}

bool ProblemInstance::has_satellite(int id) const
{
    auto it = std::lower_bound(satellites.begin(), satellites.end(), id,
                               [](const SatelliteResources& s, int v) { return s.id < v; });
    return it != satellites.end() && it->id == id;
}

ProblemInstance assemble_instance(const Snapshot& snap, std::span<const ActiveUser> users, const FadingSource& fading,
                                  const AssemblyOptions& opt)
{
    ProblemInstance inst;
    inst.link = opt.link;
    inst.alpha1 = opt.alpha1;
    inst.alpha2 = opt.alpha2;
    inst.satellites = snap.resources;
    std::sort(inst.satellites.begin(), inst.satellites.end(),
              [](const SatelliteResources& a, const SatelliteResources& b) { return a.id < b.id; });

    std::map<int, const SatelliteState*> state_of;
    for (const auto& s : snap.states) state_of[s.id] = &s;

    for (const auto& au : users) {
        UserProblem up;
        up.user = au.user;
        up.task = au.task;
        VisibilityIndex index;
        for (const auto& w : au.windows) {
            if (!state_of.count(w.satellite_id)) continue;
            index.add(w);
            up.windows.push_back(w);
        }
        const Vec3 site = user_position(au.user);
        CandidateOptions copt = opt.candidates;
        copt.deadline = au.task.deadline;

        for (auto& p : candidate_paths(au.user, snap.paths, snap.graph, index, PathRole::offload, copt)) {
            const double d = (state_of.at(p.source)->position - site).norm();
            up.offload.push_back({std::move(p), d});
        }
        std::vector<Path> offload_paths;
        for (const auto& c : up.offload) offload_paths.push_back(c.path);
        const auto nodes = compute_nodes_of(offload_paths);
        for (auto& p : candidate_paths(au.user, snap.paths, snap.graph, index, PathRole::forward, copt, nodes)) {
            const double d = (state_of.at(p.destination)->position - site).norm();
            up.forward.push_back({std::move(p), d});
        }

        for (int sid : index.satellites()) {
            if (!index.currently_visible(sid)) continue;
            up.budgets.push_back(
                link_budget(au.user, state_of.at(sid)->position, inst.satellite(sid), opt.link, fading(au.user.id, sid)));
        }

        std::vector<RhoMaxTerm> terms;
        for (const auto& c : up.offload) {
            const LinkBudget* lb = up.budget(c.path.source);
            const auto& src = inst.satellite(c.path.source);
            const auto& dst = inst.satellite(c.path.destination);
            if (!lb || lb->per_rb_rate <= 0.0) continue;
            const double rate =
                opt.link.energy_rate_basis == EnergyRateBasis::per_rb ? lb->per_rb_rate : lb->per_rb_rate * src.rb_count;
            terms.push_back({transmit_energy(au.user.transmit_power, au.task.bits, 1.0, rate),
                             computation_energy(opt.link.kappa, au.task.cycles, 1.0, dst.cpu_rate)});
        }
        const RhoMax rm = rho_max(terms);
        up.rho_max = rm.value;
        up.rho_fallback = rm.fallback;
        inst.users.push_back(std::move(up));
    }
    return inst;
}

std::string check_instance(const ProblemInstance& inst)
{
    std::ostringstream err;
    for (std::size_t u = 0; u < inst.users.size(); ++u) {
        const auto& up = inst.users[u];
        if (!(up.task.bits > 0 && up.task.cycles > 0 && up.task.deadline > 0))
            err << "user " << u << ": task fields must be positive\n";
        for (const auto& c : up.offload) {
            if (!inst.has_satellite(c.path.source) || !inst.has_satellite(c.path.destination))
                err << "user " << u << ": offload path " << c.path.id << " references an unknown satellite\n";
            const LinkBudget* lb = up.budget(c.path.source);
            if (!lb) err << "user " << u << ": no link budget for source " << c.path.source << "\n";
            else if (!(lb->per_rb_rate > 0.0) || !std::isfinite(lb->per_rb_rate))
                err << "user " << u << ": non-positive rate to " << c.path.source << "\n";
        }
        for (const auto& c : up.forward)
            if (!inst.has_satellite(c.path.source) || !inst.has_satellite(c.path.destination))
                err << "user " << u << ": forward path " << c.path.id << " references an unknown satellite\n";
    }
    return err.str();
}

// ---- P2 ---------------------------------------------------------------------------

namespace {

struct Coefficients {
    double rate = 0.0;       // r, per resource block
    double tr = 0.0;         // zeta / (B r), multiplies vartheta
    double prop_op = 0.0;    // (d_us + d_k)/c, multiplies i
    double comp = 0.0;       // X / F, multiplies phi
    double e_tr = 0.0;       // transmit energy coefficient (on i or on vartheta)
    bool e_tr_on_theta = false;
    double e_comp = 0.0;     // kappa X F^2, multiplies f^2
    double window_end = 0.0; // current window end of s_k, 0 if not visible
    bool usable = false;
};

Coefficients offload_coefficients(const ProblemInstance& inst, const UserProblem& up, int k)
{
    Coefficients c;
    const auto& cand = up.offload[k];
    const LinkBudget* lb = up.budget(cand.path.source);
    const auto& src = inst.satellite(cand.path.source);
    const auto& dst = inst.satellite(cand.path.destination);
    c.rate = lb ? lb->per_rb_rate : 0.0;
    c.prop_op = (cand.user_distance + cand.path.length) / speed_of_light;
    c.comp = up.task.cycles / dst.cpu_rate;
    c.e_comp = inst.link.kappa * up.task.cycles * dst.cpu_rate * dst.cpu_rate;
    if (const auto* w = up.current_window(cand.path.source)) c.window_end = w->end;
    if (c.rate > 0.0 && std::isfinite(c.rate)) {
        c.tr = up.task.bits / (src.rb_count * c.rate);
        if (inst.link.energy_rate_basis == EnergyRateBasis::per_rb) {
            c.e_tr = up.user.transmit_power * up.task.bits / c.rate;
        } else {
            c.e_tr = up.user.transmit_power * up.task.bits / (src.rb_count * c.rate);
            c.e_tr_on_theta = true;
        }
        c.usable = c.window_end > 0.0;
    }
    return c;
}

struct ForwardCoefficients {
    double prop_fp = 0.0;
    double start = 0.0, end = 0.0;
    bool usable = false;
};

ForwardCoefficients forward_coefficients(const UserProblem& up, int j)
{
    ForwardCoefficients c;
    const auto& cand = up.forward[j];
    c.prop_fp = (cand.path.length + cand.user_distance) / speed_of_light;
    if (const auto* w = up.window_within(cand.path.destination, up.task.deadline)) {
        c.start = std::max(0.0, w->start);
        c.end = w->end;
        c.usable = true;
    }
    return c;
}

} // namespace

bool user_is_servable(const UserProblem& up)
{
    for (std::size_t k = 0; k < up.offload.size(); ++k) {
        if (!up.current_window(up.offload[k].path.source)) continue;
        const LinkBudget* lb = up.budget(up.offload[k].path.source);
        if (!lb || !(lb->per_rb_rate > 0.0)) continue;
        for (int j : up.partners(static_cast<int>(k)))
            if (up.window_within(up.forward[j].path.destination, up.task.deadline)) return true;
    }
    return false;
}

ConvexMIProgram build_p2(const ProblemInstance& inst, const P2Options& opt)
{
    if (!(opt.epsilon1 > 0.0) || !(opt.epsilon2 > 0.0)) throw ConfigError("epsilon1 and epsilon2 must be positive");
    ConvexMIProgram prog;
    prog.options = opt;
    prog.epsilon1 = opt.epsilon1;
    prog.epsilon2 = opt.epsilon2;
    prog.m1 = opt.big_m1 > 0.0 ? opt.big_m1 : 1.0 / opt.epsilon1 + 1.0;
    prog.m2 = opt.big_m2 > 0.0 ? opt.big_m2 : 1.0 / opt.epsilon2 + 1.0;
    if (prog.m1 < 1.0 / opt.epsilon1) throw ConfigError("big_m1 must be at least 1/epsilon1");
    if (prog.m2 < 1.0 / opt.epsilon2) throw ConfigError("big_m2 must be at least 1/epsilon2");
    const double m1 = prog.m1, m2 = prog.m2, e1 = opt.epsilon1, e2 = opt.epsilon2;
    const bool epigraph = opt.perspective;

    auto& m = prog.model;
    std::map<int, std::vector<Term>> bandwidth_rows, compute_rows;

    for (std::size_t u = 0; u < inst.users.size(); ++u) {
        const auto& up = inst.users[u];
        const int uid = static_cast<int>(u);
        const double tau = up.task.deadline;
        const double rho = up.rho_max;
        UserVars vars;
        const int nk = static_cast<int>(up.offload.size());
        const int nj = static_cast<int>(up.forward.size());

        std::vector<Coefficients> oc(nk);
        std::vector<ForwardCoefficients> fc(nj);
        for (int j = 0; j < nj; ++j) fc[j] = forward_coefficients(up, j);
        std::vector<char> y_live(nj, 0);
        for (int k = 0; k < nk; ++k) {
            oc[k] = offload_coefficients(inst, up, k);
            bool partner = false;
            for (int j : up.partners(k))
                if (fc[j].usable) partner = true;
            oc[k].usable = oc[k].usable && partner;
            if (oc[k].usable)
                for (int j : up.partners(k))
                    if (fc[j].usable) y_live[j] = 1;
        }

        for (int k = 0; k < nk; ++k) {
            const auto& c = oc[k];
            const double hi = c.usable ? 1.0 : 0.0;
            double i_cost = 1.0 - inst.alpha2 * c.prop_op / tau;
            if (!c.e_tr_on_theta) i_cost -= inst.alpha1 * c.e_tr / rho;
            double theta_cost = -inst.alpha2 * c.tr / tau;
            if (c.e_tr_on_theta) theta_cost -= inst.alpha1 * c.e_tr / rho;
            vars.i.push_back(m.add_var(0.0, hi, i_cost));
            vars.b.push_back(m.add_var(0.0, hi));
            vars.f.push_back(m.add_var(0.0, hi));
            vars.theta.push_back(m.add_var(-inf, inf, theta_cost));
            vars.phi.push_back(m.add_var(-inf, inf, -inst.alpha2 * c.comp / tau));
            if (epigraph) {
                vars.energy.push_back(m.add_var(0.0, c.e_comp * hi, -inst.alpha1 / rho));
            } else {
                vars.energy.push_back(-1);
                m.concave[vars.f.back()] = inst.alpha1 * c.e_comp / rho;
            }
            prog.binaries.push_back(vars.i.back());
        }
        for (int j = 0; j < nj; ++j) {
            vars.y.push_back(m.add_var(0.0, y_live[j] ? 1.0 : 0.0, -inst.alpha2 * fc[j].prop_fp / tau));
            prog.binaries.push_back(vars.y.back());
        }

        // (1), (2)
        {
            LinearConstraint r1{{}, 1.0, "(1)", uid, -1};
            for (int v : vars.i) r1.terms.push_back({v, 1.0});
            m.linear.push_back(std::move(r1));
            LinearConstraint r2{{}, 1.0, "(2)", uid, -1};
            for (int v : vars.y) r2.terms.push_back({v, 1.0});
            m.linear.push_back(std::move(r2));
        }

        // Uplink-plus-compute time T_u, shared by (15), (17), (18).
        std::vector<Term> t_terms;
        for (int k = 0; k < nk; ++k) {
            t_terms.push_back({vars.theta[k], oc[k].tr});
            t_terms.push_back({vars.i[k], oc[k].prop_op});
            t_terms.push_back({vars.phi[k], oc[k].comp});
        }

        // (15)
        {
            LinearConstraint r{t_terms, tau, "(15)", uid, -1};
            for (int j = 0; j < nj; ++j) r.terms.push_back({vars.y[j], fc[j].prop_fp});
            m.linear.push_back(std::move(r));
        }

        for (int k = 0; k < nk; ++k) {
            const auto& c = oc[k];
            const int i = vars.i[k], b = vars.b[k], f = vars.f[k], th = vars.theta[k], ph = vars.phi[k];
            // (3)
            LinearConstraint r3{{{i, 1.0}}, 0.0, "(3)", uid, k};
            for (int j : up.partners(k)) r3.terms.push_back({vars.y[j], -1.0});
            m.linear.push_back(std::move(r3));
            m.linear.push_back({{{b, 1.0}, {i, -1.0}}, 0.0, "(5)", uid, k});
            m.linear.push_back({{{f, 1.0}, {i, -1.0}}, 0.0, "(8)", uid, k});
            // (16): tr vartheta + i d_us/c <= v_end i
            m.linear.push_back({{{th, c.tr}, {i, up.offload[k].user_distance / speed_of_light - c.window_end}},
                                0.0,
                                "(16)",
                                uid,
                                k});
            m.linear.push_back({{{th, 1.0}, {i, -m1}}, 0.0, "(24)", uid, k});
            m.linear.push_back({{{ph, 1.0}, {i, -m2}}, 0.0, "(26)", uid, k});
            m.linear.push_back({{{th, -1.0}}, 0.0, "(21')", uid, k});
            m.linear.push_back({{{ph, -1.0}}, 0.0, "(23')", uid, k});

            bandwidth_rows[up.offload[k].path.source].push_back({b, 1.0});
            compute_rows[up.offload[k].path.destination].push_back({f, 1.0});

            if (opt.exact) {
                m.cones.push_back({AffineExpr{{{b, 1.0}}, 0.0}, AffineExpr{{{th, 1.0}}, 0.0}, AffineExpr{{{i, 1.0}}, 0.0},
                                   "(21)", uid, k});
                m.cones.push_back({AffineExpr{{{f, 1.0}}, 0.0}, AffineExpr{{{ph, 1.0}}, 0.0}, AffineExpr{{{i, 1.0}}, 0.0},
                                   "(23)", uid, k});
            } else {
                // (b + eps)(vartheta + (1 - i) M) >= 1
                m.cones.push_back({AffineExpr{{{b, 1.0}}, e1}, AffineExpr{{{th, 1.0}, {i, -m1}}, m1}, AffineExpr{{}, 1.0},
                                   "(25)", uid, k});
                m.cones.push_back({AffineExpr{{{f, 1.0}}, e2}, AffineExpr{{{ph, 1.0}, {i, -m2}}, m2}, AffineExpr{{}, 1.0},
                                   "(27)", uid, k});
                if (opt.perspective) {
                    m.cones.push_back({AffineExpr{{{b, 1.0}, {i, e1}}, 0.0}, AffineExpr{{{th, 1.0}}, 0.0},
                                       AffineExpr{{{i, 1.0}}, 0.0}, "(25p)", uid, k});
                    m.cones.push_back({AffineExpr{{{f, 1.0}, {i, e2}}, 0.0}, AffineExpr{{{ph, 1.0}}, 0.0},
                                       AffineExpr{{{i, 1.0}}, 0.0}, "(27p)", uid, k});
                }
            }
            if (epigraph) {
                m.cones.push_back({AffineExpr{{{vars.energy[k], 1.0}}, 0.0}, AffineExpr{{{i, 1.0}}, 0.0},
                                   AffineExpr{{{f, std::sqrt(c.e_comp)}}, 0.0}, "(12p)", uid, k});
            }
        }

        for (int j = 0; j < nj; ++j) {
            const auto& c = fc[j];
            const int y = vars.y[j];
            // (17): T_u + prop_fp y <= v_end y + tau (1 - y)
            LinearConstraint r17{t_terms, tau, "(17)", uid, j};
            r17.terms.push_back({y, c.prop_fp - c.end + tau});
            m.linear.push_back(std::move(r17));
            // (18): v_start y <= T_u
            LinearConstraint r18{{{y, c.start}}, 0.0, "(18)", uid, j};
            for (const auto& t : t_terms) r18.terms.push_back({t.var, -t.coef});
            m.linear.push_back(std::move(r18));
        }
        prog.users.push_back(std::move(vars));
    }

    for (auto& [sid, terms] : bandwidth_rows) m.linear.push_back({std::move(terms), 1.0, "(4)", -1, sid});
    for (auto& [sid, terms] : compute_rows)
        m.linear.push_back({std::move(terms), 1.0 - inst.satellite(sid).occupied_fraction, "(7)", -1, sid});
    return prog;
}

ConstraintCount expected_constraint_count(const ProblemInstance& inst, const P2Options& opt)
{
    ConstraintCount c;
    std::set<int> sources, nodes;
    for (const auto& up : inst.users) {
        const int k = static_cast<int>(up.offload.size());
        const int j = static_cast<int>(up.forward.size());
        c.linear += 3 + 8 * k + 2 * j;
        c.cones += k * (opt.exact ? 2 : (opt.perspective ? 4 : 2)) + (opt.perspective ? k : 0);
        for (const auto& o : up.offload) {
            sources.insert(o.path.source);
            nodes.insert(o.path.destination);
        }
    }
    c.linear += static_cast<int>(sources.size() + nodes.size());
    return c;
}

// ---- solutions -------------------------------------------------------------

std::string_view to_string(SolveStatus s)
{
    switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::gap_limit: return "gap_limit";
    case SolveStatus::time_limit: return "time_limit";
    }
    return "unknown";
}

bool UserSolution::admitted() const { return offload_index() >= 0; }

int UserSolution::offload_index() const
{
    for (std::size_t k = 0; k < i.size(); ++k)
        if (i[k] == 1) return static_cast<int>(k);
    return -1;
}

int UserSolution::forward_index() const
{
    for (std::size_t k = 0; k < y.size(); ++k)
        if (y[k] == 1) return static_cast<int>(k);
    return -1;
}

Solution zero_solution(const ProblemInstance& inst)
{
    Solution s;
    for (const auto& up : inst.users) {
        UserSolution us;
        const auto nk = up.offload.size();
        us.i.assign(nk, 0);
        us.b.assign(nk, 0.0);
        us.f.assign(nk, 0.0);
        us.theta.assign(nk, 0.0);
        us.phi.assign(nk, 0.0);
        us.y.assign(up.forward.size(), 0);
        s.users.push_back(std::move(us));
    }
    return s;
}

Solution extract_solution(const ConvexMIProgram& prog, std::span<const double> x)
{
    Solution s;
    for (const auto& v : prog.users) {
        UserSolution us;
        for (std::size_t k = 0; k < v.i.size(); ++k) {
            us.i.push_back(x[v.i[k]] > 0.5 ? 1 : 0);
            us.b.push_back(x[v.b[k]]);
            us.f.push_back(x[v.f[k]]);
            us.theta.push_back(x[v.theta[k]]);
            us.phi.push_back(x[v.phi[k]]);
        }
        for (int y : v.y) us.y.push_back(x[y] > 0.5 ? 1 : 0);
        s.users.push_back(std::move(us));
    }
    s.objective = prog.model.objective_value(x);
    return s;
}

std::vector<double> to_point(const ConvexMIProgram& prog, const Solution& sol)
{
    std::vector<double> x(prog.model.num_vars, 0.0);
    for (std::size_t u = 0; u < prog.users.size(); ++u) {
        const auto& v = prog.users[u];
        const auto& s = sol.users[u];
        for (std::size_t k = 0; k < v.i.size(); ++k) {
            x[v.i[k]] = s.i[k];
            x[v.b[k]] = s.b[k];
            x[v.f[k]] = s.f[k];
            x[v.theta[k]] = s.theta[k];
            x[v.phi[k]] = s.phi[k];
            if (v.energy[k] >= 0) {
                // smallest feasible epigraph value
                const double c = prog.model.upper[v.energy[k]] > 0.0 ? prog.model.upper[v.energy[k]] : 0.0;
                x[v.energy[k]] = s.i[k] == 1 ? c * s.f[k] * s.f[k] : 0.0;
            }
        }
        for (std::size_t j = 0; j < v.y.size(); ++j) x[v.y[j]] = s.y[j];
    }
    return x;
}

void tighten(Solution& sol, double e1, double e2)
{
    for (auto& us : sol.users)
        for (std::size_t k = 0; k < us.i.size(); ++k) {
            if (us.i[k] == 1) {
                us.theta[k] = 1.0 / (us.b[k] + e1);
                us.phi[k] = 1.0 / (us.f[k] + e2);
            } else {
                us.b[k] = us.f[k] = us.theta[k] = us.phi[k] = 0.0;
            }
        }
}

std::optional<DelayEnergyBreakdown> breakdown(const ProblemInstance& inst, int u, const UserSolution& s)
{
    const int k = s.offload_index();
    const int j = s.forward_index();
    if (k < 0) return std::nullopt;
    const auto& up = inst.users[u];
    const auto& cand = up.offload[k];
    const LinkBudget* lb = up.budget(cand.path.source);
    if (!lb || !(s.b[k] > 0.0) || !(s.f[k] > 0.0)) return std::nullopt;
    const auto& src = inst.satellite(cand.path.source);
    const auto& dst = inst.satellite(cand.path.destination);
    DelayEnergyBreakdown d;
    d.transmission = up.task.bits / (s.b[k] * src.rb_count * lb->per_rb_rate);
    d.computation = up.task.cycles / (s.f[k] * dst.cpu_rate);
    d.propagation_offload = propagation_delay(cand.user_distance + cand.path.length, 1.0);
    if (j >= 0) d.propagation_forward = propagation_delay(up.forward[j].path.length + up.forward[j].user_distance, 1.0);
    const double rate = inst.link.energy_rate_basis == EnergyRateBasis::per_rb
                            ? lb->per_rb_rate
                            : s.b[k] * src.rb_count * lb->per_rb_rate;
    d.transmit_energy = transmit_energy(up.user.transmit_power, up.task.bits, 1.0, rate);
    d.compute_energy = computation_energy(inst.link.kappa, up.task.cycles, s.f[k], dst.cpu_rate);
    return d;
}

double original_objective(const ProblemInstance& inst, const Solution& sol)
{
    double eta = 0.0;
    for (std::size_t u = 0; u < inst.users.size(); ++u) {
        const auto& s = sol.users[u];
        const auto& up = inst.users[u];
        for (int v : s.i) eta += v;
        if (auto d = breakdown(inst, static_cast<int>(u), s)) {
            eta -= inst.alpha1 * d->energy() / up.rho_max;
            eta -= inst.alpha2 * d->delay() / up.task.deadline;
        } else {
            // forwarding without offloading still pays its propagation term
            const int j = s.forward_index();
            if (j >= 0 && s.offload_index() < 0)
                eta -= inst.alpha2 * propagation_delay(up.forward[j].path.length + up.forward[j].user_distance, 1.0) /
                       up.task.deadline;
        }
    }
    return eta;
}

Metrics evaluate_solution(const ProblemInstance& inst, const Solution& sol)
{
    Metrics m;
    m.active_users = static_cast<int>(inst.users.size());
    double delay = 0.0, energy = 0.0;
    for (std::size_t u = 0; u < inst.users.size(); ++u) {
        if (!user_is_servable(inst.users[u])) ++m.blocked_by_coverage;
        const auto d = breakdown(inst, static_cast<int>(u), sol.users[u]);
        if (!d) continue;
        ++m.admitted;
        delay += d->delay();
        energy += d->energy();
    }
    if (m.active_users > 0) m.admission_rate = static_cast<double>(m.admitted) / m.active_users;
    if (m.admitted > 0) {
        m.average_delay = delay / m.admitted;
        m.average_energy = energy / m.admitted;
    }
    m.objective = original_objective(inst, sol);
    return m;
}

} // namespace satedge
