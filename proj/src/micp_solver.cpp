#include "satedge/micp_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace satedge {

namespace {

constexpr double integrality_tol = 1e-6;

double gap_scale(double incumbent) { return std::max(1.0, std::abs(incumbent)); }

RelaxedSolution from_engine(const EngineResult& r)
{
    RelaxedSolution s;
    s.status = r.status;
    s.x = r.x;
    s.objective = r.objective;
    s.upper_bound = r.upper_bound;
    s.max_violation = r.max_violation;
    s.complementarity = r.complementarity;
    s.min_infeasibility = r.min_infeasibility;
    return s;
}

/// Most fractional free binary, ties by smallest position; -1 when integral.
int most_fractional(const ConvexMIProgram& prog, std::span<const double> x, std::span<const std::int8_t> fix)
{
    int best = -1;
    double best_score = integrality_tol;
    for (std::size_t p = 0; p < prog.binaries.size(); ++p) {
        if (fix[p] >= 0) continue;
        const double v = x[prog.binaries[p]];
        const double score = std::min(v, 1.0 - v);
        if (score > best_score) {
            best_score = score;
            best = static_cast<int>(p);
        }
    }
    return best;
}

struct PseudoCosts {
    std::vector<double> down_sum, up_sum;
    std::vector<int> down_n, up_n;

    explicit PseudoCosts(std::size_t n) : down_sum(n, 0.0), up_sum(n, 0.0), down_n(n, 0), up_n(n, 0) {}

    void record(int p, int dir, double frac, double degradation)
    {
        const double unit = degradation / std::max(frac, 1e-9);
        if (dir == 0) {
            down_sum[p] += unit;
            ++down_n[p];
        } else {
            up_sum[p] += unit;
            ++up_n[p];
        }
    }

    int select(const ConvexMIProgram& prog, std::span<const double> x, std::span<const std::int8_t> fix) const
    {
        int best = -1;
        double best_score = -1.0;
        for (std::size_t p = 0; p < prog.binaries.size(); ++p) {
            if (fix[p] >= 0) continue;
            const double v = x[prog.binaries[p]];
            if (std::min(v, 1.0 - v) <= integrality_tol) continue;
            if (down_n[p] == 0 || up_n[p] == 0) return most_fractional(prog, x, fix);
            const double d = std::max(1e-6, v * down_sum[p] / down_n[p]);
            const double u = std::max(1e-6, (1.0 - v) * up_sum[p] / up_n[p]);
            const double score = d * u;
            if (score > best_score) {
                best_score = score;
                best = static_cast<int>(p);
            }
        }
        return best;
    }
};

} // namespace

RelaxedSolution solve_relaxation(const ConvexMIProgram& prog, std::span<const std::int8_t> fix, const SolverConfig& cfg)
{
    ConicModel model = prog.model;
    for (std::size_t p = 0; p < prog.binaries.size() && p < fix.size(); ++p) {
        if (fix[p] < 0) continue;
        const int v = prog.binaries[p];
        const double val = fix[p];
        if (val < model.lower[v] || val > model.upper[v]) {
            RelaxedSolution s;
            s.status = EngineStatus::infeasible;
            s.min_infeasibility = 1.0;
            return s;
        }
        model.lower[v] = model.upper[v] = val;
    }
    EngineOptions eopt = cfg.engine;
    eopt.feasibility_tolerance = cfg.abs_feas_tol;
    return from_engine(solve_conic(model, eopt));
}

Fixings round_all(const ConvexMIProgram& prog, std::span<const double> x)
{
    Fixings f(prog.binaries.size());
    for (std::size_t p = 0; p < prog.binaries.size(); ++p) f[p] = x[prog.binaries[p]] > 0.5 ? 1 : 0;
    return f;
}

std::optional<HeuristicResult> rounding_heuristic(const RelaxedSolution& relaxed, const ConvexMIProgram& prog,
                                                  const SolverConfig& cfg)
{
    if (relaxed.status != EngineStatus::optimal || relaxed.x.empty()) return std::nullopt;
    const auto& x = relaxed.x;
    const Fixings none(prog.binaries.size(), -1);
    if (most_fractional(prog, x, none) < 0) return HeuristicResult{x, relaxed.objective};

    // positions of i and y binaries per user
    std::map<int, int> position;
    for (std::size_t p = 0; p < prog.binaries.size(); ++p) position[prog.binaries[p]] = static_cast<int>(p);

    struct Pick {
        double value;
        int user, k;
    };
    std::vector<Pick> picks;
    for (std::size_t u = 0; u < prog.users.size(); ++u)
        for (std::size_t k = 0; k < prog.users[u].i.size(); ++k) {
            const double v = x[prog.users[u].i[k]];
            if (v > 1e-3 && prog.model.upper[prog.users[u].i[k]] > 0.0)
                picks.push_back({v, static_cast<int>(u), static_cast<int>(k)});
        }
    std::stable_sort(picks.begin(), picks.end(), [](const Pick& a, const Pick& b) { return a.value > b.value; });

    Fixings current(prog.binaries.size(), 0);
    HeuristicResult best{std::vector<double>(prog.model.num_vars, 0.0), 0.0};
    best.objective = prog.model.objective_value(best.x);
    std::vector<char> user_done(prog.users.size(), 0);

    for (const auto& pick : picks) {
        if (user_done[pick.user]) continue;
        const auto& uv = prog.users[pick.user];
        // forwarding partners are the y's appearing with -1 in this candidate's (3) row
        std::vector<std::pair<double, int>> partners;
        for (const auto& row : prog.model.linear) {
            if (row.tag != "(3)" || row.user != pick.user || row.index != pick.k) continue;
            for (const auto& t : row.terms)
                if (t.coef < 0.0 && prog.model.upper[t.var] > 0.0) partners.push_back({-x[t.var], t.var});
            break;
        }
        std::stable_sort(partners.begin(), partners.end());
        int tries = 0;
        for (const auto& [neg, yvar] : partners) {
            if (++tries > 2) break;
            Fixings trial = current;
            trial[position[uv.i[pick.k]]] = 1;
            trial[position[yvar]] = 1;
            const auto r = solve_relaxation(prog, trial, cfg);
            if (r.status == EngineStatus::optimal && r.objective > best.objective) {
                current = std::move(trial);
                best = {r.x, r.objective};
                user_done[pick.user] = 1;
                break;
            }
        }
    }
    return best;
}

Solution branch_and_bound(const ConvexMIProgram& prog, const SolverConfig& cfg, std::ostream* trace, BBStats* stats,
                          std::span<const Fixings> starts)
{
    const auto t_start = std::chrono::steady_clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count(); };
    const std::size_t nb = prog.binaries.size();

    BBStats local;
    BBStats& st = stats ? *stats : local;
    st = BBStats{};

    std::vector<double> inc_x(prog.model.num_vars, 0.0);
    double incumbent = prog.model.objective_value(inc_x);
    if (prog.model.max_violation(inc_x) > cfg.abs_feas_tol) incumbent = -std::numeric_limits<double>::infinity();

    auto fmt = [](double v) {
        std::ostringstream s;
        s << std::setprecision(10) << v;
        return s.str();
    };
    auto log = [&](const BBNode& n, double bound, const std::string& decision) {
        if (!trace) return;
        *trace << "node=" << n.id << " depth=" << n.depth << " parent=" << n.parent << " bound=" << fmt(bound)
               << " incumbent=" << fmt(incumbent) << " decision=" << decision << "\n";
    };

    auto worse = [](const BBNode& a, const BBNode& b) {
        if (a.bound != b.bound) return a.bound < b.bound;
        return a.id > b.id;
    };
    std::priority_queue<BBNode, std::vector<BBNode>, decltype(worse)> open(worse);
    PseudoCosts pc(nb);
    long next_id = 0;
    open.push(BBNode{next_id++, -1, 0, Fixings(nb, -1), std::numeric_limits<double>::infinity()});

    SolveStatus status = SolveStatus::optimal;
    double open_bound_at_stop = -std::numeric_limits<double>::infinity();

    auto try_incumbent = [&](const Fixings& f) {
        const auto r = solve_relaxation(prog, f, cfg);
        if (r.status == EngineStatus::optimal && r.objective > incumbent) {
            incumbent = r.objective;
            inc_x = r.x;
            return true;
        }
        return false;
    };
    for (const auto& f : starts)
        if (f.size() == nb) try_incumbent(f);

    while (!open.empty()) {
        if (st.nodes >= cfg.max_bb_nodes) {
            status = SolveStatus::gap_limit;
            break;
        }
        if (cfg.time_limit > 0.0 && elapsed() > cfg.time_limit) {
            status = SolveStatus::time_limit;
            break;
        }
        BBNode node = open.top();
        open.pop();
        const double tol = cfg.rel_gap_tol * gap_scale(incumbent);
        if (node.bound <= incumbent + tol) {
            ++st.pruned_bound;
            log(node, node.bound, "pruned_bound");
            continue;
        }
        ++st.nodes;
        const auto r = solve_relaxation(prog, node.fixings, cfg);
        if (r.status == EngineStatus::infeasible) {
            ++st.pruned_infeasible;
            log(node, node.bound, "infeasible");
            continue;
        }
        if (r.status == EngineStatus::iteration_limit) {
            // no certified bound: keep the parent's and branch on the first free binary
            ++st.limit_nodes;
            int p = -1;
            for (std::size_t q = 0; q < nb; ++q)
                if (node.fixings[q] < 0) {
                    p = static_cast<int>(q);
                    break;
                }
            if (p < 0) {
                log(node, node.bound, "limit_leaf");
                continue;
            }
            log(node, node.bound, "limit_branch:" + std::to_string(p));
            for (int dir = 0; dir <= 1; ++dir) {
                BBNode child{next_id++, node.id, node.depth + 1, node.fixings, node.bound};
                child.fixings[p] = static_cast<std::int8_t>(dir);
                open.push(std::move(child));
            }
            continue;
        }
        const double bound = std::min(node.bound, r.upper_bound);
        if (node.id == 0) st.root_bound = bound;
        if (node.id == 0 && cfg.root_rounding) {
            if (auto h = rounding_heuristic(r, prog, cfg)) {
                st.heuristic_objective = h->objective;
                if (h->objective > incumbent && prog.model.max_violation(h->x) <= 10 * cfg.abs_feas_tol) {
                    // re-solve with the rounded fixings for a clean point
                    const auto clean = solve_relaxation(prog, round_all(prog, h->x), cfg);
                    if (clean.status == EngineStatus::optimal) {
                        if (clean.objective > incumbent) {
                            incumbent = clean.objective;
                            inc_x = clean.x;
                        }
                    } else {
                        incumbent = h->objective;
                        inc_x = h->x;
                    }
                }
            }
        }
        if (bound <= incumbent + cfg.rel_gap_tol * gap_scale(incumbent)) {
            ++st.pruned_bound;
            log(node, bound, "pruned_bound");
            continue;
        }
        const int p = cfg.branching == BranchingRule::pseudo_cost ? pc.select(prog, r.x, node.fixings)
                                                                   : most_fractional(prog, r.x, node.fixings);
        if (p < 0) {
            const bool improved = try_incumbent(round_all(prog, r.x));
            log(node, bound, improved ? "integral_incumbent" : "integral");
            continue;
        }
        const double v = r.x[prog.binaries[p]];
        log(node, bound, "branch:" + std::to_string(p) + "=" + fmt(v));
        for (int dir = 0; dir <= 1; ++dir) {
            BBNode child{next_id++, node.id, node.depth + 1, node.fixings, bound};
            child.fixings[p] = static_cast<std::int8_t>(dir);
            if (cfg.branching == BranchingRule::pseudo_cost) {
                // children are probed eagerly so the costs exist before selection
                const auto cr = solve_relaxation(prog, child.fixings, cfg);
                if (cr.status == EngineStatus::optimal) {
                    pc.record(p, dir, dir == 0 ? v : 1.0 - v, std::max(0.0, bound - cr.upper_bound));
                    child.bound = std::min(bound, cr.upper_bound);
                } else if (cr.status == EngineStatus::infeasible) {
                    continue;
                }
            }
            open.push(std::move(child));
        }
    }
    while (!open.empty()) {
        open_bound_at_stop = std::max(open_bound_at_stop, open.top().bound);
        open.pop();
    }

    Solution sol = extract_solution(prog, inc_x);
    sol.objective = incumbent;
    sol.bound = std::max(incumbent, open_bound_at_stop);
    if (status == SolveStatus::optimal && sol.bound > incumbent + cfg.rel_gap_tol * gap_scale(incumbent))
        status = SolveStatus::gap_limit;
    sol.status = status;
    sol.nodes = st.nodes;
    st.incumbent_x = inc_x;
    return sol;
}

OracleResult exhaustive_oracle(const ConvexMIProgram& prog, const ProblemInstance& inst, const SolverConfig& cfg)
{
    if (static_cast<int>(inst.users.size()) > oracle_max_users)
        throw std::invalid_argument("exhaustive_oracle: more than 4 users");
    for (const auto& up : inst.users)
        if (static_cast<int>(up.offload.size()) > oracle_max_candidates ||
            static_cast<int>(up.forward.size()) > oracle_max_candidates)
            throw std::invalid_argument("exhaustive_oracle: more than 4 candidates per role");

    std::map<int, int> position;
    for (std::size_t p = 0; p < prog.binaries.size(); ++p) position[prog.binaries[p]] = static_cast<int>(p);

    // per user: list of (k, j) options, (-1, -1) = not offloaded
    std::vector<std::vector<std::pair<int, int>>> options(inst.users.size());
    for (std::size_t u = 0; u < inst.users.size(); ++u) {
        options[u].push_back({-1, -1});
        for (std::size_t k = 0; k < inst.users[u].offload.size(); ++k)
            for (int j : inst.users[u].partners(static_cast<int>(k))) options[u].push_back({static_cast<int>(k), j});
    }

    OracleResult best;
    best.x.assign(prog.model.num_vars, 0.0);
    double best_obj = -std::numeric_limits<double>::infinity();
    std::vector<std::size_t> choice(inst.users.size(), 0);
    for (;;) {
        Fixings fix(prog.binaries.size(), 0);
        for (std::size_t u = 0; u < inst.users.size(); ++u) {
            const auto [k, j] = options[u][choice[u]];
            if (k < 0) continue;
            fix[position[prog.users[u].i[k]]] = 1;
            fix[position[prog.users[u].y[j]]] = 1;
        }
        ++best.assignments;
        const auto r = solve_relaxation(prog, fix, cfg);
        if (r.status == EngineStatus::optimal && r.objective > best_obj) {
            best_obj = r.objective;
            best.x = r.x;
        }
        std::size_t u = 0;
        while (u < choice.size() && ++choice[u] == options[u].size()) choice[u++] = 0;
        if (u == choice.size()) break;
    }
    best.solution = extract_solution(prog, best.x);
    best.solution.objective = best_obj;
    best.solution.bound = best_obj;
    best.solution.status = SolveStatus::optimal;
    return best;
}

RepairResult audit_and_repair(const ProblemInstance& inst, const ConvexMIProgram& prog, const Solution& sol,
                              const SolverConfig& cfg)
{
    RepairResult out;
    out.tightened = sol;
    tighten(out.tightened, prog.epsilon1, prog.epsilon2);
    out.audit = audit_p1(inst, out.tightened);
    out.final = out.tightened;
    if (out.audit.feasible()) return out;

    out.exact_resolve = true;
    P2Options exact = prog.options;
    exact.exact = true;
    const ConvexMIProgram ex = build_p2(inst, exact);
    std::map<int, int> position;
    for (std::size_t p = 0; p < ex.binaries.size(); ++p) position[ex.binaries[p]] = static_cast<int>(p);

    Solution current = out.tightened;
    for (std::size_t attempt = 0; attempt <= inst.users.size(); ++attempt) {
        Fixings fix(ex.binaries.size(), 0);
        for (std::size_t u = 0; u < current.users.size(); ++u) {
            const int k = current.users[u].offload_index();
            const int j = current.users[u].forward_index();
            if (k < 0 || j < 0) continue;
            fix[position[ex.users[u].i[k]]] = 1;
            fix[position[ex.users[u].y[j]]] = 1;
        }
        const auto r = solve_relaxation(ex, fix, cfg);
        Solution candidate = current;
        if (r.status == EngineStatus::optimal) {
            candidate = extract_solution(ex, r.x);
            for (auto& us : candidate.users)
                for (std::size_t k = 0; k < us.i.size(); ++k) {
                    if (us.i[k] == 1) {
                        us.b[k] = 1.0 / us.theta[k];
                        us.f[k] = 1.0 / us.phi[k];
                    } else {
                        us.b[k] = us.f[k] = us.theta[k] = us.phi[k] = 0.0;
                    }
                }
            candidate.status = sol.status;
            candidate.bound = sol.bound;
            candidate.nodes = sol.nodes;
            auto rep = audit_p1(inst, candidate);
            if (rep.feasible()) {
                candidate.objective = rep.objective;
                out.final = std::move(candidate);
                out.audit = std::move(rep);
                return out;
            }
        }
        // demote the last admitted user named by a violation, else the last admitted user
        int victim = -1;
        const auto rep = audit_p1(inst, candidate);
        for (const auto& v : rep.violations)
            if (v.user >= 0 && current.users[v.user].admitted()) victim = std::max(victim, v.user);
        if (victim < 0)
            for (std::size_t u = 0; u < current.users.size(); ++u)
                if (current.users[u].admitted()) victim = static_cast<int>(u);
        if (victim < 0) break;
        auto& vu = current.users[victim];
        std::fill(vu.i.begin(), vu.i.end(), 0);
        std::fill(vu.y.begin(), vu.y.end(), 0);
        ++out.demoted;
    }
    out.final = zero_solution(inst);
    out.final.status = sol.status;
    out.audit = audit_p1(inst, out.final);
    return out;
}

Fixings transfer_assignment(const ProblemInstance& from, const Solution& solution, const ProblemInstance& to,
                            const ConvexMIProgram& program)
{
    if (from.users.size() != to.users.size() || solution.users.size() != from.users.size()) return {};
    std::vector<int> position(program.model.num_vars, -1);
    for (std::size_t q = 0; q < program.binaries.size(); ++q) position[program.binaries[q]] = static_cast<int>(q);
    Fixings fix(program.binaries.size(), 0);

    auto same = [](const Path& a, const Path& b) { return a.source == b.source && a.destination == b.destination; };
    for (std::size_t u = 0; u < from.users.size(); ++u) {
        const auto& src = from.users[u];
        const auto& dst = to.users[u];
        if (src.user.id != dst.user.id) return {};
        const auto& us = solution.users[u];
        if (!us.admitted()) continue;
        const int k = us.offload_index();
        const int j = us.forward_index();
        int k2 = -1, j2 = -1;
        for (std::size_t c = 0; c < dst.offload.size(); ++c)
            if (same(dst.offload[c].path, src.offload[k].path)) k2 = static_cast<int>(c);
        for (std::size_t c = 0; c < dst.forward.size(); ++c)
            if (same(dst.forward[c].path, src.forward[j].path)) j2 = static_cast<int>(c);
        if (k2 < 0 || j2 < 0) return {};
        const int pi = position[program.users[u].i[k2]];
        const int py = position[program.users[u].y[j2]];
        if (pi < 0 || py < 0) return {};
        fix[pi] = 1;
        fix[py] = 1;
    }
    return fix;
}

} // namespace satedge
