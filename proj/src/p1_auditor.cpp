#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "satedge/constants.hpp"
#include "satedge/offload_problem.hpp"

namespace satedge {

std::string AuditReport::summary() const
{
    std::ostringstream out;
    if (violations.empty()) {
        out << "feasible: " << margins.size() << " constraints checked, 0 violations";
        return out.str();
    }
    out << violations.size() << " violation(s):";
    for (const auto& v : violations) {
        out << "\n  " << v.tag;
        if (v.user >= 0) out << " user " << v.user;
        if (v.index >= 0) out << (v.user >= 0 ? " candidate " : " satellite ") << v.index;
        out << " margin " << v.margin;
        if (!v.detail.empty()) out << " (" << v.detail << ")";
    }
    return out.str();
}

AuditReport audit_p1(const ProblemInstance& inst, const Solution& sol, double tol)
{
    AuditReport rep;
    auto check = [&](std::string tag, int user, int index, double margin, std::string detail = {}) {
        AuditEntry e{std::move(tag), user, index, margin, std::move(detail)};
        if (!(margin >= -tol)) rep.violations.push_back(e);
        rep.margins.push_back(std::move(e));
    };

    if (sol.users.size() != inst.users.size()) {
        check("shape", -1, -1, -1.0, "solution has " + std::to_string(sol.users.size()) + " users, instance " +
                                         std::to_string(inst.users.size()));
        return rep;
    }

    std::map<int, double> bandwidth, compute;
    for (std::size_t uu = 0; uu < inst.users.size(); ++uu) {
        const int u = static_cast<int>(uu);
        const auto& up = inst.users[uu];
        const auto& s = sol.users[uu];
        const int nk = static_cast<int>(up.offload.size());
        const int nj = static_cast<int>(up.forward.size());
        if (static_cast<int>(s.i.size()) != nk || static_cast<int>(s.y.size()) != nj ||
            static_cast<int>(s.b.size()) != nk || static_cast<int>(s.f.size()) != nk) {
            check("shape", u, -1, -1.0, "candidate count mismatch");
            continue;
        }
        for (int k = 0; k < nk; ++k) {
            if (s.i[k] != 0 && s.i[k] != 1) check("binary", u, k, -1.0, "i not in {0,1}");
            check("bounds b", u, k, std::min(s.b[k], 1.0 - s.b[k]));
            check("bounds f", u, k, std::min(s.f[k], 1.0 - s.f[k]));
        }
        for (int j = 0; j < nj; ++j)
            if (s.y[j] != 0 && s.y[j] != 1) check("binary", u, j, -1.0, "y not in {0,1}");

        int sum_i = 0, sum_y = 0;
        for (int v : s.i) sum_i += v;
        for (int v : s.y) sum_y += v;
        check("(1)", u, -1, 1.0 - sum_i);
        check("(2)", u, -1, 1.0 - sum_y);

        // Per-candidate delay components with the original reciprocals.
        std::vector<double> tr(nk, 0.0), comp(nk, 0.0), prop_op(nk, 0.0);
        bool division_ok = true;
        for (int k = 0; k < nk; ++k) {
            const auto& cand = up.offload[k];
            int partners = 0;
            for (int j : up.partners(k)) partners += s.y[j];
            check("(3)", u, k, partners - s.i[k]);
            check("(5)", u, k, s.i[k] - s.b[k]);
            check("(8)", u, k, s.i[k] - s.f[k]);
            bandwidth[cand.path.source] += s.b[k];
            compute[cand.path.destination] += s.f[k];
            if (s.i[k] != 1) continue;
            const LinkBudget* lb = up.budget(cand.path.source);
            const double rate = lb ? lb->per_rb_rate : 0.0;
            if (!(s.b[k] > 0.0) || !(rate > 0.0)) {
                check("(9)", u, k, -1.0, "offloaded with zero rate allocation");
                division_ok = false;
                continue;
            }
            if (!(s.f[k] > 0.0)) {
                check("(11)", u, k, -1.0, "offloaded with zero computing allocation");
                division_ok = false;
                continue;
            }
            const auto& src = inst.satellite(cand.path.source);
            const auto& dst = inst.satellite(cand.path.destination);
            tr[k] = up.task.bits / (s.b[k] * src.rb_count * rate);
            comp[k] = up.task.cycles / (s.f[k] * dst.cpu_rate);
            prop_op[k] = propagation_delay(cand.user_distance + cand.path.length, 1.0);
        }
        if (!division_ok) continue;

        double uplink = 0.0; // sum over k of tr + prop_op + comp
        for (int k = 0; k < nk; ++k) uplink += tr[k] + prop_op[k] + comp[k];
        double prop_fp_total = 0.0;
        std::vector<double> prop_fp(nj, 0.0);
        for (int j = 0; j < nj; ++j) {
            prop_fp[j] = propagation_delay(up.forward[j].path.length + up.forward[j].user_distance, s.y[j]);
            prop_fp_total += prop_fp[j];
        }
        check("(15)", u, -1, up.task.deadline - uplink - prop_fp_total);

        for (int k = 0; k < nk; ++k) {
            if (s.i[k] != 1) continue;
            const auto* w = up.current_window(up.offload[k].path.source);
            const double v_end = w ? w->end : 0.0;
            check("(16)", u, k, v_end - tr[k] - up.offload[k].user_distance / speed_of_light,
                  w ? "" : "access satellite not visible");
        }
        for (int j = 0; j < nj; ++j) {
            if (s.y[j] != 1) continue;
            const auto* w = up.window_within(up.forward[j].path.destination, up.task.deadline);
            if (!w) {
                check("(17)", u, j, -1.0, "forwarding destination never visible");
                continue;
            }
            check("(17)", u, j, w->end - uplink - prop_fp[j]);
            check("(18)", u, j, uplink - std::max(0.0, w->start));
        }
    }
    for (const auto& [sid, total] : bandwidth) check("(4)", -1, sid, 1.0 - total);
    for (const auto& [sid, total] : compute) check("(7)", -1, sid, 1.0 - inst.satellite(sid).occupied_fraction - total);
    rep.objective = original_objective(inst, sol);
    return rep;
}

} // namespace satedge
