// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <string>

#include "satedge/constants.hpp"
#include "satedge/experiment.hpp"
#include "satedge/link_model.hpp"
#include "satedge/micp_solver.hpp"
#include "satedge/orbital_mechanics.hpp"
#include "support/testkit.hpp"

using namespace satedge;

namespace {

int failures = 0;
std::map<int, std::string> lines;

void verdict(int id, bool ok, const std::string& detail)
{
    char head[64];
    std::snprintf(head, sizeof head, "criterion %d: %s  ", id, ok ? "PASS" : "FAIL");
    lines[id] = head + detail;
    std::printf("%s\n", lines[id].c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

void criterion1()
{
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(20240601);
    int agree = 0, total = 0;
    double worst = 0.0;
    for (int n = 0; n < 60; ++n) {
        testkit::RandomInstanceOptions o;
        o.users = 1 + n % 3;
        const auto inst = testkit::random_instance(rng, o);
        const auto prog = build_p2(inst);
        const auto ref = exhaustive_oracle(prog, inst);
        const auto bb = branch_and_bound(prog);
        const double diff = std::abs(bb.objective - ref.solution.objective) / std::max(1.0, std::abs(ref.solution.objective));
        worst = std::max(worst, diff);
        agree += diff <= 1e-6 && bb.status == SolveStatus::optimal;
        ++total;
    }
    const double sec = seconds_since(t0);
    verdict(1, agree == total && total >= 50 && sec < 300.0,
            fmt("%.0f/%.0f instances within relative 1e-6 (worst %.2e) in %.1f s", agree, total, worst, sec));
}

void criterion6()
{
    const auto cfg = default_experiment_config();
    const auto con = build_constellation(cfg);
    const auto users = place_users(cfg);
    std::mt19937_64 rng(606);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    int compared = 0, ok = 0, per_layer[2] = {0, 0};
    double worst = 0.0;
    for (int attempt = 0; attempt < 4000 && compared < 20; ++attempt) {
        const int layer = compared % 2;
        const auto& el = con.elements[static_cast<std::size_t>(U(rng) * con.elements.size())];
        if (static_cast<int>(el.layer == Layer::meo) != layer) continue;
        const auto& user = users[static_cast<std::size_t>(U(rng) * users.size())];
        VisibilityOptions vo;
        vo.threshold = cfg.thresholds[static_cast<std::size_t>(U(rng) * cfg.thresholds.size())];
        vo.horizon = cfg.horizon;
        vo.step = cfg.visibility_step;
        vo.tolerance = cfg.visibility_tolerance;
        vo.earth_angle_at_origin = con.earth_angle;
        const auto ref = testkit::dense_windows(user, el, vo.threshold, vo.horizon, vo.earth_angle_at_origin, 1.0);
        if (ref.empty()) continue;
        const auto got = visibility_windows(user, el, vo);
        bool pair_ok = got.size() == ref.size();
        for (std::size_t w = 0; pair_ok && w < got.size(); ++w) {
            const double e = std::max(std::abs(got[w].start - ref[w].first), std::abs(got[w].end - ref[w].second));
            worst = std::max(worst, e);
            pair_ok = e <= 0.2;
        }
        ok += pair_ok;
        ++per_layer[layer];
        ++compared;
    }
    verdict(6, compared == 20 && ok == 20 && per_layer[0] > 0 && per_layer[1] > 0,
            fmt("%.0f/%.0f pairs (LEO %.0f, MEO %.0f)", ok, compared, per_layer[0], per_layer[1]) +
                fmt(", worst edge error %.3f s", worst));
}

void criterion7()
{
    int bad = 0, checks = 0;
    auto near = [&](double got, double want) {
        ++checks;
        if (!(std::abs(got - want) <= 1e-9 * std::abs(want))) ++bad;
    };
    const double c = 299792458.0;
    // free-space gain at 550 km, 2 GHz, 5 + 20 dBi
    const double lam = c / 2e9;
    const double g = std::pow(10.0, 2.5) * std::pow(lam / (4.0 * M_PI * 550e3), 2.0);
    near(channel_gain(550e3, 2e9, 5.0, 20.0, 1.0) / g, 1.0);
    const double n0 = std::pow(10.0, (-174.0 - 30.0) / 10.0) * 180e3;
    near(noise_power(-174.0, 180e3) / n0, 1.0);
    near(per_rb_rate(180e3, 0.05, g, n0) / (180e3 * std::log2(1.0 + 0.05 * g / n0)), 1.0);
    // worked examples at the desk parameter set
    near(transmission_delay(1e6, 1.0 / 0.5, 25, 1.8e5), 1e6 / (0.5 * 25 * 1.8e5));
    near(transmit_energy(0.05, 1e6, 1.0, 1e6), 0.05);
    near(transmit_energy(0.05, 2e6, 1.0, 4e5), 0.25);
    near(computation_delay(2e9, 1.0, 1e10), 0.2);
    near(computation_delay(2e9, 4.0, 1e10), 0.8);
    near(computation_energy(1e-28, 2e9, 1.0, 1e10), 20.0);
    near(computation_energy(1e-28, 1e9, 0.5, 1e10), 2.5);
    near(propagation_delay(2100e3, 1.0), 2100e3 / c);
    near(per_rb_rate(180e3, 1.0, 1.0, 1.0), 180e3);
    const auto pd = propagation_delays(1e6, 6e5, 2e6, 7e5, 1.0, 1.0);
    near(pd.offload, 1.6e6 / c);
    near(pd.forward, 2.7e6 / c);
    const RhoMaxTerm terms[] = {{0.3, 2.0}, {1.5, 1.0}};
    near(rho_max(terms).value, 2.5);
    OrbitalElements el;
    el.semi_major_axis = 7e6;
    near(el.period(), 2.0 * M_PI * std::sqrt(7e6 * 7e6 * 7e6 / 3.986004418e14));
    verdict(7, bad == 0, fmt("%.0f/%.0f formula checks at 1e-9", checks - bad, checks));
}

void desk_criteria()
{
    auto cfg = default_experiment_config();
    const auto t0 = std::chrono::steady_clock::now();
    const auto res = run_experiment(cfg, [](int d, int t) { std::fprintf(stderr, "desk realization %d/%d\n", d, t); });
    const double wall = seconds_since(t0);
    std::printf("%s", report(res.table).c_str());

    int audit_bad = 0, recip_bad = 0, n = 0;
    double worst_recip = 0.0, worst_res = 0.0;
    std::map<std::pair<int, double>, std::map<ScenarioMode, double>> obj;
    for (const auto& r : res.records) {
        ++n;
        audit_bad += !r.audit_feasible;
        worst_recip = std::max(worst_recip, r.reciprocal_error);
        worst_res = std::max(worst_res, r.inactive_residual);
        recip_bad += r.reciprocal_error > 1e-6 || r.inactive_residual > cfg.solver.abs_feas_tol;
        obj[{r.realization, r.threshold}][r.mode] = r.objective;
    }
    verdict(2, audit_bad == 0, fmt("%.0f/%.0f incumbents pass the audit", n - audit_bad, n));

    int dom_bad = 0;
    double worst_dom = 0.0;
    for (const auto& [key, m] : obj) {
        const double single = std::max(m.at(ScenarioMode::leo_only), m.at(ScenarioMode::meo_only));
        worst_dom = std::max(worst_dom, single - m.at(ScenarioMode::hybrid));
        dom_bad += m.at(ScenarioMode::hybrid) < single - 1e-6;
    }
    verdict(3, dom_bad == 0,
            fmt("%.0f/%.0f realizations dominated, worst shortfall %.2e", obj.size() - dom_bad, obj.size(), worst_dom));

    const auto& t = res.table;
    auto adm = [&](ScenarioMode m, double thr) { return t.find(m, thr)->admission_rate_mean.value_or(0.0); };
    const double lo = cfg.thresholds.front(), hi = cfg.thresholds.back();
    bool a = true;
    for (double thr : cfg.thresholds) a = a && adm(ScenarioMode::hybrid, thr) >= adm(ScenarioMode::leo_only, thr);
    const double gap_hi = adm(ScenarioMode::hybrid, hi) - adm(ScenarioMode::leo_only, hi);
    const double gap_lo = adm(ScenarioMode::hybrid, lo) - adm(ScenarioMode::leo_only, lo);
    a = a && gap_hi > 0.0 && gap_hi > gap_lo;
    const auto dl = t.find(ScenarioMode::leo_only, hi)->avg_delay_mean;
    const auto dh = t.find(ScenarioMode::hybrid, hi)->avg_delay_mean;
    const bool b = dl && dh && *dl >= *dh;
    bool c = true;
    for (double thr : cfg.thresholds)
        if (thr <= 20.0) c = c && adm(ScenarioMode::meo_only, thr) <= adm(ScenarioMode::leo_only, thr);
    const bool fast = wall < 1800.0;
    verdict(4, a && b && c && fast,
            std::string("(a) ") + (a ? "ok" : "no") +
                fmt(" gap@%.0f=%.4f gap@%.0f=%.4f; ", hi, gap_hi, lo, gap_lo) + "(b) " + (b ? "ok" : "no") +
                fmt(" delay leo %.4f hybrid %.4f; ", dl.value_or(NAN), dh.value_or(NAN)) + "(c) " +
                (c ? "ok" : "no") + fmt("; runtime %.0f s", wall));

    verdict(5, recip_bad == 0,
            fmt("%.0f/%.0f records, worst reciprocal error %.2e, worst inactive residual %.2e", n - recip_bad, n,
                worst_recip, worst_res));
}

void criterion8()
{
    auto cfg = default_experiment_config();
    cfg.realizations = 4;
    const std::string first = to_csv(run_experiment(cfg).table);
    const std::string second = to_csv(run_experiment(cfg).table);
    cfg.workers = 3;
    const std::string threaded = to_csv(run_experiment(cfg).table);
    verdict(8, first == second && first == threaded,
            std::string("repeat ") + (first == second ? "identical" : "differs") + ", 1 vs 3 workers " +
                (first == threaded ? "identical" : "differs"));
}

} // namespace

int main()
{
    criterion1();
    criterion6();
    criterion7();
    criterion8();
    desk_criteria();
    std::printf("\nsummary\n");
    for (const auto& [id, line] : lines) std::printf("%s\n", line.c_str());
    std::printf("%s\n", failures == 0 ? "ALL PASS" : "SOME CRITERIA FAILED");
    return failures == 0 ? 0 : 1;
}
