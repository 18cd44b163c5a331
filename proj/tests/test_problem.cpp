#include <doctest.h>

#include <map>
#include <random>
#include <set>

#include "satedge/constants.hpp"
#include "satedge/instance_io.hpp"
#include "satedge/micp_solver.hpp"
#include "support/testkit.hpp"

using namespace satedge;

namespace {

Fixings fix_all(const ConvexMIProgram& prog, std::int8_t v) { return Fixings(prog.binaries.size(), v); }

int binary_position(const ConvexMIProgram& prog, int var)
{
    for (std::size_t q = 0; q < prog.binaries.size(); ++q)
        if (prog.binaries[q] == var) return static_cast<int>(q);
    return -1;
}

} // namespace

TEST_CASE("p2: empty instance")
{
    ProblemInstance inst;
    const auto prog = build_p2(inst);
    CHECK(prog.model.num_vars == 0);
    CHECK(prog.binaries.empty());
    const auto sol = branch_and_bound(prog);
    CHECK(sol.status == SolveStatus::optimal);
    CHECK(sol.objective == 0.0);
    const auto m = evaluate_solution(inst, zero_solution(inst));
    CHECK(m.active_users == 0);
    CHECK_FALSE(m.admission_rate.has_value());
    CHECK(m.objective == 0.0);
}

TEST_CASE("p2: emitted rows and cones follow the per-user count")
{
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        testkit::RandomInstanceOptions o;
        o.users = 1 + trial % 4;
        const auto inst = testkit::random_instance(rng, o);
        for (bool persp : {true, false}) {
            P2Options opt;
            opt.perspective = persp;
            const auto prog = build_p2(inst, opt);
            int rows = 0, cones = 0;
            std::set<int> sources, nodes;
            for (const auto& up : inst.users) {
                const int k = static_cast<int>(up.offload.size());
                const int j = static_cast<int>(up.forward.size());
                // (1) (2) (15); per offload candidate (3) (5) (8) (16) (24) (26) (21') (23'); per forward (17) (18)
                rows += 3 + 8 * k + 2 * j;
                // (25) (27), plus (25p) (27p) (12p) with perspective
                cones += k * (persp ? 5 : 2);
                for (const auto& c : up.offload) {
                    sources.insert(c.path.source);
                    nodes.insert(c.path.destination);
                }
            }
            rows += static_cast<int>(sources.size() + nodes.size());
            CHECK(static_cast<int>(prog.model.linear.size()) == rows);
            CHECK(static_cast<int>(prog.model.cones.size()) == cones);
            const auto ec = expected_constraint_count(inst, opt);
            CHECK(ec.linear == rows);
            CHECK(ec.cones == cones);

            std::map<std::string, int> tags;
            for (const auto& r : prog.model.linear) ++tags[r.tag];
            CHECK(tags["(4)"] == static_cast<int>(sources.size()));
            CHECK(tags["(7)"] == static_cast<int>(nodes.size()));
            CHECK(tags["(1)"] == static_cast<int>(inst.users.size()));
        }
    }
}

TEST_CASE("p2: disjunction logic on a single path")
{
    const auto inst = testkit::single_path_instance();
    const auto prog = build_p2(inst);
    const auto& v = prog.users[0];

    const auto on = solve_relaxation(prog, fix_all(prog, 1));
    REQUIRE(on.status == EngineStatus::optimal);
    const double b = on.x[v.b[0]], f = on.x[v.f[0]];
    CHECK(on.x[v.theta[0]] >= 1.0 / (b + prog.epsilon1) - 1e-6);
    CHECK(on.x[v.phi[0]] >= 1.0 / (f + prog.epsilon2) - 1e-6);

    const auto off = solve_relaxation(prog, fix_all(prog, 0));
    REQUIRE(off.status == EngineStatus::optimal);
    for (int var : {v.b[0], v.f[0], v.theta[0], v.phi[0]}) CHECK(std::abs(off.x[var]) < 1e-7);
    CHECK(std::abs(off.objective) < 1e-7);
}

TEST_CASE("audit: zero solution, slack single user, and an over-allocated satellite")
{
    const auto inst = testkit::single_path_instance();
    const auto zero = audit_p1(inst, zero_solution(inst));
    CHECK(zero.feasible());
    CHECK(zero.objective == 0.0);

    Solution s = zero_solution(inst);
    s.users[0].i[0] = 1;
    s.users[0].y[0] = 1;
    s.users[0].b[0] = 1.0;
    s.users[0].f[0] = 1.0;
    tighten(s, 1e-4, 1e-4);
    const auto ok = audit_p1(inst, s);
    CHECK(ok.feasible());
    for (const auto& e : ok.margins)
        if (e.tag == "(15)") CHECK(e.margin > 0.0);

    s.users[0].b[0] = 1.3;
    const auto bad = audit_p1(inst, s);
    REQUIRE_FALSE(bad.feasible());
    bool named = false;
    for (const auto& e : bad.violations) named = named || (e.tag == "(4)" && e.index == 1);
    CHECK(named);
    CHECK(bad.summary().find("(4)") != std::string::npos);
}

TEST_CASE("metrics: three-user hand instance")
{
    ProblemInstance inst;
    for (int s = 0; s < 3; ++s) {
        SatelliteResources r;
        r.id = s;
        r.rb_count = 25;
        r.cpu_rate = 5e9;
        inst.satellites.push_back(r);
    }
    const double rate = 2e5;
    for (int u = 0; u < 3; ++u) {
        UserProblem up;
        up.user.id = u;
        up.user.transmit_power = 0.05;
        up.task = {u, 1e6, 1e9, 3.0};
        up.offload.push_back({Path{0, u, u, {u}, 0.0}, 600e3});
        up.forward.push_back({Path{1, u, u, {u}, 0.0}, 600e3});
        up.budgets.push_back({u, u, 600e3, 0.0, 0.0, rate});
        up.windows.push_back({u, u, -10.0, 300.0, true});
        up.rho_max = 2.0;
        inst.users.push_back(up);
    }
    Solution s = zero_solution(inst);
    const double b[] = {1.0, 0.5};
    const double f[] = {0.5, 1.0};
    for (int u = 0; u < 2; ++u) {
        s.users[u].i[0] = s.users[u].y[0] = 1;
        s.users[u].b[0] = b[u];
        s.users[u].f[0] = f[u];
    }
    tighten(s, 1e-4, 1e-4);

    double delay = 0.0, energy = 0.0, eta = 2.0;
    for (int u = 0; u < 2; ++u) {
        const double d = 1e6 / (b[u] * 25 * rate) + 1e9 / (f[u] * 5e9) + 2 * 600e3 / speed_of_light;
        const double e = 0.05 * 1e6 / rate + 1e-28 * 1e9 * f[u] * f[u] * 25e18;
        delay += d;
        energy += e;
        eta -= 0.1 * e / 2.0 + 0.1 * d / 3.0;
    }
    const auto m = evaluate_solution(inst, s);
    CHECK(m.active_users == 3);
    CHECK(m.admitted == 2);
    REQUIRE(m.admission_rate);
    CHECK(*m.admission_rate == doctest::Approx(2.0 / 3.0));
    REQUIRE(m.average_delay);
    CHECK(*m.average_delay == doctest::Approx(delay / 2).epsilon(1e-12));
    CHECK(*m.average_energy == doctest::Approx(energy / 2).epsilon(1e-12));
    CHECK(m.objective == doctest::Approx(eta).epsilon(1e-12));

    const auto none = evaluate_solution(inst, zero_solution(inst));
    CHECK(*none.admission_rate == 0.0);
    CHECK_FALSE(none.average_delay.has_value());
    CHECK_FALSE(none.average_energy.has_value());
}

TEST_CASE("p2: relaxation feasible set is convex")
{
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> coin(0, 1);
    int pairs = 0;
    for (int trial = 0; trial < 30 && pairs < 10; ++trial) {
        const auto inst = testkit::random_instance(rng);
        const auto prog = build_p2(inst);
        std::vector<std::vector<double>> pts;
        for (int attempt = 0; attempt < 6 && pts.size() < 2; ++attempt) {
            Fixings fx(prog.binaries.size(), -1);
            for (auto& q : fx)
                if (coin(rng)) q = 0;
            const auto r = solve_relaxation(prog, fx);
            if (r.status == EngineStatus::optimal) pts.push_back(r.x);
        }
        if (pts.size() < 2) continue;
        std::vector<double> mid(pts[0].size());
        for (std::size_t j = 0; j < mid.size(); ++j) mid[j] = 0.5 * (pts[0][j] + pts[1][j]);
        CHECK(prog.model.max_violation(pts[0]) < 1e-6);
        CHECK(prog.model.max_violation(mid) < 1e-6);
        ++pairs;
    }
    CHECK(pairs >= 5);
}

TEST_CASE("p2: fixing i at one forces the shifted reciprocals on random instances")
{
    std::mt19937_64 rng(9);
    int checked = 0;
    for (int trial = 0; trial < 40; ++trial) {
        const auto inst = testkit::random_instance(rng);
        const auto prog = build_p2(inst);
        for (std::size_t u = 0; u < inst.users.size(); ++u) {
            const auto& v = prog.users[u];
            for (std::size_t k = 0; k < v.i.size(); ++k) {
                if (prog.model.upper[v.i[k]] < 1.0) continue;
                const auto partners = inst.users[u].partners(static_cast<int>(k));
                Fixings fx(prog.binaries.size(), 0);
                fx[binary_position(prog, v.i[k])] = 1;
                for (int j : partners) fx[binary_position(prog, v.y[j])] = -1;
                const auto r = solve_relaxation(prog, fx);
                if (r.status != EngineStatus::optimal) continue;
                const double b = r.x[v.b[k]], f = r.x[v.f[k]];
                CHECK(r.x[v.theta[k]] * (b + prog.epsilon1) >= 1.0 - 1e-6);
                CHECK(r.x[v.phi[k]] * (f + prog.epsilon2) >= 1.0 - 1e-6);
                ++checked;
            }
        }
    }
    CHECK(checked > 10);
}

TEST_CASE("instance io: round trip is exact")
{
    std::mt19937_64 rng(2);
    const auto inst = testkit::random_instance(rng, {3, 3, 3, 4, true});
    const std::string a = dump_instance(inst);
    const auto back = parse_instance(a);
    CHECK(dump_instance(back) == a);
    CHECK(check_instance(back).empty());

    Solution s = zero_solution(inst);
    s.objective = 1.25;
    CHECK(dump_solution(parse_solution(dump_solution(s))) == dump_solution(s));
}
