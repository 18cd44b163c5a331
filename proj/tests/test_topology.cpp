#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "satedge/constants.hpp"
#include "satedge/network_topology.hpp"

using namespace satedge;

namespace {

std::vector<SatelliteState> states_at(const std::vector<OrbitalElements>& els, double t, double angle = 0.0)
{
    std::vector<SatelliteState> out;
    for (const auto& e : els) out.push_back(propagate(e, t, angle));
    return out;
}

std::vector<OrbitalElements> meo_shell()
{
    std::vector<PlaneSpec> planes{{86, 2100e3, 10, 0}, {88, 2100e3, 10, 60}, {90, 2100e3, 10, 120}};
    return synthesize_constellation(planes, Layer::meo, 1000);
}

std::map<std::pair<int, int>, double> bellman_ford(const ConstellationGraph& g)
{
    const int n = static_cast<int>(g.nodes().size());
    const double inf = std::numeric_limits<double>::infinity();
    std::map<std::pair<int, int>, double> out;
    for (int s = 0; s < n; ++s) {
        std::vector<double> d(n, inf);
        d[s] = 0.0;
        for (int round = 0; round < n; ++round)
            for (const auto& e : g.edges()) {
                d[e.b] = std::min(d[e.b], d[e.a] + e.length);
                d[e.a] = std::min(d[e.a], d[e.b] + e.length);
            }
        for (int t = 0; t < n; ++t)
            if (d[t] < inf) out[{g.nodes()[s].id, g.nodes()[t].id}] = d[t];
    }
    return out;
}

} // namespace

TEST_CASE("graph: range rule links two close satellites and respects occlusion")
{
    const double r = earth_radius + 550e3;
    std::vector<SatelliteState> s(2);
    s[0].id = 1;
    s[0].position = Vec3(r, 0, 0);
    s[1].id = 2;
    s[1].position = Vec3(r * std::cos(0.1), r * std::sin(0.1), 0);
    std::vector<Layer> layers{Layer::leo, Layer::leo};
    LinkRule rule;
    rule.kind = LinkRule::Kind::range;
    auto g = build_graph(s, layers, rule);
    REQUIRE(g.edges().size() == 1);
    CHECK(g.edges()[0].length == doctest::Approx((s[0].position - s[1].position).norm()));

    s[1].position = Vec3(-r, 0, 0);
    rule.max_isl_range = 1e9;
    CHECK(build_graph(s, layers, rule).edges().empty());
}

TEST_CASE("graph: nearest_k on the MEO shell keeps the brute-force nearest neighbours")
{
    const auto els = meo_shell();
    const auto st = states_at(els, 0.0);
    std::vector<Layer> layers(st.size(), Layer::meo);
    LinkRule rule;
    const auto g = build_graph(st, layers, rule);
    const auto& ns = g.nodes();
    int in_plane = 0;
    for (int a = 0; a < static_cast<int>(ns.size()); ++a) {
        CHECK(g.degree(a) >= 2);
        std::vector<std::pair<double, int>> cand;
        for (int b = 0; b < static_cast<int>(ns.size()); ++b) {
            if (a == b) continue;
            const double d = (ns[a].position - ns[b].position).norm();
            if (d <= rule.max_isl_range && line_of_sight(ns[a].position, ns[b].position)) cand.push_back({d, b});
        }
        std::sort(cand.begin(), cand.end());
        CHECK(g.has_edge(a, cand[0].second));
        CHECK(g.has_edge(a, cand[1].second));
    }
    for (const auto& e : g.edges())
        if ((ns[e.a].id - 1000) / 10 == (ns[e.b].id - 1000) / 10) ++in_plane;
    CHECK(in_plane >= 20);
}

TEST_CASE("paths: singleton and line graphs")
{
    ConstellationGraph one({GraphNode{5, Layer::leo, Vec3(7e6, 0, 0)}});
    const auto p1 = all_pairs_shortest_paths(one);
    REQUIRE(p1.size() == 1);
    CHECK(p1[0].is_self());
    CHECK(p1[0].length == 0.0);

    ConstellationGraph line({GraphNode{1, Layer::leo, Vec3(7e6, 0, 0)}, GraphNode{2, Layer::leo, Vec3(7e6, 1e3, 0)},
                             GraphNode{3, Layer::leo, Vec3(7e6, 3e3, 0)}});
    line.add_edge(0, 1);
    line.add_edge(1, 2);
    const auto paths = all_pairs_shortest_paths(line);
    CHECK(paths.size() == 9);
    const auto it = std::find_if(paths.begin(), paths.end(), [](const Path& p) { return p.source == 1 && p.destination == 3; });
    REQUIRE(it != paths.end());
    CHECK(it->length == doctest::Approx(3e3));
    CHECK(it->hops == std::vector<int>{1, 2, 3});
}

TEST_CASE("paths: random graphs agree with Bellman-Ford and obey the triangle inequality")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<GraphNode> nodes;
        for (int i = 0; i < 20; ++i) nodes.push_back({100 - 3 * i, Layer::leo, Vec3(U(rng), U(rng), U(rng)) * 1e6});
        ConstellationGraph g(nodes);
        for (int a = 0; a < 20; ++a)
            for (int b = a + 1; b < 20; ++b)
                if (U(rng) > 0.7) g.add_edge(a, b);
        const auto ref = bellman_ford(g);
        const auto paths = all_pairs_shortest_paths(g);
        CHECK(paths.size() == ref.size());
        std::map<std::pair<int, int>, double> got;
        for (const auto& p : paths) {
            got[{p.source, p.destination}] = p.length;
            REQUIRE(ref.count({p.source, p.destination}));
            CHECK(p.length == doctest::Approx(ref.at({p.source, p.destination})).epsilon(1e-12));
            CHECK(p.hops.front() == p.source);
            CHECK(p.hops.back() == p.destination);
            double walked = 0.0;
            for (std::size_t h = 0; h + 1 < p.hops.size(); ++h) {
                const int a = g.index_of(p.hops[h]), b = g.index_of(p.hops[h + 1]);
                REQUIRE(g.has_edge(a, b));
                walked += (g.nodes()[a].position - g.nodes()[b].position).norm();
            }
            CHECK(walked == doctest::Approx(p.length).epsilon(1e-12));
        }
        for (const auto& [ab, dab] : got)
            for (const auto& [bc, dbc] : got) {
                if (ab.second != bc.first) continue;
                auto ac = got.find({ab.first, bc.second});
                REQUIRE(ac != got.end());
                CHECK(ac->second <= dab + dbc + 1e-6);
            }
        CHECK(all_pairs_shortest_paths(g).size() == paths.size());
        const auto again = all_pairs_shortest_paths(g);
        for (std::size_t i = 0; i < paths.size(); ++i) {
            CHECK(again[i].id == paths[i].id);
            CHECK(again[i].hops == paths[i].hops);
        }
    }
}

TEST_CASE("candidates: empty when nothing is visible, self-path when only one satellite is")
{
    ConstellationGraph g({GraphNode{1, Layer::leo, Vec3(7e6, 0, 0)}});
    const auto paths = all_pairs_shortest_paths(g);
    GroundUser u;
    VisibilityIndex none;
    CandidateOptions opt;
    CHECK(candidate_paths(u, paths, g, none, PathRole::offload, opt).empty());

    VisibilityIndex one;
    one.add({0, 1, 0.0, 100.0, true});
    const auto c = candidate_paths(u, paths, g, one, PathRole::offload, opt);
    REQUIRE(c.size() == 1);
    CHECK(c[0].is_self());
    CHECK(c[0].source == 1);
}

TEST_CASE("candidates: hybrid lists contain the leo_only lists at 50 degrees")
{
    std::vector<PlaneSpec> lp;
    for (int p = 0; p < 4; ++p) lp.push_back({65, 550e3, 40, 90.0 * p});
    const auto leo = synthesize_constellation(lp, Layer::leo);
    const auto meo = meo_shell();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    int non_empty = 0;
    for (int trial = 0; trial < 12; ++trial) {
        const double angle = 6.0 * U(rng);
        const double t0 = 6000.0 * U(rng);
        GroundUser user;
        user.latitude = 60.0 + 4.0 * U(rng);
        user.longitude = -80.0 + 5.0 * U(rng);

        auto scene = [&](bool with_meo, std::vector<Path>& paths, ConstellationGraph& g, VisibilityIndex& vis) {
            std::vector<OrbitalElements> els = leo;
            if (with_meo) els.insert(els.end(), meo.begin(), meo.end());
            for (auto& e : els) e.epoch = -t0;
            std::vector<SatelliteState> st;
            std::vector<Layer> layers;
            for (const auto& e : els) {
                st.push_back(propagate(e, 0.0, angle));
                layers.push_back(e.layer);
            }
            g = build_graph(st, layers, LinkRule{});
            paths = all_pairs_shortest_paths(g);
            VisibilityOptions vo;
            vo.threshold = 50.0;
            vo.earth_angle_at_origin = angle;
            vo.horizon = 600;
            for (const auto& e : els)
                for (const auto& w : visibility_windows(user, e, vo)) vis.add(w);
        };
        std::vector<Path> pl, ph;
        ConstellationGraph gl, gh;
        VisibilityIndex vl, vh;
        scene(false, pl, gl, vl);
        scene(true, ph, gh, vh);
        CandidateOptions opt;
        const auto ol = candidate_paths(user, pl, gl, vl, PathRole::offload, opt);
        const auto oh = candidate_paths(user, ph, gh, vh, PathRole::offload, opt);
        std::set<std::pair<int, int>> hs;
        for (const auto& p : oh) hs.insert({p.source, p.destination});
        for (const auto& p : ol) CHECK(hs.count({p.source, p.destination}) == 1);

        const auto nl = compute_nodes_of(ol);
        const auto nh = compute_nodes_of(oh);
        const auto fl = candidate_paths(user, pl, gl, vl, PathRole::forward, opt, nl);
        const auto fh = candidate_paths(user, ph, gh, vh, PathRole::forward, opt, nh);
        std::set<std::pair<int, int>> fs;
        for (const auto& p : fh) fs.insert({p.source, p.destination});
        for (const auto& p : fl) CHECK(fs.count({p.source, p.destination}) == 1);
        if (!ol.empty()) ++non_empty;
        for (const auto& p : oh) CHECK(vh.currently_visible(p.source));
    }
    CHECK(non_empty > 0);
}
