#include "satedge/network_topology.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <set>

#include "satedge/constants.hpp"

namespace satedge {

ConstellationGraph::ConstellationGraph(std::vector<GraphNode> nodes) : nodes_(std::move(nodes))
{
    std::sort(nodes_.begin(), nodes_.end(), [](const GraphNode& a, const GraphNode& b) { return a.id < b.id; });
    adjacency_.resize(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (!index_.emplace(nodes_[i].id, static_cast<int>(i)).second)
            throw ConfigError("duplicate satellite id " + std::to_string(nodes_[i].id));
    }
}

void ConstellationGraph::add_edge(int a, int b)
{
    if (a == b || has_edge(a, b)) return;
    if (a > b) std::swap(a, b);
    const double len = (nodes_[a].position - nodes_[b].position).norm();
    edges_.push_back({a, b, len});
    auto insert_sorted = [](auto& adj, int other, double l) {
        const auto it = std::lower_bound(adj.begin(), adj.end(), other,
                                         [](const auto& e, int v) { return e.first < v; });
        adj.insert(it, {other, l});
    };
    insert_sorted(adjacency_[a], b, len);
    insert_sorted(adjacency_[b], a, len);
}

bool ConstellationGraph::has_edge(int a, int b) const
{
    const auto& adj = adjacency_[a];
    const auto it = std::lower_bound(adj.begin(), adj.end(), b, [](const auto& e, int v) { return e.first < v; });
    return it != adj.end() && it->first == b;
}

int ConstellationGraph::index_of(int satellite_id) const
{
    const auto it = index_.find(satellite_id);
    return it == index_.end() ? -1 : it->second;
}

bool line_of_sight(const Vec3& a, const Vec3& b)
{
    const Vec3 d = b - a;
    const double len2 = d.squaredNorm();
    if (len2 == 0.0) return true;
    const double t = std::clamp(-a.dot(d) / len2, 0.0, 1.0);
    return (a + t * d).norm() > earth_radius;
}

ConstellationGraph build_graph(std::span<const SatelliteState> states, std::span<const Layer> layers,
                               const LinkRule& rule)
{
    if (states.size() != layers.size()) throw ConfigError("build_graph: states and layers differ in length");
    std::vector<GraphNode> nodes;
    nodes.reserve(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) nodes.push_back({states[i].id, layers[i], states[i].position});
    ConstellationGraph graph(std::move(nodes));
    const auto& ns = graph.nodes();
    const int n = static_cast<int>(ns.size());

    auto usable = [&](int a, int b) {
        const double d = (ns[a].position - ns[b].position).norm();
        return d <= rule.max_isl_range && line_of_sight(ns[a].position, ns[b].position);
    };

    if (rule.kind == LinkRule::Kind::range) {
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b)
                if (usable(a, b)) graph.add_edge(a, b);
        return graph;
    }

    for (int a = 0; a < n; ++a) {
        std::vector<std::pair<double, int>> same;
        std::pair<double, int> cross{std::numeric_limits<double>::infinity(), -1};
        for (int b = 0; b < n; ++b) {
            if (b == a || !usable(a, b)) continue;
            const double d = (ns[a].position - ns[b].position).norm();
            if (ns[b].layer == ns[a].layer) same.emplace_back(d, b);
            else if (std::make_pair(d, b) < cross) cross = {d, b};
        }
        std::sort(same.begin(), same.end());
        for (int k = 0; k < rule.neighbors && k < static_cast<int>(same.size()); ++k) graph.add_edge(a, same[k].second);
        if (cross.second >= 0) graph.add_edge(a, cross.second);
    }
    return graph;
}

std::vector<Path> all_pairs_shortest_paths(const ConstellationGraph& graph)
{
    const auto& ns = graph.nodes();
    const auto& adj = graph.adjacency();
    const int n = static_cast<int>(ns.size());
    const double inf = std::numeric_limits<double>::infinity();

    std::vector<Path> out;
    std::vector<double> dist(n);
    std::vector<int> pred(n);
    std::vector<char> done(n);
    for (int src = 0; src < n; ++src) {
        std::fill(dist.begin(), dist.end(), inf);
        std::fill(pred.begin(), pred.end(), -1);
        std::fill(done.begin(), done.end(), 0);
        using Item = std::pair<double, int>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
        dist[src] = 0.0;
        queue.push({0.0, src});
        while (!queue.empty()) {
            const auto [d, v] = queue.top();
            queue.pop();
            if (done[v]) continue;
            done[v] = 1;
            for (const auto& [w, len] : adj[v]) {
                const double nd = d + len;
                if (nd < dist[w] || (nd == dist[w] && !done[w] && v < pred[w])) {
                    dist[w] = nd;
                    pred[w] = v;
                    queue.push({nd, w});
                }
            }
        }
        for (int dst = 0; dst < n; ++dst) {
            if (dist[dst] == inf) continue;
            Path p;
            p.id = static_cast<int>(out.size());
            p.source = ns[src].id;
            p.destination = ns[dst].id;
            p.length = dist[dst];
            for (int v = dst; v != -1; v = pred[v]) p.hops.push_back(ns[v].id);
            std::reverse(p.hops.begin(), p.hops.end());
            out.push_back(std::move(p));
        }
    }
    return out;
}

// ---- visibility index ------------------------------------------------------

void VisibilityIndex::add(const VisibilityWindow& w)
{
    auto& list = by_sat_[w.satellite_id];
    list.push_back(w);
    std::sort(list.begin(), list.end(), [](const auto& a, const auto& b) { return a.start < b.start; });
}

bool VisibilityIndex::currently_visible(int satellite_id) const
{
    const auto* list = windows(satellite_id);
    return list && !list->empty() && list->front().currently_visible;
}

const VisibilityWindow* VisibilityIndex::first_window_within(int satellite_id, double until) const
{
    const auto* list = windows(satellite_id);
    if (!list) return nullptr;
    for (const auto& w : *list)
        if (w.end >= 0.0 && w.start <= until) return &w;
    return nullptr;
}

const std::vector<VisibilityWindow>* VisibilityIndex::windows(int satellite_id) const
{
    const auto it = by_sat_.find(satellite_id);
    return it == by_sat_.end() ? nullptr : &it->second;
}

std::vector<int> VisibilityIndex::satellites() const
{
    std::vector<int> out;
    for (const auto& [id, list] : by_sat_) out.push_back(id);
    return out;
}

// ---- candidate filtering ---------------------------------------------------

namespace {

const Path* find_path(std::span<const Path> paths, int source, int destination)
{
    const auto it = std::lower_bound(paths.begin(), paths.end(), std::make_pair(source, destination),
                                     [](const Path& p, const std::pair<int, int>& key) {
                                         return std::make_pair(p.source, p.destination) < key;
                                     });
    if (it == paths.end() || it->source != source || it->destination != destination) return nullptr;
    return &*it;
}

// Nearest `count` nodes of `layer` to node `from` by straight-line distance,
// ties broken by satellite id.
std::vector<int> nearest_in_layer(const ConstellationGraph& graph, int from, Layer layer, int count)
{
    const auto& ns = graph.nodes();
    std::vector<std::pair<double, int>> ranked;
    for (const auto& node : ns) {
        if (node.layer != layer) continue;
        ranked.emplace_back((node.position - ns[from].position).norm(), node.id);
    }
    std::sort(ranked.begin(), ranked.end());
    std::vector<int> out;
    for (int k = 0; k < count && k < static_cast<int>(ranked.size()); ++k) out.push_back(ranked[k].second);
    return out;
}

// Satellites of one layer accepted by `keep`, ordered by range to the user.
template <class Pred>
std::vector<int> ranked_by_range(const ConstellationGraph& graph, const Vec3& site, Layer layer, Pred keep)
{
    std::vector<std::pair<double, int>> ranked;
    for (const auto& node : graph.nodes()) {
        if (node.layer != layer || !keep(node.id)) continue;
        ranked.emplace_back((node.position - site).norm(), node.id);
    }
    std::sort(ranked.begin(), ranked.end());
    std::vector<int> out;
    for (const auto& r : ranked) out.push_back(r.second);
    return out;
}

constexpr Layer all_layers[] = {Layer::leo, Layer::meo};

} // namespace

std::vector<Path> candidate_paths(const GroundUser& user, std::span<const Path> paths, const ConstellationGraph& graph,
                                  const VisibilityIndex& windows, PathRole role, const CandidateOptions& options,
                                  std::span<const int> compute_nodes)
{
    const Vec3 site = user_position(user);
    std::vector<Path> out;
    std::set<std::pair<int, int>> seen;
    auto take = [&](int s, int d) {
        if (!seen.insert({s, d}).second) return;
        if (const Path* p = find_path(paths, s, d)) out.push_back(*p);
    };

    if (role == PathRole::offload) {
        for (Layer src_layer : all_layers) {
            auto sources = ranked_by_range(graph, site, src_layer,
                                           [&](int id) { return windows.currently_visible(id); });
            if (static_cast<int>(sources.size()) > options.max_sources_per_layer)
                sources.resize(options.max_sources_per_layer);
            for (int s : sources) {
                const int from = graph.index_of(s);
                for (Layer dst_layer : all_layers) {
                    const int count =
                        dst_layer == src_layer ? options.destinations_per_source : options.cross_layer_destinations;
                    for (int d : nearest_in_layer(graph, from, dst_layer, count)) take(s, d);
                }
            }
        }
        return out;
    }

    for (int c : compute_nodes) {
        if (graph.index_of(c) < 0) continue;
        for (Layer dst_layer : all_layers) {
            auto dests = ranked_by_range(graph, site, dst_layer, [&](int id) {
                return windows.first_window_within(id, options.deadline) != nullptr;
            });
            if (static_cast<int>(dests.size()) > options.forward_destinations)
                dests.resize(options.forward_destinations);
            for (int d : dests) take(c, d);
        }
    }
    return out;
}

std::vector<int> compute_nodes_of(std::span<const Path> paths)
{
    std::vector<int> out;
    for (const auto& p : paths)
        if (std::find(out.begin(), out.end(), p.destination) == out.end()) out.push_back(p.destination);
    return out;
}

} // namespace satedge
