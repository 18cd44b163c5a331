#pragma once

#include <map>
#include <span>
#include <vector>

#include "satedge/orbital_mechanics.hpp"

namespace satedge {

struct LinkRule {
    enum class Kind { nearest_k, range };
    Kind kind = Kind::nearest_k;
    int neighbors = 2;                // nearest_k: same-layer neighbours per satellite
    double max_isl_range = 6.0e6;     // m
};

struct GraphNode {
    int id = 0;
    Layer layer = Layer::leo;
    Vec3 position = Vec3::Zero();
};

struct GraphEdge {
    int a = 0; // node index, a < b
    int b = 0;
    double length = 0.0;
};

/// Undirected satellite graph at one decision epoch. Node indices are
/// positions in `nodes`, sorted by satellite id.
class ConstellationGraph {
public:
    ConstellationGraph() = default;
    explicit ConstellationGraph(std::vector<GraphNode> nodes);

    void add_edge(int a, int b);

    const std::vector<GraphNode>& nodes() const { return nodes_; }
    const std::vector<GraphEdge>& edges() const { return edges_; }
    const std::vector<std::vector<std::pair<int, double>>>& adjacency() const { return adjacency_; }
    bool has_edge(int a, int b) const;
    int index_of(int satellite_id) const;
    std::size_t degree(int index) const { return adjacency_[index].size(); }

private:
    std::vector<GraphNode> nodes_;
    std::vector<GraphEdge> edges_;
    std::vector<std::vector<std::pair<int, double>>> adjacency_;
    std::map<int, int> index_;
};

struct Path {
    int id = 0;
    int source = 0;      // satellite id (access node for offloading)
    int destination = 0; // satellite id (compute node for offloading)
    std::vector<int> hops; // satellite ids, source first
    double length = 0.0;   // m

    bool is_self() const { return source == destination; }
};

/// True when the straight segment between the two points stays outside the
/// Earth sphere.
bool line_of_sight(const Vec3& a, const Vec3& b);

ConstellationGraph build_graph(std::span<const SatelliteState> states, std::span<const Layer> layers,
                               const LinkRule& rule);

/// One minimum-length path per ordered reachable pair, plus a self-path per
/// node. Ties go to the predecessor with the smaller satellite id. Ids follow
/// (source id, destination id) order.
std::vector<Path> all_pairs_shortest_paths(const ConstellationGraph& graph);

enum class PathRole { offload, forward };

/// Per-user visibility lookup for the current elevation threshold.
class VisibilityIndex {
public:
    void add(const VisibilityWindow& w);

    bool currently_visible(int satellite_id) const;
    /// First window intersecting [0, until], if any.
    const VisibilityWindow* first_window_within(int satellite_id, double until) const;
    const std::vector<VisibilityWindow>* windows(int satellite_id) const;
    std::vector<int> satellites() const;

private:
    std::map<int, std::vector<VisibilityWindow>> by_sat_;
};

struct CandidateOptions {
    int max_sources_per_layer = 4;     // nearest visible access satellites kept per layer
    int destinations_per_source = 2;   // same-layer compute nodes per access satellite (self included)
    int cross_layer_destinations = 1;  // other-layer compute nodes per access satellite
    int forward_destinations = 2;      // return satellites per (compute node, layer)
    double deadline = 3.0;             // tau_max, s, for forwarding-path visibility
};

/// Candidate offloading or forwarding paths for one user.
///
/// Offloading: sources are the nearest currently visible satellites of each
/// layer; each source keeps its nearest compute nodes per destination layer,
/// ranked by straight-line distance over all satellites of that layer.
/// Forwarding: sources are `compute_nodes`; destinations are the nearest
/// satellites per layer with a window meeting [0, deadline].
///
/// Every ranking uses only geometry inside one layer, so adding a layer to the
/// snapshot never removes a candidate that a single-layer run would keep.
/// Paths missing from `paths` (unreachable pairs) are skipped.
std::vector<Path> candidate_paths(const GroundUser& user, std::span<const Path> paths, const ConstellationGraph& graph,
                                  const VisibilityIndex& windows, PathRole role, const CandidateOptions& options,
                                  std::span<const int> compute_nodes = {});

/// Distinct destinations of the given paths, in first-seen order.
std::vector<int> compute_nodes_of(std::span<const Path> paths);

} // namespace satedge
