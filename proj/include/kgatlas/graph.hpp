#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "kgatlas/model.hpp"

namespace kgatlas {

/// Node identifier assigned by build_graph (first-appearance order). Subgraphs
/// keep the ids of the graph they were cut from.
using NodeId = std::uint32_t;

struct GraphNode {
    NodeId id = 0;
    std::string key;    // normalized label, the node identity
    std::string label;  // display label, first spelling seen
    std::size_t degree = 0;           // in the graph built from triples
    std::size_t filtered_degree = 0;  // in this (possibly filtered) graph
};

struct GraphEdge {
    NodeId source = 0;
    NodeId target = 0;
    std::string relation;
    std::string abbrev;  // empty when the relation has no alias
    std::uint64_t multiplicity = 1;
    double curvature = 0.0;
    std::optional<std::string> paper_id;
};

struct GraphOptions {
    double base_curvature = 0.15;
};

/// Directed multigraph over entities. Immutable once built; filters and
/// expansions return new graphs.
class KnowledgeGraph {
public:
    KnowledgeGraph() = default;

    const std::vector<GraphNode>& nodes() const noexcept { return nodes_; }
    const std::vector<GraphEdge>& edges() const noexcept { return edges_; }
    std::size_t node_count() const noexcept { return nodes_.size(); }
    std::size_t edge_count() const noexcept { return edges_.size(); }
    bool empty() const noexcept { return nodes_.empty(); }

    /// Position of `id` in nodes(), if present.
    std::optional<std::size_t> index_of(NodeId id) const;

    /// Edge indices incident to the node at `node_index`; self-loops appear once.
    std::span<const std::size_t> incident_edges(std::size_t node_index) const;

    /// Node indices of an edge's endpoints.
    std::size_t source_index(std::size_t edge_index) const { return endpoints_[edge_index].first; }
    std::size_t target_index(std::size_t edge_index) const { return endpoints_[edge_index].second; }

    /// Maximum `degree` of the root graph; the reference for radius scaling
    /// so that filtering never resizes surviving nodes.
    std::size_t reference_max_degree() const noexcept { return reference_max_degree_; }

    /// Lowercased label, used by search.
    const std::string& folded_label(std::size_t node_index) const { return folded_labels_[node_index]; }

    /// Builds a graph from nodes sorted by id and edges whose endpoints are all
    /// present. Recomputes filtered degrees and adjacency.
    static KnowledgeGraph assemble(std::vector<GraphNode> nodes, std::vector<GraphEdge> edges,
                                   std::size_t reference_max_degree);

private:
    std::vector<GraphNode> nodes_;
    std::vector<GraphEdge> edges_;
    std::vector<std::string> folded_labels_;
    std::vector<std::pair<std::size_t, std::size_t>> endpoints_;
    std::vector<std::size_t> adjacency_offsets_;
    std::vector<std::size_t> adjacency_;
    std::size_t reference_max_degree_ = 0;
};

/// Throws E_DUPLICATE_TRIPLE if two triples share a normalized key.
KnowledgeGraph build_graph(std::span<const Triplet> triples, const AbbrevTable& abbrev,
                           const GraphOptions& options = {});

/// Nodes whose build-time degree is at least `min_degree`, with the edges
/// between them.
KnowledgeGraph filter_by_degree(const KnowledgeGraph& graph, std::size_t min_degree);

/// Node ids whose label contains `query` (ASCII case-insensitive), ordered by
/// descending degree then label. Empty query matches nothing.
std::vector<NodeId> search(const KnowledgeGraph& graph, std::string_view query);

/// Induced subgraph on every node within `depth` undirected hops of a seed.
/// Throws E_UNKNOWN_NODE for seeds not in the graph.
KnowledgeGraph expand_neighborhood(const KnowledgeGraph& graph, std::span<const NodeId> seeds, std::size_t depth);

/// Mean local clustering coefficient on the simple undirected projection;
/// nodes with fewer than two neighbours contribute 0.
double clustering_coefficient(const KnowledgeGraph& graph);

struct GraphStats {
    std::size_t node_count = 0;
    std::size_t edge_count = 0;
    std::map<std::size_t, std::size_t> degree_distribution;  // degree -> nodes
    std::size_t max_degree = 0;
    double clustering_coefficient = 0.0;
};

/// Degrees here are the in-graph (filtered) degrees.
GraphStats compute_stats(const KnowledgeGraph& graph);

/// {"node_count", "edge_count", "degree_distribution": {"<degree>": nodes}, "max_degree", "clustering_coefficient"}
nlohmann::json to_json(const GraphStats& stats);

struct GroupEdge {
    NodeId source = 0;
    NodeId target = 0;
    std::string_view relation;
};

/// Curvatures for a parallel-edge group, returned in input order. Edges that
/// run from the lower to the higher node id are "forward" and are ordered
/// first; each group is ordered by relation label. Slot i of n gets
/// base * (i - (n - 1) / 2), negated for reverse edges so that, once drawn
/// relative to their own direction, every edge gets its own arc.
/// Throws E_MIXED_GROUP if the edges do not share one unordered node pair.
std::vector<double> edge_group_curvatures(std::span<const GroupEdge> group, double base_curvature = 0.15);

/// Curvature measured against the group's reference direction (lower id to
/// higher id): the side and bend of the arc as it appears on screen.
double rendered_curvature(const GraphEdge& edge) noexcept;

/// r_min + (r_max - r_min) * sqrt(degree / max_degree); r_min when max_degree is 0.
double node_radius(std::size_t degree, std::size_t max_degree, double r_min, double r_max);

struct RadiusScale {
    double r_min = 4.0;
    double r_max = 20.0;
};

double node_radius(const KnowledgeGraph& graph, std::size_t node_index, const RadiusScale& scale);

/// Appends `"nodes":[...],"links":[...]` (no surrounding braces) for `graph`.
void append_graph_members(std::string& out, const KnowledgeGraph& graph, const RadiusScale& scale);

/// Full export document: {"nodes": [...], "links": [...]}.
std::string graph_to_json(const KnowledgeGraph& graph, const RadiusScale& scale = {});

/// Appends `text` as a JSON string literal.
void append_json_string(std::string& out, std::string_view text);

/// Appends the shortest round-trip representation of `value`.
void append_json_number(std::string& out, double value);

}  // namespace kgatlas
