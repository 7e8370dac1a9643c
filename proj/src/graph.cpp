#include "kgatlas/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "kgatlas/error.hpp"

namespace kgatlas {

KnowledgeGraph KnowledgeGraph::assemble(std::vector<GraphNode> nodes, std::vector<GraphEdge> edges,
                                        std::size_t reference_max_degree) {
    KnowledgeGraph g;
    g.nodes_ = std::move(nodes);
    g.edges_ = std::move(edges);
    g.reference_max_degree_ = reference_max_degree;

    g.folded_labels_.reserve(g.nodes_.size());
    for (auto& node : g.nodes_) {
        node.filtered_degree = 0;
        g.folded_labels_.push_back(ascii_lower(node.label));
    }

    g.endpoints_.reserve(g.edges_.size());
    std::vector<std::size_t> counts(g.nodes_.size(), 0);
    for (const auto& edge : g.edges_) {
        auto s = g.index_of(edge.source);
        auto t = g.index_of(edge.target);
        if (!s || !t) throw Error(ErrorCode::UnknownNode, "edge endpoint is not a node of the graph");
        g.endpoints_.emplace_back(*s, *t);
        g.nodes_[*s].filtered_degree += 1;
        g.nodes_[*t].filtered_degree += 1;
        counts[*s] += 1;
        if (*t != *s) counts[*t] += 1;
    }

    g.adjacency_offsets_.assign(g.nodes_.size() + 1, 0);
    std::partial_sum(counts.begin(), counts.end(), g.adjacency_offsets_.begin() + 1);
    g.adjacency_.resize(g.adjacency_offsets_.back());
    std::vector<std::size_t> cursor(g.adjacency_offsets_.begin(), g.adjacency_offsets_.end() - 1);
    for (std::size_t e = 0; e < g.endpoints_.size(); ++e) {
        auto [s, t] = g.endpoints_[e];
        g.adjacency_[cursor[s]++] = e;
        if (t != s) g.adjacency_[cursor[t]++] = e;
    }
    return g;
}

std::optional<std::size_t> KnowledgeGraph::index_of(NodeId id) const {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id,
                               [](const GraphNode& n, NodeId value) { return n.id < value; });
    if (it == nodes_.end() || it->id != id) return std::nullopt;
    return static_cast<std::size_t>(it - nodes_.begin());
}

std::span<const std::size_t> KnowledgeGraph::incident_edges(std::size_t node_index) const {
    return std::span<const std::size_t>(adjacency_).subspan(
        adjacency_offsets_[node_index], adjacency_offsets_[node_index + 1] - adjacency_offsets_[node_index]);
}

namespace {

KnowledgeGraph induced_subgraph(const KnowledgeGraph& graph, const std::vector<bool>& keep) {
    std::vector<GraphNode> nodes;
    for (std::size_t i = 0; i < graph.node_count(); ++i) {
        if (keep[i]) nodes.push_back(graph.nodes()[i]);
    }
    std::vector<GraphEdge> edges;
    for (std::size_t e = 0; e < graph.edge_count(); ++e) {
        if (keep[graph.source_index(e)] && keep[graph.target_index(e)]) edges.push_back(graph.edges()[e]);
    }
    return KnowledgeGraph::assemble(std::move(nodes), std::move(edges), graph.reference_max_degree());
}

}  // namespace

KnowledgeGraph build_graph(std::span<const Triplet> triples, const AbbrevTable& abbrev, const GraphOptions& options) {
    std::vector<GraphNode> nodes;
    std::unordered_map<std::string, NodeId> id_of;
    auto node_for = [&](const std::string& label) {
        auto key = normalize_label(label);
        auto [it, inserted] = id_of.try_emplace(key, static_cast<NodeId>(nodes.size()));
        if (inserted) nodes.push_back(GraphNode{it->second, std::move(key), std::string(trim(label)), 0, 0});
        return it->second;
    };

    std::unordered_set<TripletKey, TripletKeyHash> seen;
    seen.reserve(triples.size());
    std::vector<GraphEdge> edges;
    edges.reserve(triples.size());
    for (const auto& t : triples) {
        validate(t);
        auto key = key_of(t);
        if (!seen.insert(key).second) {
            throw Error(ErrorCode::DuplicateTriple, "triple (" + key.subject + ", " + key.predicate + ", " +
                                                        key.object + ") occurs twice; deduplicate first");
        }
        GraphEdge edge;
        edge.source = node_for(t.subject);
        edge.target = node_for(t.object);
        edge.relation = std::move(key.predicate);
        edge.abbrev = abbrev.alias_for(edge.relation).value_or("");
        edge.multiplicity = t.multiplicity;
        edge.paper_id = t.paper_id;
        edges.push_back(std::move(edge));
    }

    // Parallel-edge groups keyed by unordered endpoint pair.
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> groups;
    for (std::size_t e = 0; e < edges.size(); ++e) {
        auto lo = std::min(edges[e].source, edges[e].target);
        auto hi = std::max(edges[e].source, edges[e].target);
        groups[(static_cast<std::uint64_t>(lo) << 32) | hi].push_back(e);
    }
    for (const auto& [pair, members] : groups) {
        if (members.size() == 1) continue;
        std::vector<GroupEdge> group;
        group.reserve(members.size());
        for (auto e : members) group.push_back({edges[e].source, edges[e].target, edges[e].relation});
        auto curvatures = edge_group_curvatures(group, options.base_curvature);
        for (std::size_t k = 0; k < members.size(); ++k) edges[members[k]].curvature = curvatures[k];
    }

    for (const auto& edge : edges) {
        nodes[edge.source].degree += 1;
        nodes[edge.target].degree += 1;
    }
    std::size_t max_degree = 0;
    for (const auto& node : nodes) max_degree = std::max(max_degree, node.degree);

    return KnowledgeGraph::assemble(std::move(nodes), std::move(edges), max_degree);
}

KnowledgeGraph filter_by_degree(const KnowledgeGraph& graph, std::size_t min_degree) {
    std::vector<bool> keep(graph.node_count());
    for (std::size_t i = 0; i < graph.node_count(); ++i) keep[i] = graph.nodes()[i].degree >= min_degree;
    return induced_subgraph(graph, keep);
}

std::vector<NodeId> search(const KnowledgeGraph& graph, std::string_view query) {
    std::vector<NodeId> out;
    if (query.empty()) return out;
    const std::string needle = ascii_lower(query);
    std::vector<std::size_t> hits;
    for (std::size_t i = 0; i < graph.node_count(); ++i) {
        if (graph.folded_label(i).find(needle) != std::string::npos) hits.push_back(i);
    }
    std::sort(hits.begin(), hits.end(), [&](std::size_t a, std::size_t b) {
        const auto& na = graph.nodes()[a];
        const auto& nb = graph.nodes()[b];
        if (na.degree != nb.degree) return na.degree > nb.degree;
        if (na.label != nb.label) return na.label < nb.label;
        return na.id < nb.id;
    });
    out.reserve(hits.size());
    for (auto i : hits) out.push_back(graph.nodes()[i].id);
    return out;
}

KnowledgeGraph expand_neighborhood(const KnowledgeGraph& graph, std::span<const NodeId> seeds, std::size_t depth) {
    constexpr std::size_t unvisited = static_cast<std::size_t>(-1);
    std::vector<std::size_t> distance(graph.node_count(), unvisited);
    std::deque<std::size_t> frontier;
    for (auto id : seeds) {
        auto index = graph.index_of(id);
        if (!index) throw Error(ErrorCode::UnknownNode, "node " + std::to_string(id) + " is not in the graph");
        if (distance[*index] == unvisited) {
            distance[*index] = 0;
            frontier.push_back(*index);
        }
    }
    while (!frontier.empty()) {
        auto v = frontier.front();
        frontier.pop_front();
        if (distance[v] >= depth) continue;
        for (auto e : graph.incident_edges(v)) {
            auto u = graph.source_index(e) == v ? graph.target_index(e) : graph.source_index(e);
            if (distance[u] != unvisited) continue;
            distance[u] = distance[v] + 1;
            frontier.push_back(u);
        }
    }
    std::vector<bool> keep(graph.node_count());
    for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = distance[i] != unvisited;
    return induced_subgraph(graph, keep);
}

double clustering_coefficient(const KnowledgeGraph& graph) {
    const auto n = graph.node_count();
    if (n == 0) return 0.0;

    std::vector<std::vector<std::size_t>> neighbours(n);
    for (std::size_t e = 0; e < graph.edge_count(); ++e) {
        auto s = graph.source_index(e);
        auto t = graph.target_index(e);
        if (s == t) continue;
        neighbours[s].push_back(t);
        neighbours[t].push_back(s);
    }
    for (auto& list : neighbours) {
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
    }

    std::vector<std::size_t> mark(n, static_cast<std::size_t>(-1));
    double total = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
        const auto& nv = neighbours[v];
        const auto k = nv.size();
        if (k < 2) continue;
        for (auto u : nv) mark[u] = v;
        std::size_t links = 0;  // each neighbour-neighbour link is seen from both ends
        for (auto u : nv) {
            for (auto w : neighbours[u]) {
                if (mark[w] == v) ++links;
            }
        }
        total += static_cast<double>(links) / static_cast<double>(k * (k - 1));
    }
    return total / static_cast<double>(n);
}

GraphStats compute_stats(const KnowledgeGraph& graph) {
    GraphStats stats;
    stats.node_count = graph.node_count();
    stats.edge_count = graph.edge_count();
    for (const auto& node : graph.nodes()) {
        stats.degree_distribution[node.filtered_degree] += 1;
        stats.max_degree = std::max(stats.max_degree, node.filtered_degree);
    }
    stats.clustering_coefficient = clustering_coefficient(graph);
    return stats;
}

nlohmann::json to_json(const GraphStats& stats) {
    nlohmann::json distribution = nlohmann::json::object();
    for (const auto& [degree, count] : stats.degree_distribution) distribution[std::to_string(degree)] = count;
    return {
        {"node_count", stats.node_count},
        {"edge_count", stats.edge_count},
        {"degree_distribution", std::move(distribution)},
        {"max_degree", stats.max_degree},
        {"clustering_coefficient", stats.clustering_coefficient},
    };
}

std::vector<double> edge_group_curvatures(std::span<const GroupEdge> group, double base_curvature) {
    std::vector<double> out(group.size(), 0.0);
    if (group.empty()) return out;

    const auto lo = std::min(group.front().source, group.front().target);
    const auto hi = std::max(group.front().source, group.front().target);
    for (const auto& edge : group) {
        if (std::min(edge.source, edge.target) != lo || std::max(edge.source, edge.target) != hi) {
            throw Error(ErrorCode::MixedGroup, "parallel-edge group spans more than one node pair");
        }
    }

    auto forward = [&](const GroupEdge& e) { return e.source == lo; };
    std::vector<std::size_t> order(group.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        bool fa = forward(group[a]);
        bool fb = forward(group[b]);
        if (fa != fb) return fa;
        return group[a].relation < group[b].relation;
    });

    const double middle = (static_cast<double>(group.size()) - 1.0) / 2.0;
    for (std::size_t slot = 0; slot < order.size(); ++slot) {
        double value = base_curvature * (static_cast<double>(slot) - middle);
        if (value == 0.0) continue;  // keeps the middle slot at +0, never -0
        out[order[slot]] = forward(group[order[slot]]) ? value : -value;
    }
    return out;
}

double rendered_curvature(const GraphEdge& edge) noexcept {
    return edge.source <= edge.target ? edge.curvature : -edge.curvature;
}

double node_radius(std::size_t degree, std::size_t max_degree, double r_min, double r_max) {
    if (max_degree == 0) return r_min;
    double ratio = std::min(1.0, static_cast<double>(degree) / static_cast<double>(max_degree));
    return r_min + (r_max - r_min) * std::sqrt(ratio);
}

double node_radius(const KnowledgeGraph& graph, std::size_t node_index, const RadiusScale& scale) {
    return node_radius(graph.nodes()[node_index].degree, graph.reference_max_degree(), scale.r_min, scale.r_max);
}

}  // namespace kgatlas
