#include <charconv>
#include <cmath>
#include <cstdio>

#include "kgatlas/graph.hpp"

namespace kgatlas {

void append_json_string(std::string& out, std::string_view text) {
    out.push_back('"');
    for (char c : text) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            case '\b': out += "\\b"; break;
            case '\f': out += "\\f"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", static_cast<unsigned>(static_cast<unsigned char>(c)));
                    out += buf;
                } else {
                    out.push_back(c);
                }
        }
    }
    out.push_back('"');
}

void append_json_number(std::string& out, double value) {
    if (!std::isfinite(value)) {
        out += "null";
        return;
    }
    if (value == 0.0) value = 0.0;  // drop the sign of -0
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    out.append(buf, ptr);
}

namespace {

void append_unsigned(std::string& out, std::uint64_t value) {
    char buf[24];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    out.append(buf, ptr);
}

}  // namespace

void append_graph_members(std::string& out, const KnowledgeGraph& graph, const RadiusScale& scale) {
    out.reserve(out.size() + graph.node_count() * 96 + graph.edge_count() * 128);
    out += "\"nodes\":[";
    for (std::size_t i = 0; i < graph.node_count(); ++i) {
        const auto& node = graph.nodes()[i];
        if (i) out.push_back(',');
        out += "{\"id\":";
        append_unsigned(out, node.id);
        out += ",\"label\":";
        append_json_string(out, node.label);
        out += ",\"degree\":";
        append_unsigned(out, node.degree);
        out += ",\"filtered_degree\":";
        append_unsigned(out, node.filtered_degree);
        out += ",\"radius\":";
        append_json_number(out, node_radius(graph, i, scale));
        out.push_back('}');
    }
    out += "],\"links\":[";
    for (std::size_t e = 0; e < graph.edge_count(); ++e) {
        const auto& edge = graph.edges()[e];
        if (e) out.push_back(',');
        out += "{\"source\":";
        append_unsigned(out, edge.source);
        out += ",\"target\":";
        append_unsigned(out, edge.target);
        out += ",\"relation\":";
        append_json_string(out, edge.relation);
        out += ",\"abbrev\":";
        append_json_string(out, edge.abbrev);
        out += ",\"multiplicity\":";
        append_unsigned(out, edge.multiplicity);
        out += ",\"curvature\":";
        append_json_number(out, edge.curvature);
        if (edge.paper_id) {
            out += ",\"paper_id\":";
            append_json_string(out, *edge.paper_id);
        }
        out.push_back('}');
    }
    out.push_back(']');
}

std::string graph_to_json(const KnowledgeGraph& graph, const RadiusScale& scale) {
    std::string out = "{";
    append_graph_members(out, graph, scale);
    out += "}\n";
    return out;
}

}  // namespace kgatlas
