#include "kgatlas/layout.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>

#include "kgatlas/error.hpp"

namespace kgatlas {

namespace {

// Portable mapping from the 64-bit engine to [0, 1); std::uniform_real_distribution
// differs between standard libraries.
double unit_interval(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Vec2 coincident_direction(std::size_t i, std::size_t j) {
    double turn = 0.6180339887498949 * static_cast<double>(i + 1) + 0.41421356237309515 * static_cast<double>(j + 1);
    double angle = 2.0 * std::numbers::pi * (turn - std::floor(turn));
    return {std::cos(angle), std::sin(angle)};
}

void require_positions(const LayoutState& state, const KnowledgeGraph& graph) {
    if (state.position.size() != graph.node_count() || state.velocity.size() != graph.node_count() ||
        state.pinned.size() != graph.node_count()) {
        throw Error(ErrorCode::MissingPosition, "layout state has " + std::to_string(state.position.size()) +
                                                    " nodes, graph has " + std::to_string(graph.node_count()));
    }
}

}  // namespace

void LayoutConfig::validate() const {
    auto fail = [](const char* what) { throw Error(ErrorCode::Config, what); };
    if (!(repulsion_strength > 0.0)) fail("repulsion_strength must be positive");
    if (!(spring_rest_length >= 0.0)) fail("spring_rest_length must be non-negative");
    if (!(spring_stiffness > 0.0 && spring_stiffness <= 1.0)) fail("spring_stiffness must lie in (0, 1]");
    if (!(centering_strength >= 0.0 && centering_strength <= 1.0)) fail("centering_strength must lie in [0, 1]");
    if (!(velocity_decay > 0.0 && velocity_decay < 1.0)) fail("velocity_decay must lie in (0, 1)");
    if (!(displacement_epsilon > 0.0)) fail("displacement_epsilon must be positive");
}

void LayoutState::pin(std::size_t node_index, Vec2 at) {
    position.at(node_index) = at;
    velocity.at(node_index) = {};
    pinned.at(node_index) = 1;
}

LayoutState initial_positions(const KnowledgeGraph& graph, std::uint64_t seed) {
    const auto n = graph.node_count();
    LayoutState state;
    state.position.resize(n);
    state.velocity.assign(n, Vec2{});
    state.pinned.assign(n, 0);
    const double side = 100.0 * std::sqrt(static_cast<double>(n));
    std::mt19937_64 rng(seed);
    for (auto& p : state.position) {
        p.x = (unit_interval(rng) - 0.5) * side;
        p.y = (unit_interval(rng) - 0.5) * side;
    }
    return state;
}

double advance(LayoutState& state, const KnowledgeGraph& graph, const LayoutConfig& config) {
    require_positions(state, graph);
    const auto n = state.size();
    std::vector<Vec2> force(n);
    const auto& pos = state.position;

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double dx = pos[i].x - pos[j].x;
            double dy = pos[i].y - pos[j].y;
            double d = std::hypot(dx, dy);
            Vec2 dir;
            if (d > 1e-12) {
                dir = {dx / d, dy / d};
            } else {
                dir = coincident_direction(i, j);
            }
            double clamped = std::max(d, 1.0);
            double magnitude = config.repulsion_strength / (clamped * clamped);
            force[i].x += magnitude * dir.x;
            force[i].y += magnitude * dir.y;
            force[j].x -= magnitude * dir.x;
            force[j].y -= magnitude * dir.y;
        }
    }

    for (std::size_t e = 0; e < graph.edge_count(); ++e) {
        auto s = graph.source_index(e);
        auto t = graph.target_index(e);
        if (s == t) continue;
        double dx = pos[t].x - pos[s].x;
        double dy = pos[t].y - pos[s].y;
        double d = std::hypot(dx, dy);
        if (d <= 1e-12) continue;
        double magnitude = config.spring_stiffness * (d - config.spring_rest_length);
        force[s].x += magnitude * dx / d;
        force[s].y += magnitude * dy / d;
        force[t].x -= magnitude * dx / d;
        force[t].y -= magnitude * dy / d;
    }

    double max_displacement = 0.0;
    const double keep = 1.0 - config.velocity_decay;
    for (std::size_t i = 0; i < n; ++i) {
        if (state.pinned[i]) {
            state.velocity[i] = {};
            continue;
        }
        force[i].x -= config.centering_strength * pos[i].x;
        force[i].y -= config.centering_strength * pos[i].y;
        auto& v = state.velocity[i];
        v.x = (v.x + force[i].x) * keep;
        v.y = (v.y + force[i].y) * keep;
        state.position[i].x += v.x;
        state.position[i].y += v.y;
        max_displacement = std::max(max_displacement, std::hypot(v.x, v.y));
    }
    ++state.iteration;
    return max_displacement;
}

LayoutState step(const LayoutState& state, const KnowledgeGraph& graph, const LayoutConfig& config) {
    LayoutState next = state;
    advance(next, graph, config);
    return next;
}

LayoutResult run_layout(const KnowledgeGraph& graph, const LayoutConfig& config) {
    return run_layout(graph, config, initial_positions(graph, config.seed));
}

LayoutResult run_layout(const KnowledgeGraph& graph, const LayoutConfig& config, LayoutState state) {
    config.validate();
    require_positions(state, graph);
    LayoutResult result;
    for (std::size_t it = 0; it < config.max_iterations; ++it) {
        double moved = advance(state, graph, config);
        ++result.iterations;
        if (moved < config.displacement_epsilon) {
            result.converged = true;
            break;
        }
    }
    result.positions = std::move(state.position);
    return result;
}

Vec2 quadratic_control_point(Vec2 from, Vec2 to, double curvature) {
    double dx = to.x - from.x;
    double dy = to.y - from.y;
    Vec2 mid{(from.x + to.x) / 2.0, (from.y + to.y) / 2.0};
    // (-dy, dx) has the chord's length, so this offsets by curvature * length.
    return {mid.x - curvature * dy, mid.y + curvature * dx};
}

namespace {

void append_xml_text(std::string& out, std::string_view text) {
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default:
                if (static_cast<unsigned char>(c) >= 0x20 || c == '\t' || c == '\n') out.push_back(c);
        }
    }
}

void append_coord(std::string& out, double value) {
    char buf[32];
    if (std::abs(value) < 0.0005) value = 0.0;
    std::snprintf(buf, sizeof buf, "%.3f", value);
    out += buf;
}

void append_point(std::string& out, Vec2 p) {
    append_coord(out, p.x);
    out.push_back(' ');
    append_coord(out, p.y);
}

}  // namespace

std::string render_svg(const KnowledgeGraph& graph, std::span<const Vec2> positions, const SvgOptions& options) {
    const auto n = graph.node_count();
    if (positions.size() != n) {
        throw Error(ErrorCode::MissingPosition, "got " + std::to_string(positions.size()) + " positions for " +
                                                    std::to_string(n) + " nodes");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(positions[i].x) || !std::isfinite(positions[i].y)) {
            throw Error(ErrorCode::MissingPosition, "node " + std::to_string(graph.nodes()[i].id) +
                                                        " has no finite position");
        }
    }

    std::vector<double> radius(n);
    for (std::size_t i = 0; i < n; ++i) radius[i] = node_radius(graph, i, options.radius);

    // Uniform fit of the layout into the viewport.
    double min_x = 0, max_x = 0, min_y = 0, max_y = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i == 0) {
            min_x = max_x = positions[i].x;
            min_y = max_y = positions[i].y;
        }
        min_x = std::min(min_x, positions[i].x);
        max_x = std::max(max_x, positions[i].x);
        min_y = std::min(min_y, positions[i].y);
        max_y = std::max(max_y, positions[i].y);
    }
    double usable_w = std::max(1.0, options.width - 2.0 * (options.padding + options.radius.r_max));
    double usable_h = std::max(1.0, options.height - 2.0 * (options.padding + options.radius.r_max));
    double span_x = max_x - min_x;
    double span_y = max_y - min_y;
    double scale = 1.0;
    if (span_x > 0.0 || span_y > 0.0) {
        scale = std::min(span_x > 0.0 ? usable_w / span_x : std::numeric_limits<double>::infinity(),
                         span_y > 0.0 ? usable_h / span_y : std::numeric_limits<double>::infinity());
    }
    const Vec2 centre{(min_x + max_x) / 2.0, (min_y + max_y) / 2.0};
    auto to_view = [&](Vec2 p) {
        return Vec2{options.width / 2.0 + (p.x - centre.x) * scale, options.height / 2.0 + (p.y - centre.y) * scale};
    };
    std::vector<Vec2> view(n);
    for (std::size_t i = 0; i < n; ++i) view[i] = to_view(positions[i]);

    std::string out;
    out.reserve(256 + n * 160 + graph.edge_count() * 200);
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" xmlns:xlink=\"http://www.w3.org/1999/xlink\" version=\"1.1\"";
    out += " width=\"";
    append_coord(out, options.width);
    out += "\" height=\"";
    append_coord(out, options.height);
    out += "\" viewBox=\"0 0 ";
    append_point(out, {options.width, options.height});
    out += "\">\n";

    out += "<g class=\"links\" fill=\"none\" stroke=\"#8a8f98\" stroke-width=\"1.2\">\n";
    for (std::size_t e = 0; e < graph.edge_count(); ++e) {
        const auto& edge = graph.edges()[e];
        auto s = graph.source_index(e);
        auto t = graph.target_index(e);
        out += "<path id=\"link-";
        out += std::to_string(e);
        out += "\" d=\"M ";
        append_point(out, view[s]);
        if (s == t) {
            // Self-loops have no chord; draw a teardrop above the node.
            double h = radius[s] * (3.0 + 10.0 * std::abs(edge.curvature));
            out += " C ";
            append_point(out, {view[s].x - h, view[s].y - h});
            out += ", ";
            append_point(out, {view[s].x + h, view[s].y - h});
            out += ", ";
        } else {
            out += " Q ";
            append_point(out, quadratic_control_point(view[s], view[t], edge.curvature));
            out += ' ';
        }
        append_point(out, view[t]);
        out += "\"/>\n";
    }
    out += "</g>\n";

    out += "<g class=\"nodes\" fill=\"#4c78a8\" stroke=\"#ffffff\" stroke-width=\"1\">\n";
    for (std::size_t i = 0; i < n; ++i) {
        out += "<circle cx=\"";
        append_coord(out, view[i].x);
        out += "\" cy=\"";
        append_coord(out, view[i].y);
        out += "\" r=\"";
        append_coord(out, radius[i]);
        out += "\"><title>";
        append_xml_text(out, graph.nodes()[i].label);
        out += "</title></circle>\n";
    }
    out += "</g>\n";

    if (options.show_labels) {
        out += "<g class=\"labels\" font-family=\"sans-serif\" font-size=\"10\" fill=\"#333333\">\n";
        for (std::size_t e = 0; e < graph.edge_count(); ++e) {
            const auto& edge = graph.edges()[e];
            out += "<text><textPath xlink:href=\"#link-";
            out += std::to_string(e);
            out += "\" startOffset=\"50%\" text-anchor=\"middle\">";
            append_xml_text(out, edge.abbrev.empty() ? edge.relation : edge.abbrev);
            out += "</textPath></text>\n";
        }
        out += "</g>\n";
    }
    out += "</svg>\n";
    return out;
}

}  // namespace kgatlas
