#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kgatlas/graph.hpp"

namespace kgatlas {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Vec2&, const Vec2&) = default;
};

struct LayoutConfig {
    double repulsion_strength = 1000.0;  // units^2
    double spring_rest_length = 60.0;
    double spring_stiffness = 0.08;      // (0, 1]
    double centering_strength = 0.05;    // [0, 1]
    double velocity_decay = 0.4;         // (0, 1)
    std::size_t max_iterations = 300;
    double displacement_epsilon = 0.1;
    std::uint64_t seed = 42;

    /// Throws E_CONFIG when a constant is outside its range.
    void validate() const;
};

struct LayoutState {
    std::vector<Vec2> position;
    std::vector<Vec2> velocity;
    std::vector<std::uint8_t> pinned;
    std::size_t iteration = 0;

    std::size_t size() const noexcept { return position.size(); }
    void pin(std::size_t node_index, Vec2 at);
};

/// Uniform positions in a square of side 100 * sqrt(n) centred on the origin,
/// zero velocities. Bit-identical for the same graph size and seed.
LayoutState initial_positions(const KnowledgeGraph& graph, std::uint64_t seed);

/// One tick: pairwise repulsion (distance clamped at 1), per-edge springs,
/// pull towards the origin, then velocity update, damping and move.
/// Returns the largest per-node displacement.
double advance(LayoutState& state, const KnowledgeGraph& graph, const LayoutConfig& config);

/// Value-returning form of advance().
LayoutState step(const LayoutState& state, const KnowledgeGraph& graph, const LayoutConfig& config);

struct LayoutResult {
    std::vector<Vec2> positions;
    bool converged = false;
    std::size_t iterations = 0;
};

/// Steps until every node moves less than displacement_epsilon or
/// max_iterations is reached.
LayoutResult run_layout(const KnowledgeGraph& graph, const LayoutConfig& config);
LayoutResult run_layout(const KnowledgeGraph& graph, const LayoutConfig& config, LayoutState state);

/// Control point of the quadratic Bezier from `from` to `to`: the chord
/// midpoint pushed along the chord's left normal by curvature * chord length.
Vec2 quadratic_control_point(Vec2 from, Vec2 to, double curvature);

struct SvgOptions {
    bool show_labels = true;
    double width = 960.0;
    double height = 720.0;
    double padding = 24.0;
    RadiusScale radius;
};

/// SVG 1.1 document: link paths, then node circles, then link labels
/// (abbreviation, or the relation when there is none). Positions are fitted
/// into the viewport with a uniform scale. Throws E_MISSING_POSITION when
/// `positions` does not cover every node.
std::string render_svg(const KnowledgeGraph& graph, std::span<const Vec2> positions, const SvgOptions& options = {});

}  // namespace kgatlas
