#include <doctest.h>

#include <cmath>
#include <regex>
#include <set>

#include "kgatlas/error.hpp"
#include "kgatlas/layout.hpp"
#include "support/oracles.hpp"

using namespace kgatlas;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::Io;
}

KnowledgeGraph graph_of(std::vector<Triplet> triples) { return build_graph(triples, AbbrevTable{}); }

KnowledgeGraph lonely() {
    return KnowledgeGraph::assemble({GraphNode{0, "a", "a", 0, 0}}, {}, 0);
}

KnowledgeGraph isolated_pair() {
    return KnowledgeGraph::assemble({GraphNode{0, "a", "a", 0, 0}, GraphNode{1, "b", "b", 0, 0}}, {}, 0);
}

std::size_t count(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
    return n;
}

double distance(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace

TEST_CASE("initial_positions") {
    auto one = initial_positions(lonely(), 1);
    REQUIRE(one.size() == 1);
    CHECK(std::abs(one.position[0].x) <= 50.0);
    CHECK(std::abs(one.position[0].y) <= 50.0);
    CHECK(one.velocity[0] == Vec2{});

    oracle::Rng rng(3);
    auto triples = oracle::random_graph_triples(rng, 40, 60);
    auto g = graph_of(triples);
    auto a = initial_positions(g, 42);
    auto b = initial_positions(g, 42);
    CHECK(a.position == b.position);
    const double half = 50.0 * std::sqrt(static_cast<double>(g.node_count()));
    for (auto p : a.position) {
        CHECK(std::abs(p.x) <= half);
        CHECK(std::abs(p.y) <= half);
    }
    CHECK(initial_positions(g, 43).position != a.position);
}

TEST_CASE("coincident nodes separate after one step") {
    auto g = isolated_pair();
    LayoutState state = initial_positions(g, 1);
    state.position = {{5.0, 5.0}, {5.0, 5.0}};
    auto next = step(state, g, LayoutConfig{});
    CHECK(distance(next.position[0], next.position[1]) > 1.0);
    CHECK(next.iteration == 1);
    auto again = step(state, g, LayoutConfig{});
    CHECK(again.position == next.position);
}

TEST_CASE("a lone node moves towards the origin") {
    auto g = lonely();
    LayoutState state = initial_positions(g, 1);
    state.position[0] = {30.0, -40.0};
    auto next = step(state, g, LayoutConfig{});
    CHECK(std::hypot(next.position[0].x, next.position[0].y) < 50.0);
    // The move is along the line to the origin.
    CHECK(next.position[0].x * -40.0 == doctest::Approx(next.position[0].y * 30.0));
}

TEST_CASE("a spring at rest length only feels centering and repulsion") {
    auto g = graph_of({{"a", "r", "b"}});
    LayoutConfig config;
    config.repulsion_strength = 1e-9;
    LayoutState state = initial_positions(g, 1);
    state.position = {{-30.0, 0.0}, {30.0, 0.0}};
    auto next = step(state, g, config);
    double keep = 1.0 - config.velocity_decay;
    CHECK(next.position[0].x == doctest::Approx(-30.0 + config.centering_strength * 30.0 * keep).epsilon(1e-9));
    CHECK(next.position[1].x == doctest::Approx(30.0 - config.centering_strength * 30.0 * keep).epsilon(1e-9));
    CHECK(next.position[0].y == 0.0);
}

TEST_CASE("pinning every node makes step the identity") {
    oracle::Rng rng(5);
    auto g = graph_of(oracle::random_graph_triples(rng, 15, 30));
    auto state = initial_positions(g, 9);
    for (std::size_t i = 0; i < state.size(); ++i) state.pin(i, state.position[i]);
    auto next = step(state, g, LayoutConfig{});
    CHECK(next.position == state.position);
}

TEST_CASE("pinned nodes stay put while others move") {
    auto g = graph_of({{"a", "r", "b"}, {"b", "r", "c"}, {"c", "r", "a"}, {"c", "r", "d"}});
    LayoutConfig config;
    config.max_iterations = 300;
    config.displacement_epsilon = 1e-12;
    auto state = initial_positions(g, 4);
    state.pin(0, {100.0, -20.0});
    auto result = run_layout(g, config, state);
    CHECK(result.iterations == 300);
    CHECK(result.positions[0] == Vec2{100.0, -20.0});
    CHECK(result.positions[1] != state.position[1]);
}

TEST_CASE("a symmetric pair stays symmetric") {
    auto g = graph_of({{"a", "r", "b"}});
    auto state = initial_positions(g, 1);
    state.position = {{-7.5, 3.25}, {7.5, -3.25}};
    for (int i = 0; i < 200; ++i) {
        advance(state, g, LayoutConfig{});
        CHECK(state.position[0].x == doctest::Approx(-state.position[1].x).epsilon(1e-12));
        CHECK(state.position[0].y == doctest::Approx(-state.position[1].y).epsilon(1e-12));
    }
}

TEST_CASE("run_layout examples") {
    auto single = run_layout(lonely(), LayoutConfig{});
    CHECK(single.converged);
    CHECK(std::hypot(single.positions[0].x, single.positions[0].y) < 1.0);

    LayoutConfig config;
    config.max_iterations = 2000;
    config.displacement_epsilon = 1e-6;
    auto pair = run_layout(graph_of({{"a", "r", "b"}}), config);
    double expected = oracle::two_node_equilibrium(config.repulsion_strength, config.spring_rest_length,
                                                   config.spring_stiffness, config.centering_strength);
    double got = distance(pair.positions[0], pair.positions[1]);
    CHECK(std::abs(got - expected) / expected < 0.05);

    oracle::Rng rng(7);
    auto g = graph_of(oracle::random_graph_triples(rng, 30, 50));
    CHECK(run_layout(g, LayoutConfig{}).positions == run_layout(g, LayoutConfig{}).positions);
}

TEST_CASE("layout config validation and state checks") {
    LayoutConfig config;
    CHECK_NOTHROW(config.validate());
    config.velocity_decay = 1.0;
    CHECK(code_of([&] { config.validate(); }) == ErrorCode::Config);
    config = {};
    config.spring_stiffness = 0.0;
    CHECK(code_of([&] { config.validate(); }) == ErrorCode::Config);

    auto g = graph_of({{"a", "r", "b"}});
    LayoutState wrong = initial_positions(lonely(), 1);
    CHECK(code_of([&] { advance(wrong, g, LayoutConfig{}); }) == ErrorCode::MissingPosition);
}

TEST_CASE("quadratic control point offset") {
    CHECK(quadratic_control_point({0, 0}, {10, 0}, 0.0) == Vec2{5, 0});
    CHECK(quadratic_control_point({0, 0}, {10, 0}, 0.1) == Vec2{5, 1});
    oracle::Rng rng(9);
    std::uniform_real_distribution<double> coord(-500.0, 500.0);
    std::uniform_real_distribution<double> curve(-0.5, 0.5);
    for (int i = 0; i < 1000; ++i) {
        Vec2 a{coord(rng), coord(rng)};
        Vec2 b{coord(rng), coord(rng)};
        double c = curve(rng);
        auto q = quadratic_control_point(a, b, c);
        Vec2 mid{(a.x + b.x) / 2, (a.y + b.y) / 2};
        double chord = distance(a, b);
        // Signed distance of q from the chord along its left normal.
        double offset = ((q.x - mid.x) * -(b.y - a.y) + (q.y - mid.y) * (b.x - a.x)) / chord;
        CHECK(std::abs(offset - c * chord) < 1e-9);
        CHECK(std::abs((q.x - mid.x) * (b.x - a.x) + (q.y - mid.y) * (b.y - a.y)) < 1e-6);
    }
}

TEST_CASE("render_svg examples") {
    std::vector<Vec2> one{{0, 0}};
    auto lone_svg = render_svg(lonely(), one);
    CHECK(count(lone_svg, "<circle") == 1);
    CHECK(count(lone_svg, "<path") == 0);

    AbbrevTable abbrev;
    abbrev.add("favor", "FAV");
    auto straight = build_graph(std::vector<Triplet>{{"a", "favor", "b"}}, abbrev);
    std::vector<Vec2> two{{-10, 0}, {10, 0}};
    auto svg = render_svg(straight, two);
    CHECK(count(svg, "<path") == 1);
    CHECK(count(svg, ">FAV</textPath>") == 1);
    std::smatch m;
    REQUIRE(std::regex_search(svg, m, std::regex(R"(d="M ([-\d.]+) ([-\d.]+) Q ([-\d.]+) ([-\d.]+) ([-\d.]+) ([-\d.]+)\")")));
    CHECK(std::stod(m[4]) == doctest::Approx(std::stod(m[2])));  // control point on the chord
    CHECK(std::stod(m[3]) == doctest::Approx((std::stod(m[1]) + std::stod(m[5])) / 2));

    auto parallel = build_graph(std::vector<Triplet>{{"a", "favor", "b"}, {"a", "opposes", "b"}}, abbrev);
    auto svg2 = render_svg(parallel, two);
    std::set<std::string> controls;
    const std::regex control(R"(Q ([-\d.]+ [-\d.]+))");
    for (std::sregex_iterator it(svg2.begin(), svg2.end(), control), end; it != end; ++it) {
        controls.insert((*it)[1]);
    }
    CHECK(controls.size() == 2);
    CHECK(count(svg2, ">opposes</textPath>") == 1);

    SvgOptions quiet;
    quiet.show_labels = false;
    CHECK(count(render_svg(parallel, two, quiet), "<text") == 0);
}

TEST_CASE("render_svg layering, escaping and stability") {
    auto g = graph_of({{"R&D <core>", "r", "b"}, {"b", "loops", "b"}});
    std::vector<Vec2> pos{{0, 0}, {40, 30}};
    auto svg = render_svg(g, pos);
    CHECK(svg == render_svg(g, pos));
    CHECK(svg.find("R&amp;D &lt;core&gt;") != std::string::npos);
    CHECK(svg.find("R&D") == std::string::npos);
    auto links = svg.find("class=\"links\"");
    auto nodes = svg.find("class=\"nodes\"");
    auto labels = svg.find("class=\"labels\"");
    CHECK(links < nodes);
    CHECK(nodes < labels);
    CHECK(count(svg, " C ") == 1);  // the self-loop
    CHECK(svg.rfind("</svg>\n") == svg.size() - 7);

    std::vector<Vec2> short_positions{{0, 0}};
    CHECK(code_of([&] { render_svg(g, short_positions); }) == ErrorCode::MissingPosition);
    std::vector<Vec2> bad{{0, 0}, {std::nan(""), 0}};
    CHECK(code_of([&] { render_svg(g, bad); }) == ErrorCode::MissingPosition);
}

TEST_CASE("render_svg keeps every node inside the viewport") {
    oracle::Rng rng(15);
    for (int round = 0; round < 20; ++round) {
        auto g = graph_of(oracle::random_graph_triples(rng, 25, 40));
        auto layout = run_layout(g, LayoutConfig{});
        auto svg = render_svg(g, layout.positions);
        std::regex circle(R"re(<circle cx="([-\d.]+)" cy="([-\d.]+)" r="([-\d.]+)")re");
        std::size_t seen = 0;
        for (std::sregex_iterator it(svg.begin(), svg.end(), circle), end; it != end; ++it, ++seen) {
            double cx = std::stod((*it)[1]);
            double cy = std::stod((*it)[2]);
            double r = std::stod((*it)[3]);
            CHECK(cx - r >= 0.0);
            CHECK(cy - r >= 0.0);
            CHECK(cx + r <= 960.0);
            CHECK(cy + r <= 720.0);
        }
        CHECK(seen == g.node_count());
    }
}
