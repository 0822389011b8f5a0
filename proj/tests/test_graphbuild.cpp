#include <algorithm>

#include "doctest.h"
#include "helpers.hpp"

using namespace tablegraph;
using tgtest::make_line;
using tgtest::make_page;

namespace {

int count_edges(const PageGraph& g, EdgeOrientation o) {
    int c = 0;
    for (const auto& e : g.edges)
        if (e.orientation == o) ++c;
    return c;
}

}  // namespace

TEST_CASE("single line has no edges") {
    PageGraph g = build_graph(make_page({make_line("a", 0, 0, 10, 2)}));
    CHECK(g.n == 1);
    CHECK(g.edge_count() == 0);
}

TEST_CASE("two fully overlapping stacked boxes get one vertical edge") {
    PageGraph g =
        build_graph(make_page({make_line("a", 0, 0, 10, 2), make_line("b", 0, 5, 10, 2)}));
    REQUIRE(g.edge_count() == 1);
    const GraphEdge& e = g.edges[0];
    CHECK(e.orientation == EdgeOrientation::Vertical);
    CHECK(e.source == 0);
    CHECK(e.target == 1);
    CHECK(e.overlap == doctest::Approx(1.0));
    CHECK(e.gap == doctest::Approx(3.0));
}

TEST_CASE("line of sight is blocked by a box in the corridor") {
    PageGraph g = build_graph(make_page({make_line("a", 0, 0, 10, 2), make_line("b", 0, 5, 10, 2),
                                         make_line("c", 0, 10, 10, 2)}));
    REQUIRE(g.edge_count() == 2);
    CHECK(g.edges[0].source == 0);
    CHECK(g.edges[0].target == 1);
    CHECK(g.edges[1].source == 1);
    CHECK(g.edges[1].target == 2);
}

TEST_CASE("insufficient projection overlap yields no edge") {
    PageGraph g =
        build_graph(make_page({make_line("a", 0, 0, 10, 2), make_line("b", 9, 5, 10, 2)}),
                    GraphParams{0.25, -1.0});
    CHECK(g.edge_count() == 0);
}

TEST_CASE("horizontal edges run left to right") {
    PageGraph g =
        build_graph(make_page({make_line("r", 20, 0, 10, 4), make_line("l", 0, 1, 10, 4)}));
    REQUIRE(g.edge_count() == 1);
    CHECK(g.edges[0].orientation == EdgeOrientation::Horizontal);
    CHECK(g.edges[0].source == 1);  // the left box, stored second
    CHECK(g.edges[0].target == 0);
    CHECK(g.edges[0].gap == doctest::Approx(10.0));
}

TEST_CASE("max_gap prunes long edges") {
    Page p = make_page({make_line("a", 0, 0, 10, 2), make_line("b", 0, 50, 10, 2)});
    CHECK(build_graph(p, GraphParams{0.25, -1.0}).edge_count() == 1);
    CHECK(build_graph(p, GraphParams{0.25, 20.0}).edge_count() == 0);
    CHECK(build_graph(p, GraphParams{0.25, 48.0}).edge_count() == 1);
}

TEST_CASE("removing a line never removes unrelated edges") {
    tgtest::Rng rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<TextLine> lines;
        const int n = 6;
        for (int i = 0; i < n; ++i)
            lines.push_back(make_line("l" + std::to_string(i), rng.uniform(0, 300),
                                      rng.uniform(0, 300), rng.uniform(20, 80),
                                      rng.uniform(8, 20)));
        Page full = make_page(lines);
        PageGraph g_full = build_graph(full);
        const int removed = static_cast<int>(rng.below(n));
        std::vector<TextLine> rest;
        for (int i = 0; i < n; ++i)
            if (i != removed) rest.push_back(lines[i]);
        PageGraph g_rest = build_graph(make_page(rest));

        auto index_after_removal = [&](int i) { return i < removed ? i : i - 1; };
        for (const GraphEdge& e : g_full.edges) {
            if (e.source == removed || e.target == removed) continue;
            const int s = index_after_removal(e.source), t = index_after_removal(e.target);
            const bool present = std::any_of(
                g_rest.edges.begin(), g_rest.edges.end(), [&](const GraphEdge& r) {
                    return r.source == s && r.target == t && r.orientation == e.orientation;
                });
            CHECK(present);
        }
    }
}

TEST_CASE("translation invariance of overlaps and gaps") {
    std::vector<TextLine> lines = {make_line("a", 5, 5, 30, 10), make_line("b", 8, 30, 30, 10),
                                   make_line("c", 45, 6, 30, 10)};
    PageGraph g1 = build_graph(make_page(lines));
    for (auto& l : lines) {
        l.box.x += 100;
        l.box.y += 50;
    }
    PageGraph g2 = build_graph(make_page(lines));
    REQUIRE(g1.edge_count() == g2.edge_count());
    for (int j = 0; j < g1.edge_count(); ++j) CHECK(g1.edges[j] == g2.edges[j]);
}

TEST_CASE("edges are sorted by orientation, source, target") {
    tgtest::Rng rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<TextLine> lines;
        for (int i = 0; i < 8; ++i)
            lines.push_back(make_line("l" + std::to_string(i), rng.uniform(0, 200),
                                      rng.uniform(0, 200), rng.uniform(15, 60),
                                      rng.uniform(6, 14)));
        PageGraph g = build_graph(make_page(lines));
        for (int j = 1; j < g.edge_count(); ++j) {
            const auto& a = g.edges[j - 1];
            const auto& b = g.edges[j];
            const auto ka = std::tuple(static_cast<int>(a.orientation), a.source, a.target);
            const auto kb = std::tuple(static_cast<int>(b.orientation), b.source, b.target);
            CHECK(ka < kb);
        }
        CHECK(count_edges(g, EdgeOrientation::Horizontal) +
                  count_edges(g, EdgeOrientation::Vertical) ==
              g.edge_count());
    }
}

TEST_CASE("incidence: empty graph gives zero adjacency") {
    PageGraph g;
    g.n = 3;
    IncidencePair inc = incidence(g);
    CHECK(inc.edge_count() == 0);
    Matrix a = inc.adjacency_dense();
    CHECK(a.rows() == 3);
    for (double v : a.data()) CHECK(v == 0);
}

TEST_CASE("incidence: one edge unfolds to the definition") {
    PageGraph g;
    g.n = 2;
    GraphEdge e;
    e.source = 0;
    e.target = 1;
    e.orientation = EdgeOrientation::Vertical;
    g.edges = {e};
    IncidencePair inc = incidence(g);
    Matrix s = inc.source_dense(), t = inc.target_dense(), a = inc.adjacency_dense();
    CHECK(s(0, 0) == 1);
    CHECK(s(1, 0) == 0);
    CHECK(t(0, 0) == 0);
    CHECK(t(1, 0) == 1);
    CHECK(a(0, 1) == 1);
    CHECK(a(0, 0) == 0);
    CHECK(a(1, 0) == 0);
    CHECK(a(1, 1) == 0);
}

TEST_CASE("incidence adjacency equals direct edge iteration") {
    tgtest::Rng rng(41);
    PageGraph g = tgtest::random_graph(6, 9, rng);
    Matrix direct(6, 6);
    for (const auto& e : g.edges) direct(e.source, e.target) += 1;
    Matrix from_st = incidence(g).adjacency_dense();
    CHECK(direct == from_st);
}

TEST_CASE("graph json dump mentions nodes and edges") {
    Page p = make_page({make_line("a", 0, 0, 10, 2), make_line("b", 0, 5, 10, 2)});
    std::string dump = graph_to_json(p, build_graph(p));
    CHECK(dump.find("\"a\"") != std::string::npos);
    CHECK(dump.find("vertical") != std::string::npos);
}
