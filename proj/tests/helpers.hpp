#pragma once

#include <string>
#include <vector>

#include "tablegraph/crf.hpp"
#include "tablegraph/docmodel.hpp"
#include "tablegraph/graphbuild.hpp"
#include "tablegraph/matrix.hpp"
#include "tablegraph/rng.hpp"

namespace tgtest {

using namespace tablegraph;

inline TextLine make_line(const std::string& id, double x, double y, double w, double h,
                          int column = -1) {
    TextLine line;
    line.id = id;
    line.box = {x, y, w, h};
    if (column >= 0) line.column = column;
    return line;
}

/// Page sized to hold the given lines, without columns.
inline Page make_page(std::vector<TextLine> lines, double width = 1000, double height = 1400) {
    Page page;
    page.id = "test";
    page.width = width;
    page.height = height;
    page.table_region = {0, 0, width, height};
    page.lines = std::move(lines);
    return page;
}

inline Matrix random_matrix(int rows, int cols, Rng& rng, double lo = -1.0, double hi = 1.0) {
    Matrix m(rows, cols);
    for (double& v : m.data()) v = rng.uniform(lo, hi);
    return m;
}

/// Random DAG-free directed graph for the learners: edges between distinct
/// nodes, random orientation, no duplicate (source, target) pairs.
inline PageGraph random_graph(int n, int m, Rng& rng) {
    PageGraph g;
    g.n = n;
    std::vector<std::pair<int, int>> seen;
    int attempts = 0;
    while (static_cast<int>(g.edges.size()) < m && attempts < 50 * m + 100) {
        ++attempts;
        int a = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
        int b = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        bool dup = false;
        for (auto& p : seen)
            if (p.first == a && p.second == b) dup = true;
        if (dup) continue;
        seen.push_back({a, b});
        GraphEdge e;
        e.source = a;
        e.target = b;
        e.orientation = rng.bernoulli(0.5) ? EdgeOrientation::Vertical
                                           : EdgeOrientation::Horizontal;
        e.overlap = rng.uniform(0.1, 1.0);
        e.gap = rng.uniform(0.0, 30.0);
        g.edges.push_back(e);
    }
    return g;
}

/// Random spanning tree on n nodes (random parent among earlier nodes).
inline PageGraph random_tree(int n, Rng& rng) {
    PageGraph g;
    g.n = n;
    for (int v = 1; v < n; ++v) {
        GraphEdge e;
        e.source = static_cast<int>(rng.below(static_cast<std::uint64_t>(v)));
        e.target = v;
        e.orientation = rng.bernoulli(0.5) ? EdgeOrientation::Vertical
                                           : EdgeOrientation::Horizontal;
        e.overlap = 1.0;
        g.edges.push_back(e);
    }
    return g;
}

inline CrfModel random_crf(int node_dim, int edge_dim, Rng& rng) {
    CrfModel m = zero_crf(node_dim, edge_dim);
    for (double& v : m.theta.data()) v = rng.uniform(-1, 1);
    for (Matrix& block : m.pairwise)
        for (double& v : block.data()) v = rng.uniform(-1, 1);
    return m;
}

/// Brute force over all 5^n labelings; returns the best score.
inline double enumerate_best(const CrfModel& model, const PageGraph& g, const Matrix& x,
                             const Matrix& f, std::vector<int>* best_y = nullptr) {
    std::vector<int> y(g.n, 0);
    double best = -1e300;
    while (true) {
        double s = crf_score(model, g, x, f, y);
        if (s > best) {
            best = s;
            if (best_y) *best_y = y;
        }
        int i = 0;
        while (i < g.n && ++y[i] == kNumLabels) y[i++] = 0;
        if (i == g.n) break;
    }
    return best;
}

}  // namespace tgtest
