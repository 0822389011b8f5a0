#include "tablegraph/graphbuild.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace tablegraph {

namespace {

double interval_overlap(double a_lo, double a_hi, double b_lo, double b_hi) {
    return std::min(a_hi, b_hi) - std::max(a_lo, b_lo);
}

bool intersects_open(const BoundingBox& b, double x0, double x1, double y0, double y1) {
    return b.left() < x1 && b.right() > x0 && b.top() < y1 && b.bottom() > y0;
}

}  // namespace

PageGraph build_graph(const Page& page, const GraphParams& params) {
    PageGraph graph;
    graph.n = static_cast<int>(page.lines.size());
    if (graph.n < 2) return graph;

    const auto& lines = page.lines;
    for (int i = 0; i < graph.n; ++i) {
        for (int j = 0; j < graph.n; ++j) {
            if (i == j) continue;
            const BoundingBox& a = lines[i].box;
            const BoundingBox& b = lines[j].box;

            // Vertical edge: a fully above b with significant x overlap.
            if (a.bottom() <= b.top()) {
                const double ov = interval_overlap(a.left(), a.right(), b.left(), b.right());
                const double norm = std::min(a.w, b.w);
                const double gap = b.top() - a.bottom();
                if (ov > 0 && ov >= params.min_overlap * norm &&
                    (params.max_gap < 0 || gap <= params.max_gap)) {
                    const double x0 = std::max(a.left(), b.left());
                    const double x1 = std::min(a.right(), b.right());
                    bool blocked = false;
                    for (int k = 0; k < graph.n && !blocked; ++k) {
                        if (k == i || k == j) continue;
                        blocked = intersects_open(lines[k].box, x0, x1, a.bottom(), b.top());
                    }
                    if (!blocked)
                        graph.edges.push_back(
                            {i, j, EdgeOrientation::Vertical, ov / norm, gap});
                }
            }

            // Horizontal edge: a fully left of b with significant y overlap.
            if (a.right() <= b.left()) {
                const double ov = interval_overlap(a.top(), a.bottom(), b.top(), b.bottom());
                const double norm = std::min(a.h, b.h);
                const double gap = b.left() - a.right();
                if (ov > 0 && ov >= params.min_overlap * norm &&
                    (params.max_gap < 0 || gap <= params.max_gap)) {
                    const double y0 = std::max(a.top(), b.top());
                    const double y1 = std::min(a.bottom(), b.bottom());
                    bool blocked = false;
                    for (int k = 0; k < graph.n && !blocked; ++k) {
                        if (k == i || k == j) continue;
                        blocked = intersects_open(lines[k].box, a.right(), b.left(), y0, y1);
                    }
                    if (!blocked)
                        graph.edges.push_back(
                            {i, j, EdgeOrientation::Horizontal, ov / norm, gap});
                }
            }
        }
    }

    std::sort(graph.edges.begin(), graph.edges.end(), [](const GraphEdge& a, const GraphEdge& b) {
        return std::tuple(a.orientation, a.source, a.target) <
               std::tuple(b.orientation, b.source, b.target);
    });
    return graph;
}

IncidencePair incidence(const PageGraph& graph) {
    IncidencePair inc;
    inc.n = graph.n;
    inc.source.reserve(graph.edges.size());
    inc.target.reserve(graph.edges.size());
    for (const GraphEdge& e : graph.edges) {
        inc.source.push_back(e.source);
        inc.target.push_back(e.target);
    }
    return inc;
}

Matrix IncidencePair::source_dense() const {
    Matrix s(n, edge_count());
    for (int j = 0; j < edge_count(); ++j) s(source[j], j) = 1.0;
    return s;
}

Matrix IncidencePair::target_dense() const {
    Matrix t(n, edge_count());
    for (int j = 0; j < edge_count(); ++j) t(target[j], j) = 1.0;
    return t;
}

Matrix IncidencePair::adjacency_dense() const {
    Matrix a(n, n);
    for (int j = 0; j < edge_count(); ++j) a(source[j], target[j]) += 1.0;
    return a;
}

std::string graph_to_json(const Page& page, const PageGraph& graph) {
    nlohmann::ordered_json doc;
    doc["page_id"] = page.id;
    doc["nodes"] = nlohmann::ordered_json::array();
    for (const TextLine& line : page.lines) doc["nodes"].push_back(line.id);
    doc["edges"] = nlohmann::ordered_json::array();
    for (const GraphEdge& e : graph.edges) {
        doc["edges"].push_back({{"source", e.source},
                                {"target", e.target},
                                {"orientation",
                                 e.orientation == EdgeOrientation::Vertical ? "vertical"
                                                                            : "horizontal"},
                                {"overlap", e.overlap},
                                {"gap", e.gap}});
    }
    return doc.dump(2) + "\n";
}

}  // namespace tablegraph
