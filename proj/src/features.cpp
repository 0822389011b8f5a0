#include "tablegraph/features.hpp"

#include <algorithm>
#include <cmath>

namespace tablegraph {

namespace {

enum NodeFeature {
    kPageRelLeft = 0,
    kPageRelTop,
    kPageRelRight,
    kPageRelBottom,
    kTableRelWidth,
    kTableRelHeight,
    kInsideTable,
    kAboveTable,
    kBelowTable,
    kColumnRelCenter,
    kDegInVertical,
    kDegOutVertical,
    kDegInHorizontal,
    kDegOutHorizontal,
    kAspectRatio,
    kNodeFeatureCount
};

enum EdgeFeature {
    kIsHorizontal = 0,
    kIsVertical,
    kGapRel,
    kGapLineRel,
    kOverlap,
    kDeltaLeft,
    kDeltaCenter,
    kDeltaRight,
    kDeltaTop,
    kDeltaMiddle,
    kDeltaBottom,
    kDeltaWidth,
    kDeltaHeight,
    kSameColumn,
    kBias,
    kEdgeFeatureCount
};

}  // namespace

std::vector<std::string> node_feature_names() {
    return {"page_rel_left",   "page_rel_top",      "page_rel_right",  "page_rel_bottom",
            "table_rel_width", "table_rel_height",  "inside_table",    "above_table",
            "below_table",     "column_rel_center", "deg_in_vertical", "deg_out_vertical",
            "deg_in_horizontal", "deg_out_horizontal", "aspect_ratio"};
}

std::vector<std::string> edge_feature_names() {
    return {"is_horizontal", "is_vertical",  "gap_rel",      "gap_line_rel", "overlap",
            "delta_left",    "delta_center", "delta_right",  "delta_top",    "delta_middle",
            "delta_bottom",  "delta_width",  "delta_height", "same_column",  "bias"};
}

NodeFeatures node_features(const Page& page, const PageGraph& graph) {
    const int n = static_cast<int>(page.lines.size());
    NodeFeatures out;
    out.names = node_feature_names();
    out.X = Matrix(n, kNodeFeatureCount);

    Matrix deg(n, 4);  // in-vert, out-vert, in-horiz, out-horiz
    for (const GraphEdge& e : graph.edges) {
        const int vert = e.orientation == EdgeOrientation::Vertical ? 0 : 2;
        deg(e.target, vert) += 1.0;
        deg(e.source, vert + 1) += 1.0;
    }

    const BoundingBox& region = page.table_region;
    for (int i = 0; i < n; ++i) {
        const TextLine& line = page.lines[i];
        const BoundingBox& b = line.box;
        double* x = out.X.row(i);
        x[kPageRelLeft] = b.left() / page.width;
        x[kPageRelTop] = b.top() / page.height;
        x[kPageRelRight] = b.right() / page.width;
        x[kPageRelBottom] = b.bottom() / page.height;
        x[kTableRelWidth] = b.w / region.w;
        x[kTableRelHeight] = b.h / region.h;
        const double cx = b.center_x(), cy = b.center_y();
        const bool inside = cx >= region.left() && cx <= region.right() &&
                            cy >= region.top() && cy <= region.bottom();
        x[kInsideTable] = inside ? 1.0 : 0.0;
        x[kAboveTable] = cy < region.top() ? 1.0 : 0.0;
        x[kBelowTable] = cy > region.bottom() ? 1.0 : 0.0;
        if (line.column) {
            const BoundingBox& col = page.columns[*line.column].box;
            x[kColumnRelCenter] = (cx - col.left()) / col.w;
        }
        x[kDegInVertical] = deg(i, 0);
        x[kDegOutVertical] = deg(i, 1);
        x[kDegInHorizontal] = deg(i, 2);
        x[kDegOutHorizontal] = deg(i, 3);
        x[kAspectRatio] = b.h / b.w;
    }
    return out;
}

EdgeFeatures edge_features(const Page& page, const PageGraph& graph) {
    const int m = graph.edge_count();
    EdgeFeatures out;
    out.names = edge_feature_names();
    out.F = Matrix(kEdgeFeatureCount, m);

    for (int j = 0; j < m; ++j) {
        const GraphEdge& e = graph.edges[j];
        const TextLine& src = page.lines[e.source];
        const TextLine& tgt = page.lines[e.target];
        const BoundingBox& a = src.box;
        const BoundingBox& b = tgt.box;
        const bool vertical = e.orientation == EdgeOrientation::Vertical;

        const bool same_column = src.column && tgt.column && *src.column == *tgt.column;
        const double width_norm =
            same_column ? page.columns[*src.column].box.w : page.width;

        out.F(kIsHorizontal, j) = vertical ? 0.0 : 1.0;
        out.F(kIsVertical, j) = vertical ? 1.0 : 0.0;
        out.F(kGapRel, j) = e.gap / (vertical ? page.height : page.width);
        // gap in local line-height units: comparable across writing sizes
        out.F(kGapLineRel, j) = std::min(e.gap / std::max(0.5 * (a.h + b.h), 1e-9), 8.0) / 8.0;
        out.F(kOverlap, j) = e.overlap;
        out.F(kDeltaLeft, j) = std::abs(a.left() - b.left()) / width_norm;
        out.F(kDeltaCenter, j) = std::abs(a.center_x() - b.center_x()) / width_norm;
        out.F(kDeltaRight, j) = std::abs(a.right() - b.right()) / width_norm;
        out.F(kDeltaTop, j) = std::abs(a.top() - b.top()) / page.height;
        out.F(kDeltaMiddle, j) = std::abs(a.center_y() - b.center_y()) / page.height;
        out.F(kDeltaBottom, j) = std::abs(a.bottom() - b.bottom()) / page.height;
        out.F(kDeltaWidth, j) = (a.w - b.w) / page.width;
        out.F(kDeltaHeight, j) = (a.h - b.h) / page.height;
        out.F(kSameColumn, j) = same_column ? 1.0 : 0.0;
        out.F(kBias, j) = 1.0;
    }
    return out;
}

namespace {

// Empirical quantile with linear interpolation between order statistics.
double quantile(const std::vector<double>& sorted, double level) {
    if (sorted.empty()) return 0.0;
    const double pos = level * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::vector<double> fit_knots(std::vector<double>& values, int knots) {
    std::sort(values.begin(), values.end());
    std::vector<double> out(knots);
    for (int i = 0; i < knots; ++i)
        out[i] = quantile(values, static_cast<double>(i) / (knots - 1));
    return out;
}

void apply_knots(const std::vector<std::vector<double>>& knots, Matrix& m, bool by_row,
                 const char* what) {
    const int dim = by_row ? m.rows() : m.cols();
    if (dim != static_cast<int>(knots.size()))
        throw Error(std::string("normalizer dimension mismatch for ") + what + ": fitted " +
                    std::to_string(knots.size()) + ", got " + std::to_string(dim));
    for (int f = 0; f < dim; ++f) {
        const auto& k = knots[f];
        if (by_row) {
            for (int j = 0; j < m.cols(); ++j)
                m(f, j) = QuantileNormalizer::transform(k, m(f, j));
        } else {
            for (int i = 0; i < m.rows(); ++i)
                m(i, f) = QuantileNormalizer::transform(k, m(i, f));
        }
    }
}

}  // namespace

QuantileNormalizer QuantileNormalizer::fit(const std::vector<NodeFeatures>& nodes,
                                           const std::vector<EdgeFeatures>& edges, int knots) {
    int node_dim = 0, edge_dim = 0;
    std::size_t total_lines = 0;
    for (const auto& nf : nodes) {
        if (nf.X.rows() > 0) node_dim = nf.X.cols();
        total_lines += static_cast<std::size_t>(nf.X.rows());
    }
    for (const auto& ef : edges)
        if (ef.F.cols() > 0) edge_dim = ef.F.rows();
    if (total_lines == 0) throw Error("cannot fit normalizer on an empty training set");

    QuantileNormalizer norm;
    norm.node_knots_.resize(node_dim);
    for (int f = 0; f < node_dim; ++f) {
        std::vector<double> values;
        values.reserve(total_lines);
        for (const auto& nf : nodes)
            for (int i = 0; i < nf.X.rows(); ++i) values.push_back(nf.X(i, f));
        norm.node_knots_[f] = fit_knots(values, knots);
    }
    if (edge_dim == 0 && !edges.empty()) edge_dim = edges.front().F.rows();
    norm.edge_knots_.resize(edge_dim);
    for (int f = 0; f < edge_dim; ++f) {
        std::vector<double> values;
        for (const auto& ef : edges)
            for (int j = 0; j < ef.F.cols(); ++j) values.push_back(ef.F(f, j));
        if (values.empty()) values.push_back(0.0);
        norm.edge_knots_[f] = fit_knots(values, knots);
    }
    return norm;
}

double QuantileNormalizer::transform(const std::vector<double>& knots, double v) {
    const int k = static_cast<int>(knots.size());
    if (k == 0) return 0.0;
    if (knots.front() == knots.back()) return 0.0;  // degenerate: constant feature
    if (v <= knots.front()) return 0.0;
    if (v >= knots.back()) return 1.0;
    // last knot <= v; ties collapse to the highest index so knot values map
    // to their own quantile level
    const auto it = std::upper_bound(knots.begin(), knots.end(), v);
    const int hi = static_cast<int>(it - knots.begin());
    const int lo = hi - 1;
    const double step = 1.0 / (k - 1);
    if (knots[lo] == v) return lo * step;
    return lo * step + (v - knots[lo]) / (knots[hi] - knots[lo]) * step;
}

void QuantileNormalizer::apply(NodeFeatures& f) const {
    apply_knots(node_knots_, f.X, /*by_row=*/false, "node features");
}

void QuantileNormalizer::apply(EdgeFeatures& f) const {
    apply_knots(edge_knots_, f.F, /*by_row=*/true, "edge features");
}

}  // namespace tablegraph
