#pragma once

#include <string>
#include <vector>

#include "tablegraph/docmodel.hpp"
#include "tablegraph/matrix.hpp"

namespace tablegraph {

enum class EdgeOrientation : std::uint8_t { Horizontal = 0, Vertical = 1 };

/// Directed neighbor edge. Vertical edges run top to bottom, horizontal
/// edges left to right. overlap is the shared projection length divided by
/// the smaller of the two extents, gap the distance between the facing box
/// edges.
struct GraphEdge {
    int source = 0;
    int target = 0;
    EdgeOrientation orientation = EdgeOrientation::Horizontal;
    double overlap = 0;  // in (0, 1]
    double gap = 0;      // >= 0

    bool operator==(const GraphEdge&) const = default;
};

/// Neighbor graph of a page. Node i is line i of the page; self-loops are
/// never stored here (the GCN adds them in the model).
struct PageGraph {
    int n = 0;
    std::vector<GraphEdge> edges;

    int edge_count() const { return static_cast<int>(edges.size()); }
};

struct GraphParams {
    /// Projection overlap must reach this fraction of the narrower extent.
    double min_overlap = 0.25;
    /// Maximum gap between facing edges; < 0 means unlimited.
    double max_gap = -1.0;
};

/// Incidence structures of the directed graph: column j of the source matrix
/// has its single 1 at row source(j), likewise for targets. Kept in index
/// form; dense views are provided for checks and small-scale math.
struct IncidencePair {
    int n = 0;
    std::vector<int> source;  // size m
    std::vector<int> target;  // size m

    int edge_count() const { return static_cast<int>(source.size()); }
    Matrix source_dense() const;
    Matrix target_dense() const;
    /// Directed adjacency (source_dense * target_dense^T), counts per pair.
    Matrix adjacency_dense() const;
};

/// Builds the neighbor graph: two lines are linked when their projections
/// overlap significantly on one axis, they are disjoint along the other
/// axis, and no third line's box intersects the open corridor between them.
/// Edges are sorted by (orientation, source, target).
PageGraph build_graph(const Page& page, const GraphParams& params = {});

IncidencePair incidence(const PageGraph& graph);

/// Debug dump of the graph as JSON (nodes, edges with orientation, overlap
/// and gap) for external visualization.
std::string graph_to_json(const Page& page, const PageGraph& graph);

}  // namespace tablegraph
