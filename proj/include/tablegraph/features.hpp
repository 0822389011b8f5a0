#pragma once

#include <string>
#include <vector>

#include "tablegraph/docmodel.hpp"
#include "tablegraph/graphbuild.hpp"
#include "tablegraph/matrix.hpp"

namespace tablegraph {

/// Version tag of the geometric feature set below. Stored in model files so
/// a model is never applied to features it was not trained on.
inline constexpr const char* kFeatureSetVersion = "tablegraph-features-v1";

/// Node feature matrix, one row per line. X is n x a.
struct NodeFeatures {
    Matrix X;
    std::vector<std::string> names;
};

/// Edge feature matrix in features-by-edges layout (F is d x m), so an edge
/// convolution's gate score is a plain row-vector product with F.
struct EdgeFeatures {
    Matrix F;
    std::vector<std::string> names;
};

std::vector<std::string> node_feature_names();
std::vector<std::string> edge_feature_names();

/// Geometric per-line features: page-relative box coordinates, table-region
/// relative size, inside/above/below flags, position within the assigned
/// column, per-orientation degrees and aspect ratio.
NodeFeatures node_features(const Page& page, const PageGraph& graph);

/// Geometric per-edge features: orientation one-hot, normalized gap and
/// projection overlap, left/center/right justification deltas, top/middle/
/// bottom alignment deltas, size deltas, same-column flag and a constant 1.
EdgeFeatures edge_features(const Page& page, const PageGraph& graph);

/// Per-feature monotone map onto [0, 1] built from empirical quantiles of
/// the training data (k knots at levels i/(k-1)). A constant feature maps
/// to 0.
class QuantileNormalizer {
public:
    static constexpr int kDefaultKnots = 16;

    QuantileNormalizer() = default;

    /// Fits node and edge knots on the raw training features.
    static QuantileNormalizer fit(const std::vector<NodeFeatures>& nodes,
                                  const std::vector<EdgeFeatures>& edges,
                                  int knots = kDefaultKnots);

    /// Normalizes in place; throws on dimension mismatch.
    void apply(NodeFeatures& f) const;
    void apply(EdgeFeatures& f) const;

    int node_dim() const { return static_cast<int>(node_knots_.size()); }
    int edge_dim() const { return static_cast<int>(edge_knots_.size()); }
    bool fitted() const { return !node_knots_.empty(); }

    const std::vector<std::vector<double>>& node_knots() const { return node_knots_; }
    const std::vector<std::vector<double>>& edge_knots() const { return edge_knots_; }
    void set_knots(std::vector<std::vector<double>> node_knots,
                   std::vector<std::vector<double>> edge_knots) {
        node_knots_ = std::move(node_knots);
        edge_knots_ = std::move(edge_knots);
    }

    static double transform(const std::vector<double>& knots, double v);

private:
    std::vector<std::vector<double>> node_knots_;
    std::vector<std::vector<double>> edge_knots_;
};

}  // namespace tablegraph
