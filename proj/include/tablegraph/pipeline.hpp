#pragma once

#include <vector>

#include "tablegraph/modelio.hpp"

namespace tablegraph {

/// Everything needed to train one learner on a dataset.
struct LearnerSpec {
    LearnerKind kind = LearnerKind::Ecn;
    GraphParams graph;
    EdgeFeatureMode edge_mode = EdgeFeatureMode::Full;
    int normalizer_knots = QuantileNormalizer::kDefaultKnots;
    NeuralConfig neural;      // gcn / ecn
    TrainConfig train;        // gcn / ecn
    LogitTrainConfig logit;   // logit kinds
    CrfTrainConfig crf;       // crf
};

/// Precomputed per-page inputs: the neighbor graph plus normalized features
/// with the edge-feature mode already applied.
struct PagePack {
    PageGraph graph;
    NodeFeatures nodes;
    EdgeFeatures edges;
};

/// Replaces or restricts the edge feature rows per the ablation mode.
EdgeFeatures apply_edge_mode(const EdgeFeatures& f, EdgeFeatureMode mode);

/// Graph construction and raw feature extraction for one page.
PagePack raw_pack(const Page& page, const GraphParams& params);

/// Builds packs for all pages in parallel, fits the quantile normalizer on
/// the raw features (train_normalizer = true) or applies a given one, then
/// applies the edge mode.
std::vector<PagePack> prepare_pages(const std::vector<Page>& pages, const GraphParams& params,
                                    EdgeFeatureMode mode, const QuantileNormalizer& normalizer);
QuantileNormalizer fit_normalizer_on(const std::vector<Page>& pages, const GraphParams& params,
                                     int knots);

/// Final training metrics, filled for whichever learner ran.
struct TrainStats {
    TrainLog neural;
    CrfTrainLog crf;
    double logit_loss = 0;
};

/// Trains the learner described by the spec and packages it with its
/// preprocessing state.
ModelContainer train_learner(const std::vector<Page>& pages, const LearnerSpec& spec,
                             TrainStats* stats = nullptr);

/// Predicts BIESO labels for one page with a trained container.
std::vector<BiesoLabel> predict_page(const ModelContainer& model, const Page& page);

/// Fills line.predicted on every page, parallel across pages.
void predict_dataset(const ModelContainer& model, std::vector<Page>& pages);

}  // namespace tablegraph
