#pragma once

#include <cstdint>
#include <string>

#include "tablegraph/baselines.hpp"
#include "tablegraph/crf.hpp"
#include "tablegraph/features.hpp"
#include "tablegraph/graphbuild.hpp"
#include "tablegraph/neural.hpp"

namespace tablegraph {

enum class LearnerKind { LogitStandard, Logit1Conv, Gcn, Ecn, Crf };

std::string learner_kind_name(LearnerKind kind);
LearnerKind learner_kind_from_name(const std::string& name);

/// Controls which edge features reach the ECN gates and the CRF pairwise
/// terms (the ablations of the full geometric set).
enum class EdgeFeatureMode { Full, Const1, OrientationOnly };

std::string edge_feature_mode_name(EdgeFeatureMode mode);
EdgeFeatureMode edge_feature_mode_from_name(const std::string& name);

/// Versioned on-disk model: the trained parameters together with everything
/// needed to reproduce the training-time preprocessing (graph parameters,
/// feature set tag, fitted normalizer).
struct ModelContainer {
    LearnerKind kind = LearnerKind::Ecn;
    GraphParams graph;
    EdgeFeatureMode edge_mode = EdgeFeatureMode::Full;
    QuantileNormalizer normalizer;
    std::vector<std::string> node_feature_names;
    std::vector<std::string> edge_feature_names;
    std::string feature_set = kFeatureSetVersion;
    std::uint64_t seed = 0;

    NeuralModel neural;  // gcn / ecn
    LogitModel logit;    // logit kinds
    CrfModel crf;        // crf
};

std::string model_to_json(const ModelContainer& model);
ModelContainer model_from_json(const std::string& text);

void save_model(const ModelContainer& model, const std::string& path);
ModelContainer load_model(const std::string& path);

}  // namespace tablegraph
