#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tablegraph/docmodel.hpp"
#include "tablegraph/graphbuild.hpp"
#include "tablegraph/kernels.hpp"
#include "tablegraph/matrix.hpp"
#include "tablegraph/rng.hpp"

namespace tablegraph {

// Graph learners over per-page tensors.
//
// GCN layer:   H_out = relu(A_hat * H * W)   with A_hat the symmetrically
//              normalized adjacency including self-loops.
// ECN layer:   P = H * W; each convolution c scores every edge with a gate
//              relu(w_c . F_j) and accumulates gated neighbor projections;
//              the variant decides how the blocks combine with P:
//                FullStacking  H_out = relu(P ++ C_1 ++ ... ++ C_L)
//                SumStacking   H_out = relu(P ++ mean_c C_c)
//                Adding        H_out = relu(P + mean_c C_c)
// A final linear layer maps the last hidden width to the 5 BIESO logits,
// followed by a row-wise softmax.

enum class ModelKind : std::uint8_t { Gcn = 0, Ecn = 1, Logit = 2, Crf = 3 };

enum class EcnVariant : std::uint8_t { FullStacking = 0, SumStacking = 1, Adding = 2 };

/// Gate direction handling. Forward aggregates along edge direction only
/// (a node receives its targets); Both adds a second gate set aggregating
/// sources into targets.
enum class DirectionMode : std::uint8_t { Forward = 0, Both = 1 };

struct EdgeGate {
    std::vector<double> forward_w;   // one weight per edge feature
    std::vector<double> backward_w;  // empty unless DirectionMode::Both
};

struct NeuralLayer {
    Matrix weights;               // in_width x hidden_width
    std::vector<EdgeGate> gates;  // empty for GCN layers
};

struct NeuralConfig {
    int layers = 3;
    int convolutions = 10;  // gates per layer (ECN only)
    int hidden_width = 32;
    EcnVariant variant = EcnVariant::FullStacking;
    DirectionMode direction = DirectionMode::Both;
    double dropout = 0.2;  // on hidden activations, training only
};

struct NeuralModel {
    ModelKind kind = ModelKind::Ecn;
    NeuralConfig config;
    int node_dim = 0;
    int edge_dim = 0;
    std::vector<NeuralLayer> layers;
    Matrix out_weights;  // last hidden width x 5
    std::vector<double> out_bias;
    std::uint64_t seed = 0;

    int output_width(int layer) const;  // width after layer's combine step
    int input_width(int layer) const;
};

/// Everything the learners need from one page, with features already
/// normalized. labels[i] < 0 marks an unsupervised node.
struct GraphTensors {
    std::string page_id;
    int n = 0;
    int m = 0;
    Matrix X;  // n x node_dim
    Matrix F;  // edge_dim x m
    std::vector<int> edge_src, edge_tgt;
    EdgeIndex by_source;  // receiver = edge source
    EdgeIndex by_target;  // receiver = edge target
    SparseRows gcn_adj;   // normalized adjacency with self-loops
    std::vector<int> labels;
};

EdgeIndex build_edge_index(int n, const std::vector<int>& receiver,
                                    const std::vector<int>& other);
SparseRows gcn_normalized_adjacency(int n, const std::vector<GraphEdge>& edges);

GraphTensors assemble_tensors(const Page& page, const PageGraph& graph, Matrix x, Matrix f);

struct LayerCache {
    Matrix input;
    Matrix mixed;  // GCN only: A_hat * H
    Matrix proj;   // P (ECN) or A_hat*H*W (GCN, pre-activation)
    std::vector<std::vector<double>> gate_pre;  // per gate: forward then backward scores
    std::vector<std::vector<double>> gate_act;
    Matrix pre_activation;
    Matrix output;                    // after relu and (in training) dropout
    std::vector<double> dropout_mask;  // empty outside training
};

struct ForwardCache {
    std::vector<LayerCache> layers;
    Matrix logits;
    Matrix probs;
};

/// Full forward pass. Pass a RNG to enable dropout (training); null keeps
/// the pass deterministic (inference).
ForwardCache forward(const NeuralModel& model, const GraphTensors& g, Rng* dropout_rng = nullptr);

/// Inference-mode class probabilities (rows sum to 1).
Matrix gcn_forward(const NeuralModel& model, const GraphTensors& g);
Matrix ecn_forward(const NeuralModel& model, const GraphTensors& g);

/// Mean negative log-likelihood over supervised nodes; throws if none.
double nll_loss(const Matrix& probs, const std::vector<int>& labels);

struct NeuralGradients {
    std::vector<NeuralLayer> layers;
    Matrix out_weights;
    std::vector<double> out_bias;
};

NeuralGradients zero_like(const NeuralModel& model);

/// Reverse-mode gradients of the masked NLL for one page.
NeuralGradients backward(const NeuralModel& model, const GraphTensors& g,
                         const ForwardCache& cache, const std::vector<int>& labels);

struct TrainConfig {
    double learning_rate = 0.001;
    int max_epochs = 2000;
    double validation_fraction = 0.1;
    int patience = 50;
    std::uint64_t seed = 0;
};

struct TrainLog {
    int epochs_run = 0;
    int best_epoch = -1;
    double best_validation_loss = 0;
    double final_train_loss = 0;
};

/// Trains with per-page Adam steps in seeded shuffled page order, dropout on
/// hidden activations, and early stopping on a held-out validation split.
/// Returns the parameters of the best validation epoch. Deterministic per
/// seed.
NeuralModel train(const std::vector<GraphTensors>& pages, ModelKind kind,
                  const NeuralConfig& config, const TrainConfig& train_config,
                  TrainLog* log = nullptr);

/// Argmax labels; ties resolve to the earlier label in B < I < E < S < O.
std::vector<BiesoLabel> predict(const NeuralModel& model, const GraphTensors& g);
BiesoLabel argmax_label(const double* row);

}  // namespace tablegraph
