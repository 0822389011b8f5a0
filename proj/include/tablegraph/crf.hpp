#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "tablegraph/docmodel.hpp"
#include "tablegraph/graphbuild.hpp"
#include "tablegraph/matrix.hpp"
#include "tablegraph/rng.hpp"

namespace tablegraph {

/// Linear-chain-free graph CRF: g(x, y) = sum_v theta[y_v] . X_v
///                                      + sum_e vartheta[orient(e)][y_s, y_t] . F_e
/// Pairwise weights are typed by edge orientation; within a type the directed
/// edge feature vector disambiguates the source/target roles.
struct CrfModel {
    Matrix theta;                      // 5 x node_dim
    std::array<Matrix, 2> pairwise;    // per orientation: 25 x edge_dim, row = y_s * 5 + y_t

    int node_dim() const { return theta.cols(); }
    int edge_dim() const { return pairwise[0].cols(); }
};

CrfModel zero_crf(int node_dim, int edge_dim);

/// Exact evaluation of the potential sum for one labeling.
double crf_score(const CrfModel& model, const PageGraph& graph, const Matrix& x, const Matrix& f,
                 const std::vector<int>& y);

/// Unary score table (n x 5) and per-edge pairwise tables (5 x 5 each).
Matrix crf_unaries(const CrfModel& model, const Matrix& x);
std::vector<Matrix> crf_edge_potentials(const CrfModel& model, const PageGraph& graph,
                                        const Matrix& f);

/// MAP labeling. Exact max-sum on forest components; on cyclic components the
/// best of unary argmax, loopy max-product, and ICM from seeded restarts
/// (each refined by ICM). Deterministic per seed; ties resolve toward the
/// earlier label in B < I < E < S < O and the earlier candidate.
std::vector<int> map_inference(const CrfModel& model, const PageGraph& graph, const Matrix& x,
                               const Matrix& f, std::uint64_t seed = 0);

/// MAP of the Hamming-loss-augmented score
///   g(x, y) + loss_scale * |{v : y_v != gold_v}|.
/// loss_scale = 0 reduces to map_inference exactly.
std::vector<int> loss_augmented_map(const CrfModel& model, const PageGraph& graph, const Matrix& x,
                                    const Matrix& f, const std::vector<int>& gold,
                                    double loss_scale = 1.0, std::uint64_t seed = 0);

/// One training instance: a page graph with normalized features and full
/// gold labels.
struct CrfInstance {
    PageGraph graph;
    Matrix x;  // n x node_dim
    Matrix f;  // edge_dim x m
    std::vector<int> labels;
    std::string page_id;
};

struct CrfTrainConfig {
    int iterations = 1500;   // subgradient steps (one instance per step)
    double lambda = 0.01;    // L2 strength in  lambda * ||w||^2 + mean hinge
    std::uint64_t seed = 0;
    int objective_every = 25;  // full-objective checkpoints for best-iterate tracking
};

struct CrfTrainLog {
    int steps = 0;
    double best_objective = 0;
    int best_step = -1;
};

/// Pegasos-style stochastic subgradient on the structured hinge with
/// Hamming-loss-augmented inference. Returns the checkpointed iterate with
/// the best full training objective. iterations = 0 returns the zero model.
CrfModel train_crf(const std::vector<CrfInstance>& instances, const CrfTrainConfig& config,
                   CrfTrainLog* log = nullptr);

std::vector<BiesoLabel> predict_crf(const CrfModel& model, const PageGraph& graph, const Matrix& x,
                                    const Matrix& f, std::uint64_t seed = 0);

}  // namespace tablegraph
