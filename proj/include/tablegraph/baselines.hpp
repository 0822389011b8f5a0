#pragma once

#include <vector>

#include "tablegraph/docmodel.hpp"
#include "tablegraph/graphbuild.hpp"
#include "tablegraph/matrix.hpp"

namespace tablegraph {

enum class LogitFlavor { Standard, OneConv };

/// Multinomial logistic regression over node features, classifying each
/// node independently. OneConv first concatenates each node's features with
/// the mean of its undirected neighbors' features.
struct LogitModel {
    Matrix weights;  // feature_dim x 5
    std::vector<double> bias;
    LogitFlavor flavor = LogitFlavor::Standard;
};

struct LogitTrainConfig {
    double learning_rate = 1.0;
    int iterations = 500;
    double l2 = 1e-4;
    double momentum = 0.9;  // heavy-ball coefficient, 0 = plain descent
};

/// Row i = X_i concatenated with the mean of X over i's undirected
/// neighbors (all zeros for an isolated node).
Matrix augment_1conv(const PageGraph& graph, const Matrix& x);

/// Mean cross-entropy over supervised rows (labels[i] >= 0) plus
/// l2 * sum of squared weights (bias excluded).
double logit_loss(const LogitModel& model, const Matrix& x, const std::vector<int>& labels,
                  double l2);
void logit_gradients(const LogitModel& model, const Matrix& x, const std::vector<int>& labels,
                     double l2, Matrix& dw, std::vector<double>& db);

/// Full-batch gradient descent from zero initialization (the objective is
/// convex, so no seed is involved).
LogitModel train_logit(const Matrix& x, const std::vector<int>& labels,
                       const LogitTrainConfig& config, LogitFlavor flavor = LogitFlavor::Standard);

Matrix logit_probabilities(const LogitModel& model, const Matrix& x);
std::vector<BiesoLabel> predict_logit(const LogitModel& model, const Matrix& x);

}  // namespace tablegraph
