#include "tablegraph/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "tablegraph/neural.hpp"

namespace tablegraph {

Matrix augment_1conv(const PageGraph& graph, const Matrix& x) {
    const int n = graph.n;
    const int a = x.cols();
    std::vector<std::vector<int>> neighbors(n);
    for (const GraphEdge& e : graph.edges) {
        neighbors[e.source].push_back(e.target);
        neighbors[e.target].push_back(e.source);
    }
    Matrix out(n, 2 * a);
    for (int i = 0; i < n; ++i) {
        auto& nb = neighbors[i];
        std::sort(nb.begin(), nb.end());
        nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
        double* dst = out.row(i);
        const double* src = x.row(i);
        for (int j = 0; j < a; ++j) dst[j] = src[j];
        if (nb.empty()) continue;
        for (int k : nb) {
            const double* nrow = x.row(k);
            for (int j = 0; j < a; ++j) dst[a + j] += nrow[j];
        }
        for (int j = 0; j < a; ++j) dst[a + j] /= static_cast<double>(nb.size());
    }
    return out;
}

Matrix logit_probabilities(const LogitModel& model, const Matrix& x) {
    Matrix logits(x.rows(), kNumLabels);
    for (int i = 0; i < x.rows(); ++i) {
        const double* row = x.row(i);
        for (int j = 0; j < kNumLabels; ++j) {
            double acc = model.bias[j];
            for (int k = 0; k < x.cols(); ++k) acc += row[k] * model.weights(k, j);
            logits(i, j) = acc;
        }
        double* lrow = logits.row(i);
        double mx = *std::max_element(lrow, lrow + kNumLabels);
        double sum = 0;
        for (int j = 0; j < kNumLabels; ++j) {
            lrow[j] = std::exp(lrow[j] - mx);
            sum += lrow[j];
        }
        for (int j = 0; j < kNumLabels; ++j) lrow[j] /= sum;
    }
    return logits;
}

namespace {

int supervised_count(const std::vector<int>& labels) {
    int count = 0;
    for (int l : labels)
        if (l >= 0) count++;
    if (count == 0) throw Error("logit: no supervised rows");
    return count;
}

}  // namespace

double logit_loss(const LogitModel& model, const Matrix& x, const std::vector<int>& labels,
                  double l2) {
    const int count = supervised_count(labels);
    const Matrix probs = logit_probabilities(model, x);
    double loss = 0;
    for (int i = 0; i < x.rows(); ++i)
        if (labels[i] >= 0) loss += -std::log(std::max(probs(i, labels[i]), 1e-300));
    loss /= count;
    for (double w : model.weights.data()) loss += l2 * w * w;
    return loss;
}

void logit_gradients(const LogitModel& model, const Matrix& x, const std::vector<int>& labels,
                     double l2, Matrix& dw, std::vector<double>& db) {
    const int count = supervised_count(labels);
    const Matrix probs = logit_probabilities(model, x);
    dw = Matrix(model.weights.rows(), model.weights.cols());
    db.assign(kNumLabels, 0.0);
    for (int i = 0; i < x.rows(); ++i) {
        if (labels[i] < 0) continue;
        const double* row = x.row(i);
        for (int j = 0; j < kNumLabels; ++j) {
            const double g = (probs(i, j) - (j == labels[i] ? 1.0 : 0.0)) / count;
            db[j] += g;
            for (int k = 0; k < x.cols(); ++k) dw(k, j) += row[k] * g;
        }
    }
    for (std::size_t i = 0; i < dw.data().size(); ++i)
        dw.data()[i] += 2.0 * l2 * model.weights.data()[i];
}

LogitModel train_logit(const Matrix& x, const std::vector<int>& labels,
                       const LogitTrainConfig& config, LogitFlavor flavor) {
    supervised_count(labels);
    LogitModel model;
    model.flavor = flavor;
    model.weights = Matrix(x.cols(), kNumLabels);
    model.bias.assign(kNumLabels, 0.0);

    // Heavy-ball momentum: the 1conv augmentation makes columns collinear and
    // plain descent crawls along the flat directions.
    Matrix dw;
    Matrix vw(x.cols(), kNumLabels);
    std::vector<double> db, vb(kNumLabels, 0.0);
    for (int it = 0; it < config.iterations; ++it) {
        logit_gradients(model, x, labels, config.l2, dw, db);
        for (std::size_t i = 0; i < model.weights.data().size(); ++i) {
            vw.data()[i] = config.momentum * vw.data()[i] + dw.data()[i];
            model.weights.data()[i] -= config.learning_rate * vw.data()[i];
        }
        for (int j = 0; j < kNumLabels; ++j) {
            vb[j] = config.momentum * vb[j] + db[j];
            model.bias[j] -= config.learning_rate * vb[j];
        }
    }
    return model;
}

std::vector<BiesoLabel> predict_logit(const LogitModel& model, const Matrix& x) {
    const Matrix probs = logit_probabilities(model, x);
    std::vector<BiesoLabel> out;
    out.reserve(x.rows());
    for (int i = 0; i < x.rows(); ++i) out.push_back(argmax_label(probs.row(i)));
    return out;
}

}  // namespace tablegraph
