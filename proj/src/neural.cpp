#include "tablegraph/neural.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tablegraph {

namespace {

std::vector<double> gate_scores(const Matrix& f, const std::vector<double>& w) {
    const int m = f.cols();
    std::vector<double> out(m, 0.0);
    for (int k = 0; k < f.rows(); ++k) {
        const double wk = w[k];
        if (wk == 0.0) continue;
        const double* row = f.row(k);
        for (int j = 0; j < m; ++j) out[j] += wk * row[j];
    }
    return out;
}

std::vector<double> relu_vec(const std::vector<double>& v) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] > 0 ? v[i] : 0.0;
    return out;
}

void copy_cols(const Matrix& src, Matrix& dst, int col_offset) {
    for (int i = 0; i < src.rows(); ++i) {
        const double* s = src.row(i);
        double* d = dst.row(i) + col_offset;
        for (int j = 0; j < src.cols(); ++j) d[j] = s[j];
    }
}

Matrix slice_cols(const Matrix& src, int col_offset, int width) {
    Matrix out(src.rows(), width);
    for (int i = 0; i < src.rows(); ++i) {
        const double* s = src.row(i) + col_offset;
        double* d = out.row(i);
        for (int j = 0; j < width; ++j) d[j] = s[j];
    }
    return out;
}

void scale_inplace(Matrix& m, double a) {
    for (double& v : m.data()) v *= a;
}

void add_inplace(Matrix& dst, const Matrix& src) {
    for (std::size_t i = 0; i < dst.data().size(); ++i) dst.data()[i] += src.data()[i];
}

void softmax_rows(Matrix& m) {
    for (int i = 0; i < m.rows(); ++i) {
        double* row = m.row(i);
        double mx = row[0];
        for (int j = 1; j < m.cols(); ++j) mx = std::max(mx, row[j]);
        double sum = 0;
        for (int j = 0; j < m.cols(); ++j) {
            row[j] = std::exp(row[j] - mx);
            sum += row[j];
        }
        for (int j = 0; j < m.cols(); ++j) row[j] /= sum;
    }
}

// Parameter arrays of a model (or gradient mirror) in a fixed traversal
// order, so the optimizer state lines up across calls.
std::vector<std::vector<double>*> param_arrays(std::vector<NeuralLayer>& layers,
                                               Matrix& out_weights,
                                               std::vector<double>& out_bias) {
    std::vector<std::vector<double>*> out;
    for (NeuralLayer& layer : layers) {
        out.push_back(&layer.weights.data());
        for (EdgeGate& gate : layer.gates) {
            out.push_back(&gate.forward_w);
            if (!gate.backward_w.empty()) out.push_back(&gate.backward_w);
        }
    }
    out.push_back(&out_weights.data());
    out.push_back(&out_bias);
    return out;
}

}  // namespace

int NeuralModel::output_width(int layer) const {
    (void)layer;
    const int p = config.hidden_width;
    if (kind == ModelKind::Gcn) return p;
    switch (config.variant) {
        case EcnVariant::FullStacking: return (config.convolutions + 1) * p;
        case EcnVariant::SumStacking: return 2 * p;
        case EcnVariant::Adding: return p;
    }
    return p;
}

int NeuralModel::input_width(int layer) const {
    return layer == 0 ? node_dim : output_width(layer - 1);
}

EdgeIndex build_edge_index(int n, const std::vector<int>& receiver,
                                    const std::vector<int>& other) {
    EdgeIndex idx;
    const int m = static_cast<int>(receiver.size());
    std::vector<int> counts(n, 0);
    for (int r : receiver) counts[r]++;
    idx.offsets.assign(n + 1, 0);
    for (int i = 0; i < n; ++i) idx.offsets[i + 1] = idx.offsets[i] + counts[i];
    idx.edge_ids.assign(m, 0);
    idx.other.assign(m, 0);
    std::vector<int> cursor(idx.offsets.begin(), idx.offsets.end() - 1);
    for (int j = 0; j < m; ++j) {
        const int slot = cursor[receiver[j]]++;
        idx.edge_ids[slot] = j;
        idx.other[slot] = other[j];
    }
    return idx;
}

SparseRows gcn_normalized_adjacency(int n, const std::vector<GraphEdge>& edges) {
    std::vector<std::vector<int>> und(n);
    for (const GraphEdge& e : edges) {
        und[e.source].push_back(e.target);
        und[e.target].push_back(e.source);
    }
    std::vector<int> degree(n);
    for (int i = 0; i < n; ++i) {
        und[i].push_back(i);  // self-loop
        std::sort(und[i].begin(), und[i].end());
        und[i].erase(std::unique(und[i].begin(), und[i].end()), und[i].end());
        degree[i] = static_cast<int>(und[i].size());
    }
    SparseRows adj;
    adj.n = n;
    adj.offsets.assign(n + 1, 0);
    for (int i = 0; i < n; ++i) adj.offsets[i + 1] = adj.offsets[i] + degree[i];
    for (int i = 0; i < n; ++i) {
        for (int j : und[i]) {
            adj.cols.push_back(j);
            adj.values.push_back(1.0 / std::sqrt(static_cast<double>(degree[i]) * degree[j]));
        }
    }
    return adj;
}

GraphTensors assemble_tensors(const Page& page, const PageGraph& graph, Matrix x, Matrix f) {
    GraphTensors g;
    g.page_id = page.id;
    g.n = graph.n;
    g.m = graph.edge_count();
    g.X = std::move(x);
    g.F = std::move(f);
    g.edge_src.reserve(g.m);
    g.edge_tgt.reserve(g.m);
    for (const GraphEdge& e : graph.edges) {
        g.edge_src.push_back(e.source);
        g.edge_tgt.push_back(e.target);
    }
    g.by_source = build_edge_index(g.n, g.edge_src, g.edge_tgt);
    g.by_target = build_edge_index(g.n, g.edge_tgt, g.edge_src);
    g.gcn_adj = gcn_normalized_adjacency(g.n, graph.edges);
    g.labels.assign(g.n, -1);
    for (int i = 0; i < g.n; ++i)
        if (page.lines[i].label) g.labels[i] = static_cast<int>(*page.lines[i].label);
    return g;
}

ForwardCache forward(const NeuralModel& model, const GraphTensors& g, Rng* dropout_rng) {
    if (g.X.cols() != model.node_dim)
        throw Error("node feature dimension mismatch: model " + std::to_string(model.node_dim) +
                    ", page '" + g.page_id + "' has " + std::to_string(g.X.cols()));
    if (model.kind == ModelKind::Ecn && g.m > 0 && g.F.rows() != model.edge_dim)
        throw Error("edge feature dimension mismatch: model " + std::to_string(model.edge_dim) +
                    ", page '" + g.page_id + "' has " + std::to_string(g.F.rows()));

    ForwardCache cache;
    cache.layers.resize(model.layers.size());
    const int n = g.n;
    const int num_layers = static_cast<int>(model.layers.size());
    const double keep = 1.0 - model.config.dropout;

    Matrix h = g.X;
    for (int li = 0; li < num_layers; ++li) {
        const NeuralLayer& layer = model.layers[li];
        LayerCache& lc = cache.layers[li];
        lc.input = h;

        if (model.kind == ModelKind::Gcn) {
            kernels::spmm(g.gcn_adj, h, lc.mixed);
            kernels::matmul(lc.mixed, layer.weights, lc.proj);
            lc.pre_activation = lc.proj;
        } else {
            kernels::matmul(h, layer.weights, lc.proj);
            const int p = lc.proj.cols();
            const int conv_count = static_cast<int>(layer.gates.size());
            const bool both = model.config.direction == DirectionMode::Both;

            std::vector<Matrix> blocks(conv_count);
            lc.gate_pre.resize(static_cast<std::size_t>(conv_count) * (both ? 2 : 1));
            lc.gate_act.resize(lc.gate_pre.size());
            for (int c = 0; c < conv_count; ++c) {
                blocks[c] = Matrix(n, p);
                const std::size_t slot = static_cast<std::size_t>(c) * (both ? 2 : 1);
                lc.gate_pre[slot] = gate_scores(g.F, layer.gates[c].forward_w);
                lc.gate_act[slot] = relu_vec(lc.gate_pre[slot]);
                kernels::gated_accumulate(g.by_source, lc.gate_act[slot], lc.proj, blocks[c]);
                if (both) {
                    lc.gate_pre[slot + 1] = gate_scores(g.F, layer.gates[c].backward_w);
                    lc.gate_act[slot + 1] = relu_vec(lc.gate_pre[slot + 1]);
                    kernels::gated_accumulate(g.by_target, lc.gate_act[slot + 1], lc.proj,
                                              blocks[c]);
                }
            }

            switch (model.config.variant) {
                case EcnVariant::FullStacking: {
                    lc.pre_activation = Matrix(n, (conv_count + 1) * p);
                    copy_cols(lc.proj, lc.pre_activation, 0);
                    for (int c = 0; c < conv_count; ++c)
                        copy_cols(blocks[c], lc.pre_activation, (c + 1) * p);
                    break;
                }
                case EcnVariant::SumStacking: {
                    Matrix mean(n, p);
                    for (int c = 0; c < conv_count; ++c) add_inplace(mean, blocks[c]);
                    if (conv_count > 0) scale_inplace(mean, 1.0 / conv_count);
                    lc.pre_activation = Matrix(n, 2 * p);
                    copy_cols(lc.proj, lc.pre_activation, 0);
                    copy_cols(mean, lc.pre_activation, p);
                    break;
                }
                case EcnVariant::Adding: {
                    lc.pre_activation = lc.proj;
                    Matrix mean(n, p);
                    for (int c = 0; c < conv_count; ++c) add_inplace(mean, blocks[c]);
                    if (conv_count > 0) scale_inplace(mean, 1.0 / conv_count);
                    add_inplace(lc.pre_activation, mean);
                    break;
                }
            }
        }

        lc.output = lc.pre_activation;
        for (double& v : lc.output.data())
            if (v < 0) v = 0;

        if (dropout_rng && model.config.dropout > 0) {
            lc.dropout_mask.resize(lc.output.data().size());
            for (std::size_t i = 0; i < lc.dropout_mask.size(); ++i) {
                lc.dropout_mask[i] = dropout_rng->uniform() < keep ? 1.0 / keep : 0.0;
                lc.output.data()[i] *= lc.dropout_mask[i];
            }
        }
        h = lc.output;
    }

    kernels::matmul(h, model.out_weights, cache.logits);
    for (int i = 0; i < cache.logits.rows(); ++i)
        for (int j = 0; j < cache.logits.cols(); ++j) cache.logits(i, j) += model.out_bias[j];
    cache.probs = cache.logits;
    softmax_rows(cache.probs);
    return cache;
}

Matrix gcn_forward(const NeuralModel& model, const GraphTensors& g) {
    if (model.kind != ModelKind::Gcn) throw Error("gcn_forward requires a GCN model");
    return forward(model, g).probs;
}

Matrix ecn_forward(const NeuralModel& model, const GraphTensors& g) {
    if (model.kind != ModelKind::Ecn) throw Error("ecn_forward requires an ECN model");
    return forward(model, g).probs;
}

double nll_loss(const Matrix& probs, const std::vector<int>& labels) {
    double total = 0;
    int count = 0;
    for (int i = 0; i < probs.rows(); ++i) {
        if (labels[i] < 0) continue;
        total += -std::log(std::max(probs(i, labels[i]), 1e-300));
        count++;
    }
    if (count == 0) throw Error("loss over an empty supervision mask");
    return total / count;
}

NeuralGradients zero_like(const NeuralModel& model) {
    NeuralGradients grads;
    grads.layers.resize(model.layers.size());
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
        const NeuralLayer& layer = model.layers[i];
        grads.layers[i].weights = Matrix(layer.weights.rows(), layer.weights.cols());
        grads.layers[i].gates.resize(layer.gates.size());
        for (std::size_t c = 0; c < layer.gates.size(); ++c) {
            grads.layers[i].gates[c].forward_w.assign(layer.gates[c].forward_w.size(), 0.0);
            grads.layers[i].gates[c].backward_w.assign(layer.gates[c].backward_w.size(), 0.0);
        }
    }
    grads.out_weights = Matrix(model.out_weights.rows(), model.out_weights.cols());
    grads.out_bias.assign(model.out_bias.size(), 0.0);
    return grads;
}

NeuralGradients backward(const NeuralModel& model, const GraphTensors& g,
                         const ForwardCache& cache, const std::vector<int>& labels) {
    NeuralGradients grads = zero_like(model);
    const int n = g.n;

    int supervised = 0;
    for (int i = 0; i < n; ++i)
        if (labels[i] >= 0) supervised++;
    if (supervised == 0) throw Error("backward over an empty supervision mask");

    // d loss / d logits for masked mean NLL with softmax
    Matrix dlogits(n, kNumLabels);
    for (int i = 0; i < n; ++i) {
        if (labels[i] < 0) continue;
        for (int j = 0; j < kNumLabels; ++j)
            dlogits(i, j) = (cache.probs(i, j) - (j == labels[i] ? 1.0 : 0.0)) / supervised;
    }

    const Matrix& last = cache.layers.empty() ? g.X : cache.layers.back().output;
    kernels::matmul_at_b(last, dlogits, grads.out_weights);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < kNumLabels; ++j) grads.out_bias[j] += dlogits(i, j);

    Matrix dh;
    kernels::matmul_a_bt(dlogits, model.out_weights, dh);

    for (int li = static_cast<int>(model.layers.size()) - 1; li >= 0; --li) {
        const NeuralLayer& layer = model.layers[li];
        const LayerCache& lc = cache.layers[li];
        NeuralLayer& glayer = grads.layers[li];

        if (!lc.dropout_mask.empty())
            for (std::size_t i = 0; i < dh.data().size(); ++i)
                dh.data()[i] *= lc.dropout_mask[i];

        // relu
        Matrix dz = dh;
        for (std::size_t i = 0; i < dz.data().size(); ++i)
            if (lc.pre_activation.data()[i] <= 0) dz.data()[i] = 0;

        if (model.kind == ModelKind::Gcn) {
            kernels::matmul_at_b(lc.mixed, dz, glayer.weights);
            Matrix dmixed;
            kernels::matmul_a_bt(dz, layer.weights, dmixed);
            kernels::spmm(g.gcn_adj, dmixed, dh);  // A_hat is symmetric
            continue;
        }

        const int p = lc.proj.cols();
        const int conv_count = static_cast<int>(layer.gates.size());
        const bool both = model.config.direction == DirectionMode::Both;

        Matrix dproj(n, p);
        auto backprop_block = [&](int c, const Matrix& dblock) {
            const std::size_t slot = static_cast<std::size_t>(c) * (both ? 2 : 1);
            // forward direction: block[src] += s[j] * proj[tgt]
            std::vector<double> ds;
            kernels::edge_dots(g.by_source, dblock, lc.proj, ds);
            kernels::gated_accumulate(g.by_target, lc.gate_act[slot], dblock, dproj);
            auto& dw = glayer.gates[c].forward_w;
            for (int j = 0; j < g.m; ++j) {
                if (lc.gate_pre[slot][j] <= 0) continue;
                for (int k = 0; k < g.F.rows(); ++k) dw[k] += g.F(k, j) * ds[j];
            }
            if (both) {
                std::vector<double> dsb;
                kernels::edge_dots(g.by_target, dblock, lc.proj, dsb);
                kernels::gated_accumulate(g.by_source, lc.gate_act[slot + 1], dblock, dproj);
                auto& dwb = glayer.gates[c].backward_w;
                for (int j = 0; j < g.m; ++j) {
                    if (lc.gate_pre[slot + 1][j] <= 0) continue;
                    for (int k = 0; k < g.F.rows(); ++k) dwb[k] += g.F(k, j) * dsb[j];
                }
            }
        };

        switch (model.config.variant) {
            case EcnVariant::FullStacking: {
                add_inplace(dproj, slice_cols(dz, 0, p));
                for (int c = 0; c < conv_count; ++c)
                    backprop_block(c, slice_cols(dz, (c + 1) * p, p));
                break;
            }
            case EcnVariant::SumStacking: {
                add_inplace(dproj, slice_cols(dz, 0, p));
                Matrix dmean = slice_cols(dz, p, p);
                if (conv_count > 0) scale_inplace(dmean, 1.0 / conv_count);
                for (int c = 0; c < conv_count; ++c) backprop_block(c, dmean);
                break;
            }
            case EcnVariant::Adding: {
                add_inplace(dproj, dz);
                Matrix dmean = dz;
                if (conv_count > 0) scale_inplace(dmean, 1.0 / conv_count);
                for (int c = 0; c < conv_count; ++c) backprop_block(c, dmean);
                break;
            }
        }

        kernels::matmul_at_b(lc.input, dproj, glayer.weights);
        kernels::matmul_a_bt(dproj, layer.weights, dh);
    }
    return grads;
}

namespace {

NeuralModel init_model(ModelKind kind, const NeuralConfig& config, int node_dim, int edge_dim,
                       Rng& rng) {
    NeuralModel model;
    model.kind = kind;
    model.config = config;
    model.node_dim = node_dim;
    model.edge_dim = edge_dim;

    auto glorot_fill = [&rng](Matrix& m) {
        const double limit = std::sqrt(6.0 / (m.rows() + m.cols()));
        for (double& v : m.data()) v = rng.uniform(-limit, limit);
    };

    model.layers.resize(config.layers);
    for (int li = 0; li < config.layers; ++li) {
        NeuralLayer& layer = model.layers[li];
        layer.weights = Matrix(model.input_width(li), config.hidden_width);
        glorot_fill(layer.weights);
        if (kind == ModelKind::Ecn) {
            const double limit = std::sqrt(6.0 / (edge_dim + 1));
            layer.gates.resize(config.convolutions);
            for (EdgeGate& gate : layer.gates) {
                gate.forward_w.resize(edge_dim);
                for (double& v : gate.forward_w) v = rng.uniform(-limit, limit);
                if (config.direction == DirectionMode::Both) {
                    gate.backward_w.resize(edge_dim);
                    for (double& v : gate.backward_w) v = rng.uniform(-limit, limit);
                }
            }
        }
    }
    model.out_weights = Matrix(model.output_width(config.layers - 1), kNumLabels);
    glorot_fill(model.out_weights);
    model.out_bias.assign(kNumLabels, 0.0);
    return model;
}

struct AdamState {
    NeuralGradients first, second;
    int t = 0;
};

void adam_step(NeuralModel& model, NeuralGradients& grads, AdamState& state, double lr) {
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    state.t++;
    const double bc1 = 1.0 - std::pow(beta1, state.t);
    const double bc2 = 1.0 - std::pow(beta2, state.t);

    auto params = param_arrays(model.layers, model.out_weights, model.out_bias);
    auto gparams = param_arrays(grads.layers, grads.out_weights, grads.out_bias);
    auto mparams = param_arrays(state.first.layers, state.first.out_weights, state.first.out_bias);
    auto vparams =
        param_arrays(state.second.layers, state.second.out_weights, state.second.out_bias);

    for (std::size_t a = 0; a < params.size(); ++a) {
        auto& p = *params[a];
        auto& gvec = *gparams[a];
        auto& mvec = *mparams[a];
        auto& vvec = *vparams[a];
        for (std::size_t i = 0; i < p.size(); ++i) {
            mvec[i] = beta1 * mvec[i] + (1 - beta1) * gvec[i];
            vvec[i] = beta2 * vvec[i] + (1 - beta2) * gvec[i] * gvec[i];
            p[i] -= lr * (mvec[i] / bc1) / (std::sqrt(vvec[i] / bc2) + eps);
        }
    }
}

}  // namespace

NeuralModel train(const std::vector<GraphTensors>& pages, ModelKind kind,
                  const NeuralConfig& config, const TrainConfig& train_config, TrainLog* log) {
    if (kind != ModelKind::Gcn && kind != ModelKind::Ecn)
        throw Error("train: kind must be GCN or ECN");

    std::vector<int> usable;
    for (std::size_t i = 0; i < pages.size(); ++i) {
        const auto& labels = pages[i].labels;
        if (pages[i].n > 0 && std::any_of(labels.begin(), labels.end(), [](int l) { return l >= 0; }))
            usable.push_back(static_cast<int>(i));
    }
    if (usable.size() < 2)
        throw Error("train: need at least 2 labeled pages for a validation split");

    int node_dim = pages[usable[0]].X.cols();
    int edge_dim = pages[usable[0]].F.rows();
    for (int i : usable)
        if (pages[i].m > 0) edge_dim = pages[i].F.rows();

    Rng rng(train_config.seed);
    NeuralModel model = init_model(kind, config, node_dim, edge_dim, rng);
    model.seed = train_config.seed;

    std::vector<int> order = usable;
    rng.shuffle(order);
    int n_val = std::max(1, static_cast<int>(std::lround(train_config.validation_fraction *
                                                         static_cast<double>(order.size()))));
    n_val = std::min<int>(n_val, static_cast<int>(order.size()) - 1);
    std::vector<int> val_pages(order.begin(), order.begin() + n_val);
    std::vector<int> train_pages(order.begin() + n_val, order.end());

    auto validation_loss = [&]() {
        std::vector<double> sums(val_pages.size(), 0.0);
        std::vector<int> counts(val_pages.size(), 0);
#pragma omp parallel for schedule(dynamic)
        for (int vi = 0; vi < static_cast<int>(val_pages.size()); ++vi) {
            const GraphTensors& g = pages[val_pages[vi]];
            ForwardCache cache = forward(model, g);
            for (int i = 0; i < g.n; ++i) {
                if (g.labels[i] < 0) continue;
                sums[vi] += -std::log(std::max(cache.probs(i, g.labels[i]), 1e-300));
                counts[vi]++;
            }
        }
        double total = 0;
        int count = 0;
        for (std::size_t vi = 0; vi < val_pages.size(); ++vi) {
            total += sums[vi];
            count += counts[vi];
        }
        return count > 0 ? total / count : 0.0;
    };

    AdamState adam{zero_like(model), zero_like(model), 0};
    double best_val = std::numeric_limits<double>::infinity();
    NeuralModel best = model;
    int best_epoch = -1;
    int since_improvement = 0;
    double train_loss = 0;
    int epochs_run = 0;

    for (int epoch = 1; epoch <= train_config.max_epochs; ++epoch) {
        epochs_run = epoch;
        rng.shuffle(train_pages);
        double epoch_loss = 0;
        for (int pi : train_pages) {
            const GraphTensors& g = pages[pi];
            ForwardCache cache = forward(model, g, &rng);
            const double page_loss = nll_loss(cache.probs, g.labels);
            if (!std::isfinite(page_loss))
                throw Error("non-finite training loss at epoch " + std::to_string(epoch) +
                            " on page '" + g.page_id + "'");
            epoch_loss += page_loss;
            NeuralGradients grads = backward(model, g, cache, g.labels);
            adam_step(model, grads, adam, train_config.learning_rate);
        }
        train_loss = epoch_loss / static_cast<double>(train_pages.size());

        const double val = validation_loss();
        if (!std::isfinite(val))
            throw Error("non-finite validation loss at epoch " + std::to_string(epoch));
        if (val < best_val) {
            best_val = val;
            best = model;
            best_epoch = epoch;
            since_improvement = 0;
        } else {
            since_improvement++;
            if (since_improvement > train_config.patience) break;
        }
    }

    if (log) {
        log->epochs_run = epochs_run;
        log->best_epoch = best_epoch;
        log->best_validation_loss = best_val;
        log->final_train_loss = train_loss;
    }
    best.seed = train_config.seed;
    return best;
}

BiesoLabel argmax_label(const double* row) {
    int best = 0;
    for (int j = 1; j < kNumLabels; ++j)
        if (row[j] > row[best]) best = j;
    return static_cast<BiesoLabel>(best);
}

std::vector<BiesoLabel> predict(const NeuralModel& model, const GraphTensors& g) {
    if (g.n == 0) return {};
    ForwardCache cache = forward(model, g);
    std::vector<BiesoLabel> out;
    out.reserve(g.n);
    for (int i = 0; i < g.n; ++i) out.push_back(argmax_label(cache.probs.row(i)));
    return out;
}

}  // namespace tablegraph
