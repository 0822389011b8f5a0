#include "tablegraph/crf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace tablegraph {

namespace {

constexpr int kL = kNumLabels;

int tie_argmax(const double* scores) {
    int best = 0;
    for (int j = 1; j < kL; ++j)
        if (scores[j] > scores[best]) best = j;
    return best;
}

struct Incident {
    int edge = 0;
    int other = 0;
    bool is_source = false;  // this node is the edge's source
};

std::vector<std::vector<Incident>> incidence_lists(int n, const std::vector<GraphEdge>& edges) {
    std::vector<std::vector<Incident>> inc(n);
    for (std::size_t j = 0; j < edges.size(); ++j) {
        const GraphEdge& e = edges[j];
        inc[e.source].push_back(Incident{static_cast<int>(j), e.target, true});
        inc[e.target].push_back(Incident{static_cast<int>(j), e.source, false});
    }
    return inc;
}

inline double pot_at(const Matrix& pot, bool node_is_source, int y_node, int y_other) {
    return node_is_source ? pot(y_node, y_other) : pot(y_other, y_node);
}

double labeling_score(const Matrix& unaries, const std::vector<GraphEdge>& edges,
                      const std::vector<Matrix>& pots, const std::vector<int>& y) {
    double score = 0;
    for (int i = 0; i < unaries.rows(); ++i) score += unaries(i, y[i]);
    for (std::size_t j = 0; j < edges.size(); ++j)
        score += pots[j](y[edges[j].source], y[edges[j].target]);
    return score;
}

bool is_forest(int n, const std::vector<GraphEdge>& edges) {
    std::vector<int> parent(n);
    for (int i = 0; i < n; ++i) parent[i] = i;
    auto find = [&](int a) {
        while (parent[a] != a) {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        return a;
    };
    for (const GraphEdge& e : edges) {
        const int ra = find(e.source), rb = find(e.target);
        if (ra == rb) return false;
        parent[ra] = rb;
    }
    return true;
}

/// Exact max-sum on a forest: message passing toward per-component roots,
/// then argmax backtracking. Ties resolve to the lowest label index.
std::vector<int> forest_map(const Matrix& unaries, const std::vector<GraphEdge>& edges,
                            const std::vector<Matrix>& pots,
                            const std::vector<std::vector<Incident>>& inc) {
    const int n = unaries.rows();
    std::vector<int> y(n, 0);
    std::vector<int> bfs_order;
    std::vector<int> parent_edge(n, -1), parent_node(n, -1);
    std::vector<bool> seen(n, false);

    for (int root = 0; root < n; ++root) {
        if (seen[root]) continue;
        const std::size_t component_start = bfs_order.size();
        seen[root] = true;
        bfs_order.push_back(root);
        for (std::size_t q = component_start; q < bfs_order.size(); ++q) {
            const int v = bfs_order[q];
            for (const Incident& in : inc[v]) {
                if (seen[in.other]) continue;
                seen[in.other] = true;
                parent_edge[in.other] = in.edge;
                parent_node[in.other] = v;
                bfs_order.push_back(in.other);
            }
        }

        // upward pass (reverse BFS): msg[v][y_parent], choice[v][y_parent]
        std::vector<std::array<double, kL>> msg(n);
        std::vector<std::array<int, kL>> choice(n);
        for (std::size_t q = bfs_order.size(); q-- > component_start;) {
            const int v = bfs_order[q];
            std::array<double, kL> local;
            for (int yv = 0; yv < kL; ++yv) {
                local[yv] = unaries(v, yv);
                for (const Incident& in : inc[v])
                    if (parent_node[in.other] == v) local[yv] += msg[in.other][yv];
            }
            if (parent_node[v] < 0) {  // component root: decode here
                y[v] = tie_argmax(local.data());
                continue;
            }
            const GraphEdge& pe = edges[parent_edge[v]];
            const bool v_is_source = pe.source == v;
            const Matrix& pot = pots[parent_edge[v]];
            for (int yp = 0; yp < kL; ++yp) {
                double best = -std::numeric_limits<double>::infinity();
                int arg = 0;
                for (int yv = 0; yv < kL; ++yv) {
                    const double s = local[yv] + pot_at(pot, v_is_source, yv, yp);
                    if (s > best) {
                        best = s;
                        arg = yv;
                    }
                }
                msg[v][yp] = best;
                choice[v][yp] = arg;
            }
        }

        // downward pass in BFS order
        for (std::size_t q = component_start; q < bfs_order.size(); ++q) {
            const int v = bfs_order[q];
            if (parent_node[v] >= 0) y[v] = choice[v][y[parent_node[v]]];
        }
    }
    return y;
}

/// Synchronous loopy max-sum with message normalization; decodes beliefs.
std::vector<int> loopy_bp_map(const Matrix& unaries, const std::vector<GraphEdge>& edges,
                              const std::vector<Matrix>& pots,
                              const std::vector<std::vector<Incident>>& inc, int sweeps) {
    const int n = unaries.rows();
    const int m = static_cast<int>(edges.size());
    // messages indexed 2j (source -> target) and 2j+1 (target -> source)
    std::vector<std::array<double, kL>> msg(2 * m), next(2 * m);
    for (auto& a : msg) a.fill(0.0);

    for (int it = 0; it < sweeps; ++it) {
        for (int j = 0; j < m; ++j) {
            for (int dir = 0; dir < 2; ++dir) {
                const int from = dir == 0 ? edges[j].source : edges[j].target;
                const bool from_is_source = dir == 0;
                std::array<double, kL> local;
                for (int yf = 0; yf < kL; ++yf) {
                    local[yf] = unaries(from, yf);
                    for (const Incident& in : inc[from]) {
                        if (in.edge == j) continue;
                        local[yf] += msg[2 * in.edge + (in.is_source ? 1 : 0)][yf];
                    }
                }
                auto& out = next[2 * j + dir];
                for (int yt = 0; yt < kL; ++yt) {
                    double best = -std::numeric_limits<double>::infinity();
                    for (int yf = 0; yf < kL; ++yf)
                        best = std::max(best, local[yf] + pot_at(pots[j], from_is_source, yf, yt));
                    out[yt] = best;
                }
                const double mx = *std::max_element(out.begin(), out.end());
                for (double& v : out) v -= mx;
            }
        }
        msg.swap(next);
    }

    std::vector<int> y(n, 0);
    for (int v = 0; v < n; ++v) {
        std::array<double, kL> belief;
        for (int yv = 0; yv < kL; ++yv) {
            belief[yv] = unaries(v, yv);
            for (const Incident& in : inc[v])
                belief[yv] += msg[2 * in.edge + (in.is_source ? 1 : 0)][yv];
        }
        y[v] = tie_argmax(belief.data());
    }
    return y;
}

/// Iterated conditional modes to a fixpoint (bounded sweeps).
void icm_refine(const Matrix& unaries, const std::vector<Matrix>& pots,
                const std::vector<std::vector<Incident>>& inc, std::vector<int>& y) {
    const int n = unaries.rows();
    for (int sweep = 0; sweep < 100; ++sweep) {
        bool changed = false;
        for (int v = 0; v < n; ++v) {
            std::array<double, kL> local;
            for (int yv = 0; yv < kL; ++yv) {
                local[yv] = unaries(v, yv);
                for (const Incident& in : inc[v])
                    local[yv] += pot_at(pots[in.edge], in.is_source, yv, y[in.other]);
            }
            const int best = tie_argmax(local.data());
            if (best != y[v]) {
                y[v] = best;
                changed = true;
            }
        }
        if (!changed) break;
    }
}

std::vector<int> map_with_unaries(const Matrix& unaries, const std::vector<GraphEdge>& edges,
                                  const std::vector<Matrix>& pots, std::uint64_t seed) {
    const int n = unaries.rows();
    if (n == 0) return {};
    const auto inc = incidence_lists(n, edges);

    if (is_forest(n, edges)) return forest_map(unaries, edges, pots, inc);

    std::vector<std::vector<int>> candidates;
    std::vector<int> unary(n);
    for (int v = 0; v < n; ++v) unary[v] = tie_argmax(unaries.row(v));
    candidates.push_back(std::move(unary));
    candidates.push_back(loopy_bp_map(unaries, edges, pots, inc, 50));

    Rng rng(seed);
    for (int r = 0; r < 10; ++r) {
        std::vector<int> y(n);
        for (int v = 0; v < n; ++v) y[v] = static_cast<int>(rng.below(kL));
        candidates.push_back(std::move(y));
    }

    std::vector<int> best;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::vector<int>& y : candidates) {
        icm_refine(unaries, pots, inc, y);
        const double s = labeling_score(unaries, edges, pots, y);
        if (s > best_score) {
            best_score = s;
            best = y;
        }
    }
    return best;
}

void check_dims(const CrfModel& model, const PageGraph& graph, const Matrix& x, const Matrix& f) {
    if (x.rows() != graph.n || x.cols() != model.node_dim())
        throw Error("crf: node feature shape " + std::to_string(x.rows()) + "x" +
                    std::to_string(x.cols()) + " does not match graph n=" +
                    std::to_string(graph.n) + ", model node_dim=" +
                    std::to_string(model.node_dim()));
    if (graph.edge_count() > 0 &&
        (f.rows() != model.edge_dim() || f.cols() != graph.edge_count()))
        throw Error("crf: edge feature shape " + std::to_string(f.rows()) + "x" +
                    std::to_string(f.cols()) + " does not match m=" +
                    std::to_string(graph.edge_count()) + ", model edge_dim=" +
                    std::to_string(model.edge_dim()));
}

}  // namespace

CrfModel zero_crf(int node_dim, int edge_dim) {
    CrfModel model;
    model.theta = Matrix(kL, node_dim);
    model.pairwise[0] = Matrix(kL * kL, edge_dim);
    model.pairwise[1] = Matrix(kL * kL, edge_dim);
    return model;
}

Matrix crf_unaries(const CrfModel& model, const Matrix& x) {
    Matrix u(x.rows(), kL);
    for (int i = 0; i < x.rows(); ++i) {
        const double* row = x.row(i);
        for (int y = 0; y < kL; ++y) {
            double acc = 0;
            const double* w = model.theta.row(y);
            for (int k = 0; k < x.cols(); ++k) acc += w[k] * row[k];
            u(i, y) = acc;
        }
    }
    return u;
}

std::vector<Matrix> crf_edge_potentials(const CrfModel& model, const PageGraph& graph,
                                        const Matrix& f) {
    std::vector<Matrix> pots;
    pots.reserve(graph.edges.size());
    for (std::size_t j = 0; j < graph.edges.size(); ++j) {
        const Matrix& block = model.pairwise[static_cast<int>(graph.edges[j].orientation)];
        Matrix pot(kL, kL);
        for (int ys = 0; ys < kL; ++ys)
            for (int yt = 0; yt < kL; ++yt) {
                double acc = 0;
                const double* w = block.row(ys * kL + yt);
                for (int k = 0; k < f.rows(); ++k) acc += w[k] * f(k, static_cast<int>(j));
                pot(ys, yt) = acc;
            }
        pots.push_back(std::move(pot));
    }
    return pots;
}

double crf_score(const CrfModel& model, const PageGraph& graph, const Matrix& x, const Matrix& f,
                 const std::vector<int>& y) {
    check_dims(model, graph, x, f);
    if (static_cast<int>(y.size()) != graph.n)
        throw Error("crf_score: labeling length does not match graph");
    const Matrix u = crf_unaries(model, x);
    const std::vector<Matrix> pots = crf_edge_potentials(model, graph, f);
    return labeling_score(u, graph.edges, pots, y);
}

std::vector<int> map_inference(const CrfModel& model, const PageGraph& graph, const Matrix& x,
                               const Matrix& f, std::uint64_t seed) {
    check_dims(model, graph, x, f);
    const Matrix u = crf_unaries(model, x);
    const std::vector<Matrix> pots = crf_edge_potentials(model, graph, f);
    return map_with_unaries(u, graph.edges, pots, seed);
}

std::vector<int> loss_augmented_map(const CrfModel& model, const PageGraph& graph, const Matrix& x,
                                    const Matrix& f, const std::vector<int>& gold,
                                    double loss_scale, std::uint64_t seed) {
    check_dims(model, graph, x, f);
    if (static_cast<int>(gold.size()) != graph.n)
        throw Error("loss_augmented_map: gold length does not match graph");
    Matrix u = crf_unaries(model, x);
    for (int v = 0; v < graph.n; ++v)
        for (int y = 0; y < kL; ++y)
            if (y != gold[v]) u(v, y) += loss_scale;
    const std::vector<Matrix> pots = crf_edge_potentials(model, graph, f);
    return map_with_unaries(u, graph.edges, pots, seed);
}

namespace {

/// phi(x, y_hat) - phi(x, y_gold), accumulated into a model-shaped container.
void feature_diff(const CrfInstance& inst, const std::vector<int>& y_hat,
                  const std::vector<int>& gold, CrfModel& diff) {
    for (int v = 0; v < inst.graph.n; ++v) {
        if (y_hat[v] == gold[v]) continue;
        const double* row = inst.x.row(v);
        for (int k = 0; k < inst.x.cols(); ++k) {
            diff.theta(y_hat[v], k) += row[k];
            diff.theta(gold[v], k) -= row[k];
        }
    }
    for (std::size_t j = 0; j < inst.graph.edges.size(); ++j) {
        const GraphEdge& e = inst.graph.edges[j];
        const int rh = y_hat[e.source] * kL + y_hat[e.target];
        const int rg = gold[e.source] * kL + gold[e.target];
        if (rh == rg) continue;
        Matrix& block = diff.pairwise[static_cast<int>(e.orientation)];
        for (int k = 0; k < inst.f.rows(); ++k) {
            block(rh, k) += inst.f(k, static_cast<int>(j));
            block(rg, k) -= inst.f(k, static_cast<int>(j));
        }
    }
}

double squared_norm(const CrfModel& model) {
    double acc = 0;
    for (double v : model.theta.data()) acc += v * v;
    for (const Matrix& b : model.pairwise)
        for (double v : b.data()) acc += v * v;
    return acc;
}

void axpy(CrfModel& w, double a, const CrfModel& g) {
    for (std::size_t i = 0; i < w.theta.data().size(); ++i)
        w.theta.data()[i] += a * g.theta.data()[i];
    for (int o = 0; o < 2; ++o)
        for (std::size_t i = 0; i < w.pairwise[o].data().size(); ++i)
            w.pairwise[o].data()[i] += a * g.pairwise[o].data()[i];
}

void scale(CrfModel& w, double a) {
    for (double& v : w.theta.data()) v *= a;
    for (Matrix& b : w.pairwise)
        for (double& v : b.data()) v *= a;
}

double full_objective(const CrfModel& model, const std::vector<CrfInstance>& instances,
                      double lambda, std::uint64_t seed) {
    double hinge = 0;
    for (std::size_t i = 0; i < instances.size(); ++i) {
        const CrfInstance& inst = instances[i];
        const std::vector<int> y_hat = loss_augmented_map(
            model, inst.graph, inst.x, inst.f, inst.labels, 1.0, derive_seed(seed, i));
        double delta = 0;
        for (int v = 0; v < inst.graph.n; ++v)
            if (y_hat[v] != inst.labels[v]) delta += 1.0;
        const double augmented =
            crf_score(model, inst.graph, inst.x, inst.f, y_hat) + delta;
        const double gold_score = crf_score(model, inst.graph, inst.x, inst.f, inst.labels);
        hinge += std::max(0.0, augmented - gold_score);
    }
    return lambda * squared_norm(model) + hinge / static_cast<double>(instances.size());
}

}  // namespace

CrfModel train_crf(const std::vector<CrfInstance>& instances, const CrfTrainConfig& config,
                   CrfTrainLog* log) {
    if (instances.empty()) throw Error("train_crf: empty dataset");
    for (const CrfInstance& inst : instances) {
        if (static_cast<int>(inst.labels.size()) != inst.graph.n)
            throw Error("train_crf: label length mismatch on page '" + inst.page_id + "'");
        for (int l : inst.labels)
            if (l < 0 || l >= kL)
                throw Error("train_crf: unlabeled node on page '" + inst.page_id + "'");
    }

    const int node_dim = instances.front().x.cols();
    int edge_dim = instances.front().f.rows();
    for (const CrfInstance& inst : instances)
        if (inst.graph.edge_count() > 0) edge_dim = inst.f.rows();

    CrfModel w = zero_crf(node_dim, edge_dim);
    CrfModel best = w;
    double best_objective = full_objective(w, instances, config.lambda, config.seed);
    int best_step = 0;

    Rng rng(config.seed);
    std::vector<int> order(instances.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

    // lambda * ||w||^2 + mean hinge  ==  (L/2) ||w||^2 + mean hinge, L = 2*lambda,
    // optimized with the Pegasos schedule eta_t = 1/(L*t).
    const double big_lambda = 2.0 * config.lambda;
    // The optimum obeys lambda*||w*||^2 <= objective(0), so projecting onto
    // that ball keeps it reachable while taming the early huge steps.
    const double radius = std::sqrt(std::max(best_objective, 1e-12) / config.lambda);
    for (int t = 1; t <= config.iterations; ++t) {
        const std::size_t pos = static_cast<std::size_t>(t - 1) % instances.size();
        if (pos == 0) rng.shuffle(order);
        const CrfInstance& inst = instances[order[pos]];

        const std::vector<int> y_hat =
            loss_augmented_map(w, inst.graph, inst.x, inst.f, inst.labels, 1.0,
                               derive_seed(config.seed, 1000000 + t));
        CrfModel grad = zero_crf(node_dim, edge_dim);
        feature_diff(inst, y_hat, inst.labels, grad);

        const double eta = 1.0 / (big_lambda * t);
        scale(w, 1.0 - 1.0 / t);
        axpy(w, -eta, grad);
        const double norm = std::sqrt(squared_norm(w));
        if (norm > radius) scale(w, radius / norm);

        if (t % config.objective_every == 0 || t == config.iterations) {
            const double objective = full_objective(w, instances, config.lambda, config.seed);
            if (!std::isfinite(objective))
                throw Error("train_crf: non-finite objective at step " + std::to_string(t) +
                            " (page '" + inst.page_id + "')");
            if (objective < best_objective) {
                best_objective = objective;
                best = w;
                best_step = t;
            }
        }
    }

    if (log) {
        log->steps = config.iterations;
        log->best_objective = best_objective;
        log->best_step = best_step;
    }
    return best;
}

std::vector<BiesoLabel> predict_crf(const CrfModel& model, const PageGraph& graph, const Matrix& x,
                                    const Matrix& f, std::uint64_t seed) {
    const std::vector<int> y = map_inference(model, graph, x, f, seed);
    std::vector<BiesoLabel> out;
    out.reserve(y.size());
    for (int v : y) out.push_back(static_cast<BiesoLabel>(v));
    return out;
}

}  // namespace tablegraph
