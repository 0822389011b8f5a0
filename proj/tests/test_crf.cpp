#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "tablegraph/crf.hpp"

using namespace tablegraph;
using tgtest::enumerate_best;
using tgtest::random_crf;
using tgtest::random_graph;
using tgtest::random_matrix;
using tgtest::random_tree;

namespace {

int orient_index(EdgeOrientation o) { return static_cast<int>(o); }  // horizontal 0, vertical 1

/// Term-by-term score assembled directly from the definition.
double direct_score(const CrfModel& model, const PageGraph& g, const Matrix& x, const Matrix& f,
                    const std::vector<int>& y) {
    double total = 0;
    for (int i = 0; i < g.n; ++i)
        for (int k = 0; k < x.cols(); ++k) total += model.theta(y[i], k) * x(i, k);
    for (int j = 0; j < g.edge_count(); ++j) {
        const GraphEdge& e = g.edges[j];
        const Matrix& block = model.pairwise[orient_index(e.orientation)];
        const int row = y[e.source] * kNumLabels + y[e.target];
        for (int k = 0; k < f.rows(); ++k) total += block(row, k) * f(k, j);
    }
    return total;
}

std::vector<int> unary_argmax(const CrfModel& model, const Matrix& x) {
    const Matrix u = crf_unaries(model, x);
    std::vector<int> y(u.rows());
    for (int i = 0; i < u.rows(); ++i) {
        int best = 0;
        for (int j = 1; j < kNumLabels; ++j)
            if (u(i, j) > u(i, best)) best = j;
        y[i] = best;
    }
    return y;
}

}  // namespace

TEST_CASE("zero model scores zero and predicts all-B") {
    CrfModel model = zero_crf(3, 2);
    CHECK(model.node_dim() == 3);
    CHECK(model.edge_dim() == 2);
    CHECK(model.theta.rows() == 5);
    CHECK(model.pairwise[0].rows() == 25);

    Rng rng(70);
    PageGraph g = random_graph(4, 4, rng);
    Matrix x = random_matrix(4, 3, rng);
    Matrix f = random_matrix(2, g.edge_count(), rng);
    CHECK(crf_score(model, g, x, f, {0, 1, 2, 3}) == 0.0);
    CHECK(crf_score(model, g, x, f, {4, 4, 4, 4}) == 0.0);

    // Everything ties at zero, so the tie rule picks B everywhere.
    std::vector<int> y = map_inference(model, g, x, f);
    for (int v : y) CHECK(v == 0);
}

TEST_CASE("single-node score picks out one theta row") {
    CrfModel model = zero_crf(2, 1);
    model.theta(0, 0) = 2.0;  // theta_B = (2, -1)
    model.theta(0, 1) = -1.0;
    model.theta(3, 0) = 0.5;  // theta_S = (0.5, 0)

    PageGraph g;
    g.n = 1;
    Matrix x(1, 2);
    x(0, 0) = 3.0;
    x(0, 1) = 4.0;
    Matrix f(1, 0);

    CHECK(crf_score(model, g, x, f, {0}) == doctest::Approx(2.0 * 3 - 1.0 * 4));
    CHECK(crf_score(model, g, x, f, {3}) == doctest::Approx(0.5 * 3));
    CHECK(crf_score(model, g, x, f, {4}) == 0.0);

    Matrix u = crf_unaries(model, x);
    CHECK(u(0, 0) == doctest::Approx(2.0));
    CHECK(u(0, 3) == doctest::Approx(1.5));
    CHECK(u(0, 4) == 0.0);

    std::vector<int> y = map_inference(model, g, x, f);
    CHECK(y[0] == 0);
}

TEST_CASE("crf_score matches the term-by-term definition") {
    Rng rng(71);
    for (int trial = 0; trial < 10; ++trial) {
        PageGraph g = random_graph(5, 6, rng);
        Matrix x = random_matrix(5, 3, rng);
        Matrix f = random_matrix(2, g.edge_count(), rng);
        CrfModel model = random_crf(3, 2, rng);
        std::vector<int> y(5);
        for (int& v : y) v = static_cast<int>(rng.below(5));
        CHECK(crf_score(model, g, x, f, y) ==
              doctest::Approx(direct_score(model, g, x, f, y)).epsilon(1e-12));
    }
}

TEST_CASE("edge potentials honor orientation and direction") {
    CrfModel model = zero_crf(1, 1);
    model.pairwise[1](1 * kNumLabels + 2, 0) = 5.0;  // vertical, I -> E
    model.pairwise[0](2 * kNumLabels + 1, 0) = 7.0;  // horizontal, E -> I

    PageGraph g;
    g.n = 2;
    g.edges.push_back({0, 1, EdgeOrientation::Vertical, 1.0, 1.0});
    g.edges.push_back({0, 1, EdgeOrientation::Horizontal, 1.0, 1.0});
    Matrix f(1, 2);
    f(0, 0) = 2.0;
    f(0, 1) = 3.0;

    std::vector<Matrix> tables = crf_edge_potentials(model, g, f);
    REQUIRE(tables.size() == 2);
    CHECK(tables[0](1, 2) == doctest::Approx(10.0));
    CHECK(tables[0](2, 1) == 0.0);  // direction matters
    CHECK(tables[1](2, 1) == doctest::Approx(21.0));
    CHECK(tables[1](1, 2) == 0.0);

    Matrix x(2, 1);
    std::vector<int> y = {1, 2};
    CHECK(crf_score(model, g, x, f, y) == doctest::Approx(10.0));
}

TEST_CASE("edgeless inference is the unary argmax") {
    Rng rng(72);
    PageGraph g;
    g.n = 6;
    Matrix x = random_matrix(6, 3, rng);
    Matrix f(2, 0);
    CrfModel model = random_crf(3, 2, rng);
    CHECK(map_inference(model, g, x, f) == unary_argmax(model, x));
}

TEST_CASE("two-node chain agrees with 25-case enumeration") {
    Rng rng(73);
    for (int trial = 0; trial < 20; ++trial) {
        PageGraph g;
        g.n = 2;
        g.edges.push_back({0, 1,
                           rng.bernoulli(0.5) ? EdgeOrientation::Vertical
                                              : EdgeOrientation::Horizontal,
                           1.0, 2.0});
        Matrix x = random_matrix(2, 2, rng);
        Matrix f = random_matrix(3, 1, rng);
        CrfModel model = random_crf(2, 3, rng);

        std::vector<int> best_y;
        const double best = enumerate_best(model, g, x, f, &best_y);
        std::vector<int> y = map_inference(model, g, x, f);
        CHECK(crf_score(model, g, x, f, y) == doctest::Approx(best).epsilon(1e-12));
    }
}

TEST_CASE("tree inference is exact against brute force") {
    Rng rng(74);
    for (int trial = 0; trial < 15; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(5));  // up to 6 nodes
        PageGraph g = random_tree(n, rng);
        Matrix x = random_matrix(n, 2, rng);
        Matrix f = random_matrix(2, g.edge_count(), rng);
        CrfModel model = random_crf(2, 2, rng);

        const double best = enumerate_best(model, g, x, f);
        std::vector<int> y = map_inference(model, g, x, f);
        CHECK(crf_score(model, g, x, f, y) == doctest::Approx(best).epsilon(1e-10));
    }
}

TEST_CASE("forests of disconnected trees stay exact") {
    Rng rng(75);
    PageGraph a = random_tree(4, rng);
    PageGraph b = random_tree(3, rng);
    PageGraph g;
    g.n = 7;
    g.edges = a.edges;
    for (GraphEdge e : b.edges) {
        e.source += 4;
        e.target += 4;
        g.edges.push_back(e);
    }
    Matrix x = random_matrix(7, 2, rng);
    Matrix f = random_matrix(2, g.edge_count(), rng);
    CrfModel model = random_crf(2, 2, rng);

    const double best = enumerate_best(model, g, x, f);
    std::vector<int> y = map_inference(model, g, x, f);
    CHECK(crf_score(model, g, x, f, y) == doctest::Approx(best).epsilon(1e-10));
}

TEST_CASE("cyclic inference is sandwiched between baseline and optimum") {
    Rng rng(76);
    for (int trial = 0; trial < 10; ++trial) {
        PageGraph g = random_graph(5, 7, rng);  // almost surely cyclic
        Matrix x = random_matrix(5, 2, rng);
        Matrix f = random_matrix(2, g.edge_count(), rng);
        CrfModel model = random_crf(2, 2, rng);

        const double optimum = enumerate_best(model, g, x, f);
        std::vector<int> y = map_inference(model, g, x, f, 123);
        const double got = crf_score(model, g, x, f, y);
        const double baseline =
            crf_score(model, g, x, f, unary_argmax(model, x));
        CHECK(got >= baseline - 1e-12);
        CHECK(got <= optimum + 1e-9);
    }
}

TEST_CASE("map_inference is deterministic per seed") {
    Rng rng(77);
    PageGraph g = random_graph(6, 9, rng);
    Matrix x = random_matrix(6, 2, rng);
    Matrix f = random_matrix(2, g.edge_count(), rng);
    CrfModel model = random_crf(2, 2, rng);
    CHECK(map_inference(model, g, x, f, 5) == map_inference(model, g, x, f, 5));
}

TEST_CASE("score is linear in the parameters") {
    Rng rng(78);
    PageGraph g = random_graph(4, 5, rng);
    Matrix x = random_matrix(4, 2, rng);
    Matrix f = random_matrix(2, g.edge_count(), rng);
    CrfModel a = random_crf(2, 2, rng);
    CrfModel b = random_crf(2, 2, rng);
    std::vector<int> y = {0, 2, 4, 1};

    CrfModel sum = zero_crf(2, 2);
    for (std::size_t i = 0; i < sum.theta.data().size(); ++i)
        sum.theta.data()[i] = a.theta.data()[i] + 2.0 * b.theta.data()[i];
    for (int o = 0; o < 2; ++o)
        for (std::size_t i = 0; i < sum.pairwise[o].data().size(); ++i)
            sum.pairwise[o].data()[i] = a.pairwise[o].data()[i] + 2.0 * b.pairwise[o].data()[i];

    CHECK(crf_score(sum, g, x, f, y) ==
          doctest::Approx(crf_score(a, g, x, f, y) + 2.0 * crf_score(b, g, x, f, y))
              .epsilon(1e-12));
}

TEST_CASE("positive scaling preserves the argmax on trees") {
    Rng rng(79);
    PageGraph g = random_tree(5, rng);
    Matrix x = random_matrix(5, 2, rng);
    Matrix f = random_matrix(2, g.edge_count(), rng);
    CrfModel model = random_crf(2, 2, rng);

    CrfModel scaled = model;
    for (double& v : scaled.theta.data()) v *= 3.5;
    for (Matrix& block : scaled.pairwise)
        for (double& v : block.data()) v *= 3.5;

    CHECK(map_inference(model, g, x, f) == map_inference(scaled, g, x, f));
}

TEST_CASE("loss_augmented_map with zero scale is plain inference") {
    Rng rng(80);
    PageGraph g = random_tree(5, rng);
    Matrix x = random_matrix(5, 2, rng);
    Matrix f = random_matrix(2, g.edge_count(), rng);
    CrfModel model = random_crf(2, 2, rng);
    std::vector<int> gold = {1, 0, 4, 2, 3};

    CHECK(loss_augmented_map(model, g, x, f, gold, 0.0) == map_inference(model, g, x, f));
}

TEST_CASE("loss augmentation maximizes score plus Hamming distance") {
    Rng rng(81);
    for (int trial = 0; trial < 8; ++trial) {
        PageGraph g = random_tree(4, rng);
        Matrix x = random_matrix(4, 2, rng);
        Matrix f = random_matrix(2, g.edge_count(), rng);
        CrfModel model = random_crf(2, 2, rng);
        std::vector<int> gold(4);
        for (int& v : gold) v = static_cast<int>(rng.below(5));
        const double scale = 0.7;

        // Brute force the augmented objective.
        std::vector<int> y(4, 0);
        double best = -1e300;
        while (true) {
            double s = crf_score(model, g, x, f, y);
            for (int i = 0; i < 4; ++i) s += (y[i] != gold[i]) * scale;
            best = std::max(best, s);
            int i = 0;
            while (i < 4 && ++y[i] == kNumLabels) y[i++] = 0;
            if (i == 4) break;
        }

        std::vector<int> got = loss_augmented_map(model, g, x, f, gold, scale);
        double got_score = crf_score(model, g, x, f, got);
        for (int i = 0; i < 4; ++i) got_score += (got[i] != gold[i]) * scale;
        CHECK(got_score == doctest::Approx(best).epsilon(1e-10));
    }
}

namespace {

/// Instances where the node features alone decide the label.
std::vector<CrfInstance> separable_instances(int count, Rng& rng) {
    std::vector<CrfInstance> out;
    for (int p = 0; p < count; ++p) {
        CrfInstance inst;
        inst.page_id = "page-" + std::to_string(p);
        inst.graph = random_tree(8, rng);
        inst.x = Matrix(8, 5);
        inst.labels.resize(8);
        for (int i = 0; i < 8; ++i) {
            inst.labels[i] = static_cast<int>(rng.below(5));
            for (int j = 0; j < 5; ++j)
                inst.x(i, j) = (j == inst.labels[i] ? 1.0 : 0.0) + rng.uniform(-0.05, 0.05);
        }
        inst.f = random_matrix(2, inst.graph.edge_count(), rng, 0.0, 1.0);
        out.push_back(std::move(inst));
    }
    return out;
}

double crf_accuracy(const CrfModel& model, const std::vector<CrfInstance>& instances) {
    int correct = 0, total = 0;
    for (const CrfInstance& inst : instances) {
        std::vector<int> y = map_inference(model, inst.graph, inst.x, inst.f);
        for (std::size_t i = 0; i < y.size(); ++i) {
            ++total;
            correct += y[i] == inst.labels[i];
        }
    }
    return static_cast<double>(correct) / total;
}

}  // namespace

TEST_CASE("training separates an easy dataset") {
    Rng rng(82);
    std::vector<CrfInstance> instances = separable_instances(12, rng);
    CrfTrainConfig config;
    config.iterations = 600;
    config.seed = 3;

    CrfTrainLog log;
    CrfModel model = train_crf(instances, config, &log);
    CHECK(crf_accuracy(model, instances) >= 0.99);
    CHECK(log.steps == 600);
    CHECK(log.best_step >= 0);
    CHECK(std::isfinite(log.best_objective));
}

TEST_CASE("more steps do not hurt the tracked objective") {
    Rng rng(83);
    std::vector<CrfInstance> instances = separable_instances(6, rng);
    CrfTrainConfig config;
    config.seed = 1;

    config.iterations = 100;
    CrfTrainLog short_log;
    train_crf(instances, config, &short_log);

    config.iterations = 1000;
    CrfTrainLog long_log;
    train_crf(instances, config, &long_log);

    // Best-iterate tracking makes the objective monotone in the budget.
    CHECK(long_log.best_objective <= short_log.best_objective + 1e-9);
}

TEST_CASE("zero iterations returns the zero model") {
    Rng rng(84);
    std::vector<CrfInstance> instances = separable_instances(2, rng);
    CrfTrainConfig config;
    config.iterations = 0;
    CrfModel model = train_crf(instances, config);
    for (double v : model.theta.data()) CHECK(v == 0.0);
    for (const Matrix& block : model.pairwise)
        for (double v : block.data()) CHECK(v == 0.0);
}

TEST_CASE("training is deterministic per seed") {
    Rng rng(85);
    std::vector<CrfInstance> instances = separable_instances(4, rng);
    CrfTrainConfig config;
    config.iterations = 120;
    config.seed = 42;

    CrfModel a = train_crf(instances, config);
    CrfModel b = train_crf(instances, config);
    CHECK(a.theta == b.theta);
    CHECK(a.pairwise[0] == b.pairwise[0]);
    CHECK(a.pairwise[1] == b.pairwise[1]);
}

TEST_CASE("training validates its inputs") {
    Rng rng(86);
    std::vector<CrfInstance> instances = separable_instances(2, rng);
    CrfTrainConfig config;
    config.iterations = 10;

    CHECK_THROWS_AS(train_crf({}, config), Error);

    instances[1].labels[3] = -1;
    CHECK_THROWS_AS(train_crf(instances, config), Error);
}

TEST_CASE("predict_crf wraps map_inference in BIESO labels") {
    Rng rng(87);
    PageGraph g = random_tree(5, rng);
    Matrix x = random_matrix(5, 2, rng);
    Matrix f = random_matrix(2, g.edge_count(), rng);
    CrfModel model = random_crf(2, 2, rng);

    std::vector<int> y = map_inference(model, g, x, f, 9);
    std::vector<BiesoLabel> labels = predict_crf(model, g, x, f, 9);
    REQUIRE(labels.size() == y.size());
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(static_cast<int>(labels[i]) == y[i]);
}
