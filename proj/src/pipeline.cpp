#include "tablegraph/pipeline.hpp"

#include <algorithm>

namespace tablegraph {

namespace {

std::vector<int> gold_label_ints(const Page& page) {
    std::vector<int> labels(page.lines.size(), -1);
    for (std::size_t i = 0; i < page.lines.size(); ++i)
        if (page.lines[i].label) labels[i] = static_cast<int>(*page.lines[i].label);
    return labels;
}

std::uint64_t page_seed(std::uint64_t model_seed, const std::string& page_id) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the page id
    for (char c : page_id) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h ^ model_seed;
}

GraphTensors page_tensors(const Page& page, const PagePack& pack) {
    return assemble_tensors(page, pack.graph, pack.nodes.X, pack.edges.F);
}

Matrix logit_inputs(const ModelContainer& model, const PagePack& pack) {
    if (model.kind == LearnerKind::Logit1Conv) return augment_1conv(pack.graph, pack.nodes.X);
    return pack.nodes.X;
}

void check_features(const ModelContainer& model, const PagePack& pack,
                    const std::string& page_id) {
    if (model.feature_set != kFeatureSetVersion)
        throw Error("model was trained with feature set '" + model.feature_set +
                    "', this build provides '" + kFeatureSetVersion + "'");
    if (pack.nodes.names != model.node_feature_names)
        throw Error("node feature mismatch between model and page '" + page_id + "'");
    if (pack.edges.names != model.edge_feature_names)
        throw Error("edge feature mismatch between model and page '" + page_id + "'");
}

}  // namespace

EdgeFeatures apply_edge_mode(const EdgeFeatures& f, EdgeFeatureMode mode) {
    if (mode == EdgeFeatureMode::Full) return f;
    const int m = f.F.cols();
    EdgeFeatures out;
    if (mode == EdgeFeatureMode::Const1) {
        out.names = {"const_one"};
        out.F = Matrix(1, m, 1.0);
        return out;
    }
    // orientation one-hot only
    out.names = {"is_horizontal", "is_vertical"};
    out.F = Matrix(2, m);
    const auto it_h = std::find(f.names.begin(), f.names.end(), "is_horizontal");
    const auto it_v = std::find(f.names.begin(), f.names.end(), "is_vertical");
    if (it_h == f.names.end() || it_v == f.names.end())
        throw Error("edge features lack the orientation one-hot");
    const int rh = static_cast<int>(it_h - f.names.begin());
    const int rv = static_cast<int>(it_v - f.names.begin());
    for (int j = 0; j < m; ++j) {
        out.F(0, j) = f.F(rh, j);
        out.F(1, j) = f.F(rv, j);
    }
    return out;
}

PagePack raw_pack(const Page& page, const GraphParams& params) {
    PagePack pack;
    pack.graph = build_graph(page, params);
    pack.nodes = node_features(page, pack.graph);
    pack.edges = edge_features(page, pack.graph);
    return pack;
}

QuantileNormalizer fit_normalizer_on(const std::vector<Page>& pages, const GraphParams& params,
                                     int knots) {
    std::vector<NodeFeatures> nodes(pages.size());
    std::vector<EdgeFeatures> edges(pages.size());
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < static_cast<int>(pages.size()); ++i) {
        PagePack pack = raw_pack(pages[i], params);
        nodes[i] = std::move(pack.nodes);
        edges[i] = std::move(pack.edges);
    }
    return QuantileNormalizer::fit(nodes, edges, knots);
}

std::vector<PagePack> prepare_pages(const std::vector<Page>& pages, const GraphParams& params,
                                    EdgeFeatureMode mode, const QuantileNormalizer& normalizer) {
    std::vector<PagePack> packs(pages.size());
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < static_cast<int>(pages.size()); ++i) {
        PagePack pack = raw_pack(pages[i], params);
        normalizer.apply(pack.nodes);
        normalizer.apply(pack.edges);
        pack.edges = apply_edge_mode(pack.edges, mode);
        packs[i] = std::move(pack);
    }
    return packs;
}

ModelContainer train_learner(const std::vector<Page>& pages, const LearnerSpec& spec,
                             TrainStats* stats) {
    if (pages.empty()) throw Error("train_learner: empty dataset");

    ModelContainer model;
    model.kind = spec.kind;
    model.graph = spec.graph;
    model.edge_mode = spec.edge_mode;
    model.normalizer = fit_normalizer_on(pages, spec.graph, spec.normalizer_knots);

    const std::vector<PagePack> packs =
        prepare_pages(pages, spec.graph, spec.edge_mode, model.normalizer);
    model.node_feature_names = packs.front().nodes.names;
    model.edge_feature_names = packs.front().edges.names;

    switch (spec.kind) {
        case LearnerKind::Gcn:
        case LearnerKind::Ecn: {
            std::vector<GraphTensors> tensors;
            tensors.reserve(pages.size());
            for (std::size_t i = 0; i < pages.size(); ++i)
                tensors.push_back(page_tensors(pages[i], packs[i]));
            const ModelKind kind =
                spec.kind == LearnerKind::Gcn ? ModelKind::Gcn : ModelKind::Ecn;
            model.neural =
                train(tensors, kind, spec.neural, spec.train, stats ? &stats->neural : nullptr);
            model.seed = spec.train.seed;
            break;
        }
        case LearnerKind::LogitStandard:
        case LearnerKind::Logit1Conv: {
            int total = 0, width = 0;
            std::vector<Matrix> xs;
            std::vector<int> labels;
            for (std::size_t i = 0; i < pages.size(); ++i) {
                Matrix x = spec.kind == LearnerKind::Logit1Conv
                               ? augment_1conv(packs[i].graph, packs[i].nodes.X)
                               : packs[i].nodes.X;
                width = x.cols();
                total += x.rows();
                const std::vector<int> page_labels = gold_label_ints(pages[i]);
                labels.insert(labels.end(), page_labels.begin(), page_labels.end());
                xs.push_back(std::move(x));
            }
            Matrix stacked(total, width);
            int row = 0;
            for (const Matrix& x : xs)
                for (int i = 0; i < x.rows(); ++i, ++row)
                    std::copy(x.row(i), x.row(i) + width, stacked.row(row));
            const LogitFlavor flavor = spec.kind == LearnerKind::Logit1Conv
                                           ? LogitFlavor::OneConv
                                           : LogitFlavor::Standard;
            model.logit = train_logit(stacked, labels, spec.logit, flavor);
            if (stats) stats->logit_loss = logit_loss(model.logit, stacked, labels, spec.logit.l2);
            break;
        }
        case LearnerKind::Crf: {
            std::vector<CrfInstance> instances;
            for (std::size_t i = 0; i < pages.size(); ++i) {
                CrfInstance inst;
                inst.graph = packs[i].graph;
                inst.x = packs[i].nodes.X;
                inst.f = packs[i].edges.F;
                inst.labels = gold_label_ints(pages[i]);
                inst.page_id = pages[i].id;
                instances.push_back(std::move(inst));
            }
            model.crf = train_crf(instances, spec.crf, stats ? &stats->crf : nullptr);
            model.seed = spec.crf.seed;
            break;
        }
    }
    return model;
}

std::vector<BiesoLabel> predict_page(const ModelContainer& model, const Page& page) {
    PagePack pack = raw_pack(page, model.graph);
    model.normalizer.apply(pack.nodes);
    model.normalizer.apply(pack.edges);
    pack.edges = apply_edge_mode(pack.edges, model.edge_mode);
    check_features(model, pack, page.id);

    switch (model.kind) {
        case LearnerKind::Gcn:
        case LearnerKind::Ecn:
            return predict(model.neural, page_tensors(page, pack));
        case LearnerKind::LogitStandard:
        case LearnerKind::Logit1Conv: {
            const Matrix x = logit_inputs(model, pack);
            if (x.cols() != model.logit.weights.rows())
                throw Error("logit feature width mismatch on page '" + page.id + "'");
            return predict_logit(model.logit, x);
        }
        case LearnerKind::Crf:
            return predict_crf(model.crf, pack.graph, pack.nodes.X, pack.edges.F,
                               page_seed(model.seed, page.id));
    }
    throw Error("predict_page: unknown model kind");
}

void predict_dataset(const ModelContainer& model, std::vector<Page>& pages) {
    std::vector<std::vector<BiesoLabel>> results(pages.size());
    std::vector<std::string> errors(pages.size());
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < static_cast<int>(pages.size()); ++i) {
        try {
            results[i] = predict_page(model, pages[i]);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    }
    for (const std::string& err : errors)
        if (!err.empty()) throw Error(err);
    for (std::size_t i = 0; i < pages.size(); ++i)
        for (std::size_t l = 0; l < pages[i].lines.size(); ++l)
            pages[i].lines[l].predicted = results[i][l];
}

}  // namespace tablegraph
