#include "tablegraph/modelio.hpp"

#include <fstream>

#include "json.hpp"

namespace tablegraph {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr int kModelFormatVersion = 1;

ordered_json matrix_to_json(const Matrix& m) {
    ordered_json j;
    j["rows"] = m.rows();
    j["cols"] = m.cols();
    j["data"] = m.data();
    return j;
}

Matrix matrix_from_json(const nlohmann::json& j) {
    Matrix m(j.at("rows").get<int>(), j.at("cols").get<int>());
    const auto data = j.at("data").get<std::vector<double>>();
    if (data.size() != m.data().size())
        throw ParseError("model JSON: matrix data length does not match shape");
    m.data() = data;
    return m;
}

const char* variant_name(EcnVariant v) {
    switch (v) {
        case EcnVariant::FullStacking: return "fullstack";
        case EcnVariant::SumStacking: return "sumstack";
        case EcnVariant::Adding: return "adding";
    }
    return "fullstack";
}

EcnVariant variant_from_name(const std::string& name) {
    if (name == "fullstack") return EcnVariant::FullStacking;
    if (name == "sumstack") return EcnVariant::SumStacking;
    if (name == "adding") return EcnVariant::Adding;
    throw ParseError("model JSON: unknown ECN variant '" + name + "'");
}

ordered_json neural_to_json(const NeuralModel& m) {
    ordered_json j;
    j["config"] = ordered_json{{"layers", m.config.layers},
                               {"convolutions", m.config.convolutions},
                               {"hidden_width", m.config.hidden_width},
                               {"variant", variant_name(m.config.variant)},
                               {"direction",
                                m.config.direction == DirectionMode::Both ? "both" : "forward"},
                               {"dropout", m.config.dropout}};
    j["node_dim"] = m.node_dim;
    j["edge_dim"] = m.edge_dim;
    j["layers"] = ordered_json::array();
    for (const NeuralLayer& layer : m.layers) {
        ordered_json lj;
        lj["weights"] = matrix_to_json(layer.weights);
        lj["gates"] = ordered_json::array();
        for (const EdgeGate& gate : layer.gates) {
            ordered_json gj;
            gj["forward"] = gate.forward_w;
            gj["backward"] = gate.backward_w;
            lj["gates"].push_back(std::move(gj));
        }
        j["layers"].push_back(std::move(lj));
    }
    j["out_weights"] = matrix_to_json(m.out_weights);
    j["out_bias"] = m.out_bias;
    return j;
}

NeuralModel neural_from_json(const nlohmann::json& j, ModelKind kind) {
    NeuralModel m;
    m.kind = kind;
    const auto& cj = j.at("config");
    m.config.layers = cj.at("layers").get<int>();
    m.config.convolutions = cj.at("convolutions").get<int>();
    m.config.hidden_width = cj.at("hidden_width").get<int>();
    m.config.variant = variant_from_name(cj.at("variant").get<std::string>());
    m.config.direction = cj.at("direction").get<std::string>() == "both" ? DirectionMode::Both
                                                                         : DirectionMode::Forward;
    m.config.dropout = cj.at("dropout").get<double>();
    m.node_dim = j.at("node_dim").get<int>();
    m.edge_dim = j.at("edge_dim").get<int>();
    for (const auto& lj : j.at("layers")) {
        NeuralLayer layer;
        layer.weights = matrix_from_json(lj.at("weights"));
        for (const auto& gj : lj.at("gates")) {
            EdgeGate gate;
            gate.forward_w = gj.at("forward").get<std::vector<double>>();
            gate.backward_w = gj.at("backward").get<std::vector<double>>();
            layer.gates.push_back(std::move(gate));
        }
        m.layers.push_back(std::move(layer));
    }
    m.out_weights = matrix_from_json(j.at("out_weights"));
    m.out_bias = j.at("out_bias").get<std::vector<double>>();
    return m;
}

}  // namespace

std::string learner_kind_name(LearnerKind kind) {
    switch (kind) {
        case LearnerKind::LogitStandard: return "logit";
        case LearnerKind::Logit1Conv: return "logit1conv";
        case LearnerKind::Gcn: return "gcn";
        case LearnerKind::Ecn: return "ecn";
        case LearnerKind::Crf: return "crf";
    }
    return "ecn";
}

LearnerKind learner_kind_from_name(const std::string& name) {
    if (name == "logit") return LearnerKind::LogitStandard;
    if (name == "logit1conv") return LearnerKind::Logit1Conv;
    if (name == "gcn") return LearnerKind::Gcn;
    if (name == "ecn") return LearnerKind::Ecn;
    if (name == "crf") return LearnerKind::Crf;
    throw Error("unknown model kind '" + name + "'");
}

std::string edge_feature_mode_name(EdgeFeatureMode mode) {
    switch (mode) {
        case EdgeFeatureMode::Full: return "full";
        case EdgeFeatureMode::Const1: return "const1";
        case EdgeFeatureMode::OrientationOnly: return "orientation";
    }
    return "full";
}

EdgeFeatureMode edge_feature_mode_from_name(const std::string& name) {
    if (name == "full") return EdgeFeatureMode::Full;
    if (name == "const1") return EdgeFeatureMode::Const1;
    if (name == "orientation") return EdgeFeatureMode::OrientationOnly;
    throw Error("unknown edge feature mode '" + name + "'");
}

std::string model_to_json(const ModelContainer& model) {
    ordered_json j;
    j["format_version"] = kModelFormatVersion;
    j["model_kind"] = learner_kind_name(model.kind);
    j["feature_set"] = model.feature_set;
    j["edge_feature_mode"] = edge_feature_mode_name(model.edge_mode);
    j["seed"] = model.seed;
    j["graph_params"] =
        ordered_json{{"min_overlap", model.graph.min_overlap}, {"max_gap", model.graph.max_gap}};
    j["node_feature_names"] = model.node_feature_names;
    j["edge_feature_names"] = model.edge_feature_names;
    j["normalizer"] = ordered_json{{"node_knots", model.normalizer.node_knots()},
                                   {"edge_knots", model.normalizer.edge_knots()}};
    switch (model.kind) {
        case LearnerKind::Gcn:
        case LearnerKind::Ecn:
            j["neural"] = neural_to_json(model.neural);
            break;
        case LearnerKind::LogitStandard:
        case LearnerKind::Logit1Conv:
            j["logit"] = ordered_json{{"weights", matrix_to_json(model.logit.weights)},
                                      {"bias", model.logit.bias}};
            break;
        case LearnerKind::Crf:
            j["crf"] = ordered_json{{"theta", matrix_to_json(model.crf.theta)},
                                    {"pairwise_horizontal", matrix_to_json(model.crf.pairwise[0])},
                                    {"pairwise_vertical", matrix_to_json(model.crf.pairwise[1])}};
            break;
    }
    return j.dump(2) + "\n";
}

ModelContainer model_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("model JSON parse error: ") + e.what());
    }
    ModelContainer model;
    try {
        const int version = j.at("format_version").get<int>();
        if (version != kModelFormatVersion)
            throw Error("unsupported model format_version " + std::to_string(version));
        model.kind = learner_kind_from_name(j.at("model_kind").get<std::string>());
        model.feature_set = j.at("feature_set").get<std::string>();
        model.edge_mode = edge_feature_mode_from_name(j.at("edge_feature_mode").get<std::string>());
        model.seed = j.at("seed").get<std::uint64_t>();
        model.graph.min_overlap = j.at("graph_params").at("min_overlap").get<double>();
        model.graph.max_gap = j.at("graph_params").at("max_gap").get<double>();
        model.node_feature_names = j.at("node_feature_names").get<std::vector<std::string>>();
        model.edge_feature_names = j.at("edge_feature_names").get<std::vector<std::string>>();
        model.normalizer.set_knots(
            j.at("normalizer").at("node_knots").get<std::vector<std::vector<double>>>(),
            j.at("normalizer").at("edge_knots").get<std::vector<std::vector<double>>>());
        switch (model.kind) {
            case LearnerKind::Gcn:
                model.neural = neural_from_json(j.at("neural"), ModelKind::Gcn);
                break;
            case LearnerKind::Ecn:
                model.neural = neural_from_json(j.at("neural"), ModelKind::Ecn);
                break;
            case LearnerKind::LogitStandard:
            case LearnerKind::Logit1Conv:
                model.logit.weights = matrix_from_json(j.at("logit").at("weights"));
                model.logit.bias = j.at("logit").at("bias").get<std::vector<double>>();
                model.logit.flavor = model.kind == LearnerKind::Logit1Conv ? LogitFlavor::OneConv
                                                                           : LogitFlavor::Standard;
                break;
            case LearnerKind::Crf:
                model.crf.theta = matrix_from_json(j.at("crf").at("theta"));
                model.crf.pairwise[0] = matrix_from_json(j.at("crf").at("pairwise_horizontal"));
                model.crf.pairwise[1] = matrix_from_json(j.at("crf").at("pairwise_vertical"));
                break;
        }
        model.neural.seed = model.seed;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("model JSON: ") + e.what());
    }
    return model;
}

void save_model(const ModelContainer& model, const std::string& path) {
    atomic_write(path, model_to_json(model));
}

ModelContainer load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open model file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return model_from_json(text);
}

}  // namespace tablegraph
