// tablegraph: synthesize pages, train taggers, predict, decode rows, evaluate.
// File-based stage boundaries so every step is scriptable and reproducible.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tablegraph/docmodel.hpp"
#include "tablegraph/eval.hpp"
#include "tablegraph/modelio.hpp"
#include "tablegraph/pipeline.hpp"
#include "tablegraph/rowdecode.hpp"
#include "tablegraph/synthgen.hpp"

namespace fs = std::filesystem;
namespace tg = tablegraph;

namespace {

const std::map<std::string, tg::LearnerKind> kKindMap{
    {"logit", tg::LearnerKind::LogitStandard}, {"logit1conv", tg::LearnerKind::Logit1Conv},
    {"gcn", tg::LearnerKind::Gcn},             {"ecn", tg::LearnerKind::Ecn},
    {"crf", tg::LearnerKind::Crf}};
const std::map<std::string, tg::EdgeFeatureMode> kEdgeModeMap{
    {"full", tg::EdgeFeatureMode::Full},
    {"const1", tg::EdgeFeatureMode::Const1},
    {"orientation", tg::EdgeFeatureMode::OrientationOnly}};
const std::map<std::string, tg::EcnVariant> kVariantMap{
    {"fullstack", tg::EcnVariant::FullStacking},
    {"sumstack", tg::EcnVariant::SumStacking},
    {"adding", tg::EcnVariant::Adding}};
const std::map<std::string, tg::DirectionMode> kDirectionMap{
    {"both", tg::DirectionMode::Both}, {"forward", tg::DirectionMode::Forward}};

struct LearnerArgs {
    tg::LearnerSpec spec;
    std::uint64_t seed = 0;
    double lr = -1;       // shared flag, applied to whichever learner runs
    int iterations = -1;  // shared between logit and crf
};

void add_learner_flags(CLI::App* cmd, LearnerArgs& a) {
    cmd->add_option("kind", a.spec.kind, "learner: logit|logit1conv|gcn|ecn|crf")
        ->required()
        ->transform(CLI::CheckedTransformer(kKindMap));
    cmd->add_option("--seed", a.seed, "rng seed (env TABLEGRAPH_SEED)")
        ->envname("TABLEGRAPH_SEED")
        ->capture_default_str();
    cmd->add_option("--min-overlap", a.spec.graph.min_overlap,
                    "line-of-sight projection overlap fraction")
        ->capture_default_str();
    cmd->add_option("--max-gap", a.spec.graph.max_gap, "edge gap cutoff, negative = unlimited")
        ->capture_default_str();
    cmd->add_option("--edge-features", a.spec.edge_mode, "full|const1|orientation")
        ->transform(CLI::CheckedTransformer(kEdgeModeMap));
    cmd->add_option("--knots", a.spec.normalizer_knots, "quantile normalizer knots")
        ->capture_default_str();
    cmd->add_option("--layers", a.spec.neural.layers, "gcn/ecn layer count")
        ->capture_default_str();
    cmd->add_option("--convs", a.spec.neural.convolutions, "ecn convolutions per layer")
        ->capture_default_str();
    cmd->add_option("--width", a.spec.neural.hidden_width, "hidden width")
        ->capture_default_str();
    cmd->add_option("--variant", a.spec.neural.variant, "ecn combine: fullstack|sumstack|adding")
        ->transform(CLI::CheckedTransformer(kVariantMap));
    cmd->add_option("--direction", a.spec.neural.direction, "ecn gating: both|forward")
        ->transform(CLI::CheckedTransformer(kDirectionMap));
    cmd->add_option("--dropout", a.spec.neural.dropout, "hidden dropout probability")
        ->capture_default_str();
    cmd->add_option("--epochs", a.spec.train.max_epochs, "gcn/ecn epoch cap")
        ->capture_default_str();
    cmd->add_option("--patience", a.spec.train.patience, "early stopping patience")
        ->capture_default_str();
    cmd->add_option("--val-frac", a.spec.train.validation_fraction, "validation page fraction")
        ->capture_default_str();
    cmd->add_option("--lr", a.lr, "learning rate (default 0.001 gcn/ecn, 1.0 logit)");
    cmd->add_option("--iterations", a.iterations,
                    "optimizer steps (default 500 logit, 1500 crf)");
    cmd->add_option("--l2", a.spec.logit.l2, "logit ridge strength")->capture_default_str();
    cmd->add_option("--lambda", a.spec.crf.lambda, "crf regularization strength")
        ->capture_default_str();
}

tg::LearnerSpec resolve_spec(const LearnerArgs& a) {
    tg::LearnerSpec spec = a.spec;
    spec.train.seed = a.seed;
    spec.crf.seed = a.seed;
    if (a.lr >= 0) {
        spec.train.learning_rate = a.lr;
        spec.logit.learning_rate = a.lr;
    }
    if (a.iterations >= 0) {
        spec.logit.iterations = a.iterations;
        spec.crf.iterations = a.iterations;
    }
    return spec;
}

void log_spec(const tg::LearnerSpec& spec) {
    std::cerr << "config: kind=" << tg::learner_kind_name(spec.kind)
              << " edge_features=" << tg::edge_feature_mode_name(spec.edge_mode)
              << " min_overlap=" << spec.graph.min_overlap << " max_gap=" << spec.graph.max_gap
              << " knots=" << spec.normalizer_knots;
    switch (spec.kind) {
        case tg::LearnerKind::Gcn:
        case tg::LearnerKind::Ecn:
            std::cerr << " layers=" << spec.neural.layers
                      << " convs=" << spec.neural.convolutions
                      << " width=" << spec.neural.hidden_width
                      << " variant=" << static_cast<int>(spec.neural.variant)
                      << " direction=" << static_cast<int>(spec.neural.direction)
                      << " dropout=" << spec.neural.dropout << " lr=" << spec.train.learning_rate
                      << " epochs=" << spec.train.max_epochs
                      << " patience=" << spec.train.patience
                      << " val_frac=" << spec.train.validation_fraction
                      << " seed=" << spec.train.seed;
            break;
        case tg::LearnerKind::LogitStandard:
        case tg::LearnerKind::Logit1Conv:
            std::cerr << " lr=" << spec.logit.learning_rate
                      << " iterations=" << spec.logit.iterations << " l2=" << spec.logit.l2;
            break;
        case tg::LearnerKind::Crf:
            std::cerr << " iterations=" << spec.crf.iterations << " lambda=" << spec.crf.lambda
                      << " seed=" << spec.crf.seed;
            break;
    }
    std::cerr << "\n";
}

std::vector<tg::TableStructure> load_gold_structures(const tg::Dataset& ds,
                                                     const std::string& dir) {
    std::vector<tg::TableStructure> golds;
    golds.reserve(ds.pages.size());
    for (const auto& page : ds.pages)
        golds.push_back(tg::load_structure((fs::path(dir) / (page.id + ".gold.json")).string()));
    return golds;
}

int run_synth(int pages, const std::string& preset, std::uint64_t seed, const std::string& out) {
    tg::SynthConfig config = preset == "easy" ? tg::easy_preset() : tg::writers_preset();
    std::cerr << "config: synth pages=" << pages << " preset=" << preset << " seed=" << seed
              << " out=" << out << "\n";
    tg::SynthDataset data = tg::generate_dataset(config, pages, seed);
    fs::create_directories(out);
    std::vector<std::string> paths;
    for (std::size_t i = 0; i < data.dataset.pages.size(); ++i) {
        const tg::Page& page = data.dataset.pages[i];
        tg::save_page_file(page, (fs::path(out) / (page.id + ".json")).string());
        tg::save_structure(data.golds[i], (fs::path(out) / (page.id + ".gold.json")).string());
        paths.push_back(page.id + ".json");
    }
    tg::save_manifest(paths, data.dataset.folds, (fs::path(out) / "manifest.json").string());
    std::cout << "wrote " << paths.size() << " pages to " << out << "\n";
    return 0;
}

int run_train(const LearnerArgs& args, const std::string& data, const std::string& out) {
    const tg::LearnerSpec spec = resolve_spec(args);
    log_spec(spec);
    tg::Dataset ds = tg::load_dataset(data);
    tg::TrainStats stats;
    tg::ModelContainer model = tg::train_learner(ds.pages, spec, &stats);
    tg::save_model(model, out);
    switch (spec.kind) {
        case tg::LearnerKind::Gcn:
        case tg::LearnerKind::Ecn:
            std::cout << "trained on " << ds.pages.size() << " pages: epochs="
                      << stats.neural.epochs_run << " best_epoch=" << stats.neural.best_epoch
                      << " val_loss=" << stats.neural.best_validation_loss
                      << " train_loss=" << stats.neural.final_train_loss << "\n";
            break;
        case tg::LearnerKind::LogitStandard:
        case tg::LearnerKind::Logit1Conv:
            std::cout << "trained on " << ds.pages.size() << " pages: loss=" << stats.logit_loss
                      << "\n";
            break;
        case tg::LearnerKind::Crf:
            std::cout << "trained on " << ds.pages.size() << " pages: steps=" << stats.crf.steps
                      << " best_step=" << stats.crf.best_step
                      << " objective=" << stats.crf.best_objective << "\n";
            break;
    }
    std::cout << "model written to " << out << "\n";
    return 0;
}

int run_predict(const std::string& model_path, const std::string& data, const std::string& out) {
    std::cerr << "config: predict model=" << model_path << " data=" << data << " out=" << out
              << "\n";
    tg::ModelContainer model = tg::load_model(model_path);
    tg::Dataset ds = tg::load_dataset(data);
    tg::predict_dataset(model, ds.pages);
    fs::create_directories(out);
    std::vector<std::string> paths;
    for (const auto& page : ds.pages) {
        tg::save_page_file(page, (fs::path(out) / (page.id + ".json")).string());
        paths.push_back(page.id + ".json");
    }
    tg::save_manifest(paths, ds.folds, (fs::path(out) / "manifest.json").string());
    std::cout << "predicted " << paths.size() << " pages to " << out << "\n";
    return 0;
}

int run_decode(const std::string& data, const std::string& labels, const std::string& out) {
    std::cerr << "config: decode data=" << data << " labels=" << labels << " out=" << out << "\n";
    tg::Dataset ds = tg::load_dataset(data);
    fs::create_directories(out);
    for (const auto& page : ds.pages) {
        tg::TableStructure s = tg::decode(page, labels == "predicted");
        tg::save_structure(s, (fs::path(out) / (page.id + ".structure.json")).string());
    }
    std::cout << "decoded " << ds.pages.size() << " pages to " << out << "\n";
    return 0;
}

int run_eval(const std::string& data, const std::string& structures, double threshold,
             const std::string& out) {
    std::cerr << "config: eval data=" << data << " structures=" << structures
              << " row_threshold=" << threshold << "\n";
    tg::Dataset ds = tg::load_dataset(data);
    std::vector<tg::TableStructure> golds;
    if (!structures.empty()) golds = load_gold_structures(ds, structures);
    tg::EvalReport report =
        tg::evaluate_pages(ds.pages, structures.empty() ? nullptr : &golds, threshold);
    std::cout << tg::report_to_text(report);
    if (!out.empty()) {
        tg::atomic_write(out, tg::report_to_json(report));
        std::cout << "report written to " << out << "\n";
    }
    return 0;
}

int run_crossval(const LearnerArgs& args, const std::string& data, int k,
                 const std::string& structures, const std::string& out) {
    const tg::LearnerSpec spec = resolve_spec(args);
    log_spec(spec);
    tg::Dataset ds = tg::load_dataset(data);
    std::vector<tg::TableStructure> golds;
    if (!structures.empty()) golds = load_gold_structures(ds, structures);
    tg::CrossvalResult result =
        tg::crossval(ds, spec, k, args.seed, structures.empty() ? nullptr : &golds);
    std::cout << tg::crossval_to_text(result);
    if (!out.empty()) {
        tg::atomic_write(out, tg::crossval_to_json(result));
        std::cout << "result written to " << out << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tablegraph: table row structure from text-line graphs"};
    app.require_subcommand(1);

    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    int synth_pages = 10;
    std::string synth_preset = "writers", synth_out;
    std::uint64_t synth_seed = 0;
    synth->add_option("--pages", synth_pages, "page count")->capture_default_str();
    synth->add_option("--preset", synth_preset, "easy|writers")
        ->check(CLI::IsMember({"easy", "writers"}))
        ->capture_default_str();
    synth->add_option("--seed", synth_seed, "rng seed (env TABLEGRAPH_SEED)")
        ->envname("TABLEGRAPH_SEED")
        ->capture_default_str();
    synth->add_option("--out", synth_out, "output directory")->required();

    auto* train = app.add_subcommand("train", "train a tagger on a dataset");
    LearnerArgs train_args;
    std::string train_data, train_out;
    add_learner_flags(train, train_args);
    train->add_option("--data", train_data, "manifest path")->required();
    train->add_option("--out", train_out, "model file")->required();

    auto* predict = app.add_subcommand("predict", "tag pages with a trained model");
    std::string pred_model, pred_data, pred_out;
    predict->add_option("--model", pred_model, "model file")->required();
    predict->add_option("--data", pred_data, "manifest path")->required();
    predict->add_option("--out", pred_out, "output directory")->required();

    auto* decode = app.add_subcommand("decode", "decode tags into table structures");
    std::string dec_data, dec_labels = "predicted", dec_out;
    decode->add_option("--data", dec_data, "manifest path")->required();
    decode->add_option("--labels", dec_labels, "predicted|gold")
        ->check(CLI::IsMember({"predicted", "gold"}))
        ->capture_default_str();
    decode->add_option("--out", dec_out, "output directory")->required();

    auto* eval = app.add_subcommand("eval", "score predictions against gold");
    std::string eval_data, eval_structures, eval_out;
    double eval_threshold = 0.50;
    eval->add_option("--data", eval_data, "manifest path")->required();
    eval->add_option("--structures", eval_structures,
                     "directory with <page>.gold.json structures");
    eval->add_option("--row-threshold", eval_threshold, "row match Jaccard threshold")
        ->capture_default_str();
    eval->add_option("--out", eval_out, "report JSON path");

    auto* crossval = app.add_subcommand("crossval", "k-fold cross validation");
    LearnerArgs cv_args;
    std::string cv_data, cv_structures, cv_out;
    int cv_k = 4;
    add_learner_flags(crossval, cv_args);
    crossval->add_option("--data", cv_data, "manifest path")->required();
    crossval->add_option("--k", cv_k, "fold count")->capture_default_str();
    crossval->add_option("--structures", cv_structures,
                         "directory with <page>.gold.json structures");
    crossval->add_option("--out", cv_out, "result JSON path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand(synth))
            return run_synth(synth_pages, synth_preset, synth_seed, synth_out);
        if (app.got_subcommand(train)) return run_train(train_args, train_data, train_out);
        if (app.got_subcommand(predict)) return run_predict(pred_model, pred_data, pred_out);
        if (app.got_subcommand(decode)) return run_decode(dec_data, dec_labels, dec_out);
        if (app.got_subcommand(eval)) return run_eval(eval_data, eval_structures, eval_threshold, eval_out);
        if (app.got_subcommand(crossval))
            return run_crossval(cv_args, cv_data, cv_k, cv_structures, cv_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
