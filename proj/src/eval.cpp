#include "tablegraph/eval.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "tablegraph/rng.hpp"

namespace tablegraph {

namespace {

using nlohmann::ordered_json;

double safe_div(double num, double den) { return den == 0 ? 0.0 : num / den; }

}  // namespace

std::int64_t LabelTally::total() const {
    std::int64_t t = 0;
    for (const auto& row : confusion)
        for (auto v : row) t += v;
    return t;
}

std::int64_t LabelTally::correct() const {
    std::int64_t c = 0;
    for (int i = 0; i < kNumLabels; ++i) c += confusion[i][i];
    return c;
}

double LabelTally::accuracy() const { return safe_div(double(correct()), double(total())); }

void LabelTally::add(const LabelTally& other) {
    for (int i = 0; i < kNumLabels; ++i)
        for (int j = 0; j < kNumLabels; ++j) confusion[i][j] += other.confusion[i][j];
}

LabelTally label_accuracy(const std::vector<BiesoLabel>& predicted,
                          const std::vector<BiesoLabel>& gold) {
    if (predicted.size() != gold.size())
        throw ValidationError("label_accuracy: got " + std::to_string(predicted.size()) +
                              " predictions for " + std::to_string(gold.size()) + " gold labels");
    LabelTally tally;
    for (std::size_t i = 0; i < gold.size(); ++i)
        tally.confusion[static_cast<int>(gold[i])][static_cast<int>(predicted[i])] += 1;
    return tally;
}

double RowMatchCounts::precision() const { return safe_div(double(correct), double(correct + spurious)); }
double RowMatchCounts::recall() const { return safe_div(double(correct), double(correct + missed)); }

double RowMatchCounts::f1() const {
    const double p = precision(), r = recall();
    return p + r == 0 ? 0.0 : 2 * p * r / (p + r);
}

void RowMatchCounts::add(const RowMatchCounts& other) {
    correct += other.correct;
    missed += other.missed;
    spurious += other.spurious;
}

RowMatchCounts row_match(const std::vector<std::vector<std::string>>& pred_rows,
                         const std::vector<std::vector<std::string>>& gold_rows,
                         double threshold) {
    struct Overlap {
        double jaccard;
        std::size_t gold, pred;
    };
    std::vector<std::set<std::string>> pred_sets, gold_sets;
    pred_sets.reserve(pred_rows.size());
    gold_sets.reserve(gold_rows.size());
    for (const auto& r : pred_rows) pred_sets.emplace_back(r.begin(), r.end());
    for (const auto& r : gold_rows) gold_sets.emplace_back(r.begin(), r.end());

    std::vector<Overlap> overlaps;
    for (std::size_t g = 0; g < gold_sets.size(); ++g) {
        for (std::size_t p = 0; p < pred_sets.size(); ++p) {
            std::vector<std::string> inter;
            std::set_intersection(gold_sets[g].begin(), gold_sets[g].end(),
                                  pred_sets[p].begin(), pred_sets[p].end(),
                                  std::back_inserter(inter));
            const std::size_t uni = gold_sets[g].size() + pred_sets[p].size() - inter.size();
            if (uni == 0) continue;
            const double jac = double(inter.size()) / double(uni);
            if (jac >= threshold) overlaps.push_back({jac, g, p});
        }
    }
    std::sort(overlaps.begin(), overlaps.end(), [](const Overlap& a, const Overlap& b) {
        if (a.jaccard != b.jaccard) return a.jaccard > b.jaccard;
        if (a.gold != b.gold) return a.gold < b.gold;
        return a.pred < b.pred;
    });

    std::vector<char> gold_used(gold_sets.size(), 0), pred_used(pred_sets.size(), 0);
    RowMatchCounts counts;
    for (const auto& o : overlaps) {
        if (gold_used[o.gold] || pred_used[o.pred]) continue;
        gold_used[o.gold] = pred_used[o.pred] = 1;
        counts.correct += 1;
    }
    counts.missed = std::int64_t(gold_sets.size()) - counts.correct;
    counts.spurious = std::int64_t(pred_sets.size()) - counts.correct;
    return counts;
}

EvalReport build_report(const LabelTally& labels, const RowMatchCounts& rows) {
    EvalReport report;
    report.accuracy = labels.accuracy();
    report.confusion = labels.confusion;
    for (int c = 0; c < kNumLabels; ++c) {
        std::int64_t tp = labels.confusion[c][c], gold_total = 0, pred_total = 0;
        for (int j = 0; j < kNumLabels; ++j) {
            gold_total += labels.confusion[c][j];
            pred_total += labels.confusion[j][c];
        }
        report.precision[c] = safe_div(double(tp), double(pred_total));
        report.recall[c] = safe_div(double(tp), double(gold_total));
        const double pr = report.precision[c] + report.recall[c];
        report.f1[c] = pr == 0 ? 0.0 : 2 * report.precision[c] * report.recall[c] / pr;
    }
    report.rows = rows;
    report.row_precision = rows.precision();
    report.row_recall = rows.recall();
    report.row_f1 = rows.f1();
    return report;
}

EvalReport evaluate_pages(const std::vector<Page>& pages,
                          const std::vector<TableStructure>* golds, double row_threshold) {
    if (golds && golds->size() != pages.size())
        throw ValidationError("evaluate_pages: " + std::to_string(golds->size()) +
                              " gold structures for " + std::to_string(pages.size()) + " pages");
    LabelTally labels;
    RowMatchCounts rows;
    for (std::size_t i = 0; i < pages.size(); ++i) {
        const Page& page = pages[i];
        std::vector<BiesoLabel> pred, gold;
        pred.reserve(page.lines.size());
        gold.reserve(page.lines.size());
        for (const auto& line : page.lines) {
            if (!line.label)
                throw ValidationError("page " + page.id + " line " + line.id + " has no gold label");
            if (!line.predicted)
                throw ValidationError("page " + page.id + " line " + line.id + " has no prediction");
            gold.push_back(*line.label);
            pred.push_back(*line.predicted);
        }
        labels.add(label_accuracy(pred, gold));

        TableStructure pred_struct = decode(page, /*use_predicted=*/true);
        TableStructure gold_struct =
            golds ? (*golds)[i] : decode(page, /*use_predicted=*/false);
        rows.add(row_match(row_line_ids(pred_struct), row_line_ids(gold_struct), row_threshold));
    }
    return build_report(labels, rows);
}

namespace {

ordered_json report_json(const EvalReport& r) {
    ordered_json j;
    j["accuracy"] = r.accuracy;
    ordered_json conf = ordered_json::array();
    for (const auto& row : r.confusion) conf.push_back(row);
    j["confusion"] = conf;
    ordered_json per_class = ordered_json::object();
    for (int c = 0; c < kNumLabels; ++c) {
        std::string name(1, to_char(static_cast<BiesoLabel>(c)));
        per_class[name] = {{"precision", r.precision[c]},
                           {"recall", r.recall[c]},
                           {"f1", r.f1[c]}};
    }
    j["per_class"] = per_class;
    j["rows"] = {{"correct", r.rows.correct}, {"missed", r.rows.missed},
                 {"spurious", r.rows.spurious}, {"precision", r.row_precision},
                 {"recall", r.row_recall}, {"f1", r.row_f1}};
    return j;
}

}  // namespace

std::string report_to_json(const EvalReport& report) { return report_json(report).dump(2) + "\n"; }

std::string report_to_text(const EvalReport& report) {
    std::ostringstream out;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "label accuracy  %.4f\n", report.accuracy);
    out << buf;
    out << "confusion (gold rows, predicted columns)\n      ";
    for (int c = 0; c < kNumLabels; ++c) out << "      " << to_char(static_cast<BiesoLabel>(c));
    out << '\n';
    for (int g = 0; g < kNumLabels; ++g) {
        out << "    " << to_char(static_cast<BiesoLabel>(g));
        for (int p = 0; p < kNumLabels; ++p) {
            std::snprintf(buf, sizeof(buf), " %6lld", static_cast<long long>(report.confusion[g][p]));
            out << buf;
        }
        out << '\n';
    }
    out << "per label  P / R / F1\n";
    for (int c = 0; c < kNumLabels; ++c) {
        std::snprintf(buf, sizeof(buf), "    %c  %.4f  %.4f  %.4f\n",
                      to_char(static_cast<BiesoLabel>(c)), report.precision[c], report.recall[c],
                      report.f1[c]);
        out << buf;
    }
    std::snprintf(buf, sizeof(buf),
                  "rows  correct %lld  missed %lld  spurious %lld  P %.4f  R %.4f  F1 %.4f\n",
                  static_cast<long long>(report.rows.correct),
                  static_cast<long long>(report.rows.missed),
                  static_cast<long long>(report.rows.spurious), report.row_precision,
                  report.row_recall, report.row_f1);
    out << buf;
    return out.str();
}

CrossvalResult crossval(const Dataset& dataset, const LearnerSpec& spec, int k,
                        std::uint64_t seed, const std::vector<TableStructure>* golds) {
    const std::size_t n = dataset.pages.size();
    if (k < 2) throw ValidationError("crossval: need k >= 2, got " + std::to_string(k));
    if (std::size_t(k) > n)
        throw ValidationError("crossval: k = " + std::to_string(k) + " exceeds " +
                              std::to_string(n) + " pages");
    if (golds && golds->size() != n)
        throw ValidationError("crossval: gold structure count does not match page count");

    // Fold assignment: the manifest's, when it already describes k folds.
    std::vector<int> fold_of(n, -1);
    bool manifest_ok = !dataset.folds.empty();
    if (manifest_ok) {
        std::unordered_set<int> distinct;
        for (std::size_t i = 0; i < n && manifest_ok; ++i) {
            auto it = dataset.folds.find(dataset.pages[i].id);
            if (it == dataset.folds.end() || it->second < 0 || it->second >= k) {
                manifest_ok = false;
            } else {
                fold_of[i] = it->second;
                distinct.insert(it->second);
            }
        }
        if (manifest_ok && int(distinct.size()) != k) manifest_ok = false;
    }
    if (!manifest_ok) {
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        Rng rng(seed);
        rng.shuffle(order);
        for (std::size_t i = 0; i < n; ++i) fold_of[order[i]] = int(i % std::size_t(k));
    }

    CrossvalResult result;
    LabelTally pooled_labels;
    RowMatchCounts pooled_rows;
    for (int fold = 0; fold < k; ++fold) {
        std::vector<Page> train_pages, test_pages;
        std::vector<TableStructure> test_golds;
        for (std::size_t i = 0; i < n; ++i) {
            if (fold_of[i] == fold) {
                test_pages.push_back(dataset.pages[i]);
                if (golds) test_golds.push_back((*golds)[i]);
            } else {
                train_pages.push_back(dataset.pages[i]);
            }
        }
        if (train_pages.empty() || test_pages.empty())
            throw ValidationError("crossval: fold " + std::to_string(fold) + " is degenerate");

        ModelContainer model = train_learner(train_pages, spec);
        predict_dataset(model, test_pages);

        LabelTally fold_labels;
        RowMatchCounts fold_rows;
        for (std::size_t i = 0; i < test_pages.size(); ++i) {
            const Page& page = test_pages[i];
            std::vector<BiesoLabel> pred, gold;
            for (const auto& line : page.lines) {
                if (!line.label)
                    throw ValidationError("page " + page.id + " line " + line.id +
                                          " has no gold label");
                gold.push_back(*line.label);
                pred.push_back(*line.predicted);
            }
            fold_labels.add(label_accuracy(pred, gold));
            TableStructure pred_struct = decode(page, true);
            TableStructure gold_struct = golds ? test_golds[i] : decode(page, false);
            fold_rows.add(row_match(row_line_ids(pred_struct), row_line_ids(gold_struct)));
        }
        result.folds.push_back(build_report(fold_labels, fold_rows));
        pooled_labels.add(fold_labels);
        pooled_rows.add(fold_rows);
    }

    result.pooled = build_report(pooled_labels, pooled_rows);
    for (const auto& f : result.folds) {
        result.mean_accuracy += f.accuracy;
        result.mean_row_f1 += f.row_f1;
    }
    result.mean_accuracy /= double(k);
    result.mean_row_f1 /= double(k);
    return result;
}

std::string crossval_to_json(const CrossvalResult& result) {
    ordered_json j;
    ordered_json folds = ordered_json::array();
    for (const auto& f : result.folds) folds.push_back(report_json(f));
    j["folds"] = folds;
    j["pooled"] = report_json(result.pooled);
    j["mean_accuracy"] = result.mean_accuracy;
    j["mean_row_f1"] = result.mean_row_f1;
    return j.dump(2) + "\n";
}

std::string crossval_to_text(const CrossvalResult& result) {
    std::ostringstream out;
    out << "fold   accuracy   row P      row R      row F1\n";
    char buf[160];
    for (std::size_t i = 0; i < result.folds.size(); ++i) {
        const auto& f = result.folds[i];
        std::snprintf(buf, sizeof(buf), "%4zu   %.4f     %.4f     %.4f     %.4f\n", i, f.accuracy,
                      f.row_precision, f.row_recall, f.row_f1);
        out << buf;
    }
    std::snprintf(buf, sizeof(buf), " avg   %.4f     %.4f     %.4f     %.4f\n",
                  result.mean_accuracy, result.pooled.row_precision, result.pooled.row_recall,
                  result.mean_row_f1);
    out << buf;
    out << "pooled\n" << report_to_text(result.pooled);
    return out.str();
}

}  // namespace tablegraph
