#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tablegraph/docmodel.hpp"
#include "tablegraph/pipeline.hpp"
#include "tablegraph/rowdecode.hpp"

namespace tablegraph {

/// BIESO confusion counts, gold labels on rows, predictions on columns.
struct LabelTally {
    std::array<std::array<std::int64_t, kNumLabels>, kNumLabels> confusion{};

    std::int64_t total() const;
    std::int64_t correct() const;
    double accuracy() const;
    void add(const LabelTally& other);
};

/// Exact per-line comparison; throws on length mismatch or missing labels.
LabelTally label_accuracy(const std::vector<BiesoLabel>& predicted,
                          const std::vector<BiesoLabel>& gold);

/// Shahab-style detection counts for rows given as line-id sets.
struct RowMatchCounts {
    std::int64_t correct = 0;
    std::int64_t missed = 0;
    std::int64_t spurious = 0;

    double precision() const;
    double recall() const;
    double f1() const;
    void add(const RowMatchCounts& other);
};

/// Greedy one-to-one matching in descending Jaccard overlap of line-id sets,
/// ties by (gold index, pred index); a pair matches iff overlap >= threshold.
RowMatchCounts row_match(const std::vector<std::vector<std::string>>& pred_rows,
                         const std::vector<std::vector<std::string>>& gold_rows,
                         double threshold = 0.50);

struct EvalReport {
    double accuracy = 0;
    std::array<std::array<std::int64_t, kNumLabels>, kNumLabels> confusion{};
    std::array<double, kNumLabels> precision{}, recall{}, f1{};
    RowMatchCounts rows;
    double row_precision = 0, row_recall = 0, row_f1 = 0;
};

EvalReport build_report(const LabelTally& labels, const RowMatchCounts& rows);

/// Compares line.predicted against line.label on every page and decoded rows
/// against gold rows (the sidecar structures when given, otherwise
/// decode(gold labels)).
EvalReport evaluate_pages(const std::vector<Page>& pages,
                          const std::vector<TableStructure>* golds = nullptr,
                          double row_threshold = 0.50);

std::string report_to_json(const EvalReport& report);
std::string report_to_text(const EvalReport& report);

struct CrossvalResult {
    std::vector<EvalReport> folds;
    EvalReport pooled;       // summed counts over folds, metrics recomputed
    double mean_accuracy = 0;  // arithmetic mean of fold accuracies
    double mean_row_f1 = 0;
};

/// k-fold cross validation. Uses the manifest fold assignment when it has
/// exactly k folds, otherwise a seeded page partition. Trains the learner on
/// the other folds and evaluates on the held-out one.
CrossvalResult crossval(const Dataset& dataset, const LearnerSpec& spec, int k = 4,
                        std::uint64_t seed = 0,
                        const std::vector<TableStructure>* golds = nullptr);

std::string crossval_to_json(const CrossvalResult& result);
std::string crossval_to_text(const CrossvalResult& result);

}  // namespace tablegraph
