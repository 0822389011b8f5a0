#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "tablegraph/eval.hpp"
#include "tablegraph/synthgen.hpp"

using namespace tablegraph;

namespace {

using Rows = std::vector<std::vector<std::string>>;

Rows named_rows(const std::vector<int>& sizes, const std::string& prefix = "r") {
    Rows rows;
    for (std::size_t r = 0; r < sizes.size(); ++r) {
        std::vector<std::string> row;
        for (int i = 0; i < sizes[r]; ++i)
            row.push_back(prefix + std::to_string(r) + "-" + std::to_string(i));
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

TEST_CASE("label_accuracy counts agreements cell by cell") {
    using L = BiesoLabel;
    std::vector<L> gold = {L::B, L::I, L::E, L::S};

    LabelTally perfect = label_accuracy(gold, gold);
    CHECK(perfect.total() == 4);
    CHECK(perfect.correct() == 4);
    CHECK(perfect.accuracy() == 1.0);
    CHECK(perfect.confusion[0][0] == 1);
    CHECK(perfect.confusion[0][1] == 0);

    std::vector<L> wrong = {L::O, L::O, L::O, L::O};
    LabelTally zero = label_accuracy(wrong, gold);
    CHECK(zero.accuracy() == 0.0);
    CHECK(zero.confusion[0][4] == 1);  // gold B predicted O

    std::vector<L> mixed = {L::B, L::I, L::E, L::O};
    CHECK(label_accuracy(mixed, gold).accuracy() == doctest::Approx(0.75));

    CHECK_THROWS_AS(label_accuracy({L::B}, gold), ValidationError);
}

TEST_CASE("tally addition pools counts") {
    using L = BiesoLabel;
    LabelTally a = label_accuracy({L::B, L::I}, {L::B, L::B});
    LabelTally b = label_accuracy({L::S}, {L::S});
    a.add(b);
    CHECK(a.total() == 3);
    CHECK(a.correct() == 2);
    CHECK(a.accuracy() == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("row_match on identical rows is perfect") {
    Rows rows = named_rows({3, 2, 4});
    RowMatchCounts counts = row_match(rows, rows);
    CHECK(counts.correct == 3);
    CHECK(counts.missed == 0);
    CHECK(counts.spurious == 0);
    CHECK(counts.precision() == 1.0);
    CHECK(counts.recall() == 1.0);
    CHECK(counts.f1() == 1.0);
}

TEST_CASE("row_match scores partial overlap by Jaccard threshold") {
    Rows gold = {{"a", "b", "c"}};

    SUBCASE("two of three shared lines is Jaccard 2/3") {
        Rows pred = {{"a", "b"}};  // |inter| = 2, |union| = 3
        CHECK(row_match(pred, gold, 0.5).correct == 1);
        CHECK(row_match(pred, gold, 0.67).correct == 0);
        RowMatchCounts miss = row_match(pred, gold, 0.67);
        CHECK(miss.missed == 1);
        CHECK(miss.spurious == 1);
    }

    SUBCASE("disjoint rows never match") {
        Rows pred = {{"x", "y"}};
        RowMatchCounts counts = row_match(pred, gold, 0.01);
        CHECK(counts.correct == 0);
        CHECK(counts.missed == 1);
        CHECK(counts.spurious == 1);
    }

    SUBCASE("empty sides") {
        CHECK(row_match({}, gold).missed == 1);
        CHECK(row_match({}, gold).spurious == 0);
        CHECK(row_match(gold, {}).spurious == 1);
        RowMatchCounts nothing = row_match({}, {});
        CHECK(nothing.precision() == 0.0);
        CHECK(nothing.recall() == 0.0);
        CHECK(nothing.f1() == 0.0);
    }
}

TEST_CASE("row matching is one-to-one") {
    // Two predictions overlap the same gold row; only one may claim it.
    Rows gold = {{"a", "b", "c", "d"}};
    Rows pred = {{"a", "b", "c"}, {"d"}};
    RowMatchCounts counts = row_match(pred, gold, 0.5);
    CHECK(counts.correct == 1);
    CHECK(counts.spurious == 1);
    CHECK(counts.missed == 0);

    // Nine of ten rows shifted by one line still match at 0.5.
    Rows gold10 = named_rows(std::vector<int>(10, 3));
    Rows pred10 = gold10;
    pred10[9][0] = "nonsense";  // Jaccard 2/4 = 0.5 for the last row
    RowMatchCounts shifted = row_match(pred10, gold10, 0.5);
    CHECK(shifted.correct == 10);
    CHECK(row_match(pred10, gold10, 0.51).correct == 9);
}

TEST_CASE("greedy matching prefers higher Jaccard first") {
    // pred0 overlaps gold0 weakly, pred1 overlaps gold0 strongly and gold1
    // weakly. Greedy pairs (pred1, gold0) first, then pred0 can only take
    // gold1 if it clears the threshold.
    Rows gold = {{"a", "b", "c"}, {"x", "y", "z"}};
    Rows pred = {{"a", "x", "y"}, {"a", "b", "c"}};
    RowMatchCounts counts = row_match(pred, gold, 0.4);
    // (pred1, gold0) is exact; pred0 vs gold1 has Jaccard 2/4 = 0.5 >= 0.4.
    CHECK(counts.correct == 2);
}

TEST_CASE("matches never decrease when the threshold drops") {
    Rng rng(95);
    for (int trial = 0; trial < 20; ++trial) {
        const int n_lines = 30;
        std::vector<std::string> lines;
        for (int i = 0; i < n_lines; ++i) lines.push_back("l" + std::to_string(i));

        auto random_rows = [&](int n_rows) {
            Rows rows(n_rows);
            for (const std::string& id : lines)
                rows[rng.below(static_cast<std::uint64_t>(n_rows))].push_back(id);
            Rows out;
            for (auto& row : rows)
                if (!row.empty()) out.push_back(row);
            return out;
        };
        Rows gold = random_rows(2 + static_cast<int>(rng.below(5)));
        Rows pred = random_rows(2 + static_cast<int>(rng.below(5)));

        std::int64_t previous = -1;
        for (double threshold : {0.9, 0.7, 0.5, 0.3, 0.1}) {
            RowMatchCounts counts = row_match(pred, gold, threshold);
            if (previous >= 0) CHECK(counts.correct >= previous);
            previous = counts.correct;
            CHECK(counts.correct + counts.missed == static_cast<std::int64_t>(gold.size()));
            CHECK(counts.correct + counts.spurious == static_cast<std::int64_t>(pred.size()));
        }
    }
}

TEST_CASE("build_report derives per-class metrics from the confusion") {
    using L = BiesoLabel;
    // gold: B B I, predicted: B I I
    LabelTally tally = label_accuracy({L::B, L::I, L::I}, {L::B, L::B, L::I});
    RowMatchCounts rows;
    rows.correct = 3;
    rows.missed = 1;
    rows.spurious = 0;

    EvalReport report = build_report(tally, rows);
    CHECK(report.accuracy == doctest::Approx(2.0 / 3.0));
    CHECK(report.precision[0] == 1.0);                      // 1 of 1 predicted B
    CHECK(report.recall[0] == doctest::Approx(0.5));        // 1 of 2 gold B
    CHECK(report.f1[0] == doctest::Approx(2.0 / 3.0));
    CHECK(report.precision[1] == doctest::Approx(0.5));     // 1 of 2 predicted I
    CHECK(report.recall[1] == 1.0);
    CHECK(report.precision[2] == 0.0);                      // no E anywhere
    CHECK(report.row_precision == 1.0);
    CHECK(report.row_recall == doctest::Approx(0.75));
    CHECK(report.row_f1 == doctest::Approx(2 * 0.75 / 1.75));

    const std::string json = report_to_json(report);
    CHECK(json.find("\"accuracy\"") != std::string::npos);
    const std::string text = report_to_text(report);
    CHECK(text.find("accuracy") != std::string::npos);
}

TEST_CASE("evaluate_pages reads predictions off the pages") {
    SynthDataset data = generate_dataset(easy_preset(), 3, 7);
    std::vector<Page> pages = data.dataset.pages;

    SUBCASE("perfect predictions give perfect scores") {
        for (Page& page : pages)
            for (TextLine& line : page.lines) line.predicted = line.label;
        EvalReport report = evaluate_pages(pages, &data.golds);
        CHECK(report.accuracy == 1.0);
        CHECK(report.row_f1 == 1.0);

        // Without sidecar structures the gold decode serves as reference.
        EvalReport derived = evaluate_pages(pages);
        CHECK(derived.accuracy == 1.0);
        CHECK(derived.row_f1 == 1.0);
    }

    SUBCASE("all-O predictions destroy the row metrics") {
        for (Page& page : pages)
            for (TextLine& line : page.lines) line.predicted = BiesoLabel::O;
        EvalReport report = evaluate_pages(pages, &data.golds);
        CHECK(report.accuracy < 0.3);
        CHECK(report.rows.correct == 0);
        CHECK(report.row_recall == 0.0);
    }

    SUBCASE("missing predictions are an error") {
        pages[0].lines[0].predicted.reset();
        for (TextLine& line : pages[1].lines) line.predicted = line.label;
        CHECK_THROWS_AS(evaluate_pages(pages, &data.golds), Error);
    }
}

TEST_CASE("crossval with manifest folds holds each fold out once") {
    SynthDataset data = generate_dataset(easy_preset(), 8, 31);

    LearnerSpec spec;
    spec.kind = LearnerKind::LogitStandard;
    spec.logit.iterations = 0;  // zero model: predicts uniform, ties -> B

    CrossvalResult result = crossval(data.dataset, spec, 4, 0, &data.golds);
    REQUIRE(result.folds.size() == 4);

    // The zero logit predicts B everywhere, so each fold's accuracy is its
    // gold B frequency; the pooled accuracy is the overall B frequency.
    std::int64_t b_count = 0, total = 0;
    for (const Page& page : data.dataset.pages)
        for (const TextLine& line : page.lines) {
            ++total;
            b_count += *line.label == BiesoLabel::B;
        }
    CHECK(result.pooled.accuracy ==
          doctest::Approx(static_cast<double>(b_count) / total).epsilon(1e-12));

    double mean = 0;
    for (const EvalReport& fold : result.folds) mean += fold.accuracy;
    mean /= 4;
    CHECK(result.mean_accuracy == doctest::Approx(mean).epsilon(1e-12));

    std::int64_t pooled_total = 0;
    for (const auto& row : result.pooled.confusion)
        for (std::int64_t v : row) pooled_total += v;
    CHECK(pooled_total == total);

    const std::string text = crossval_to_text(result);
    CHECK(text.find("fold") != std::string::npos);
    CHECK(crossval_to_json(result).find("\"pooled\"") != std::string::npos);
}

TEST_CASE("crossval falls back to a seeded partition") {
    SynthDataset data = generate_dataset(easy_preset(), 6, 32);
    data.dataset.folds.clear();  // no manifest assignment

    LearnerSpec spec;
    spec.kind = LearnerKind::LogitStandard;
    spec.logit.iterations = 0;

    CrossvalResult a = crossval(data.dataset, spec, 3, 11, &data.golds);
    CrossvalResult b = crossval(data.dataset, spec, 3, 11, &data.golds);
    REQUIRE(a.folds.size() == 3);
    for (int f = 0; f < 3; ++f)
        CHECK(a.folds[f].accuracy == b.folds[f].accuracy);

    CHECK_THROWS_AS(crossval(data.dataset, spec, 1, 0, &data.golds), Error);
    CHECK_THROWS_AS(crossval(data.dataset, spec, 7, 0, &data.golds), Error);
}

TEST_CASE("leave-one-out crossval runs with k equal to the page count") {
    SynthDataset data = generate_dataset(easy_preset(), 5, 33);
    data.dataset.folds.clear();

    LearnerSpec spec;
    spec.kind = LearnerKind::LogitStandard;
    spec.logit.iterations = 0;

    CrossvalResult result = crossval(data.dataset, spec, 5, 2, &data.golds);
    CHECK(result.folds.size() == 5);
    std::int64_t held_out = 0;
    for (const EvalReport& fold : result.folds) {
        std::int64_t fold_total = 0;
        for (const auto& row : fold.confusion)
            for (std::int64_t v : row) fold_total += v;
        CHECK(fold_total > 0);  // every fold evaluated something
        held_out += fold_total;
    }
    std::int64_t total = 0;
    for (const Page& page : data.dataset.pages) total += page.lines.size();
    CHECK(held_out == total);
}
