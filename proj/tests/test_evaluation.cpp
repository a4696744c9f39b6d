#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "oracles.hpp"
#include "recompress/errors.hpp"
#include "recompress/evaluation.hpp"
#include "recompress/rng.hpp"

using namespace recompress;

namespace {

Heatmap heatmap_of(std::initializer_list<double> values, int rows, int cols) {
    Heatmap h;
    h.values = RealGrid(rows, cols);
    std::copy(values.begin(), values.end(), h.values.data().begin());
    return h;
}

BinaryMask mask_of(std::initializer_list<int> values, int rows, int cols) {
    BinaryMask m;
    m.pixels = ByteGrid(rows, cols);
    std::copy(values.begin(), values.end(), m.pixels.data().begin());
    return m;
}

} // namespace

TEST_CASE("pixel_f1 on the worked examples") {
    // perfect prediction
    const Heatmap h = heatmap_of({1.0, 0.0, 1.0, 0.0}, 2, 2);
    const BinaryMask gt = mask_of({1, 0, 1, 0}, 2, 2);
    CHECK(pixel_f1(h, gt, 0.5) == 1.0);

    // complement prediction
    const BinaryMask inv = mask_of({0, 1, 0, 1}, 2, 2);
    CHECK(pixel_f1(h, inv, 0.5) == 0.0);

    // TP=2 FP=1 FN=1 -> 2*2 / (2*2+1+1)
    const Heatmap h2 = heatmap_of({1.0, 1.0, 1.0, 0.0}, 2, 2);
    const BinaryMask gt2 = mask_of({1, 1, 0, 1}, 2, 2);
    CHECK(pixel_f1(h2, gt2, 0.5) == doctest::Approx(2.0 * 2 / (2.0 * 2 + 1 + 1)));

    BinaryMask small;
    small.pixels = ByteGrid(1, 1);
    CHECK_THROWS_AS(pixel_f1(h, small, 0.5), ShapeMismatch);
}

TEST_CASE("best_threshold_f1 on the worked examples") {
    SUBCASE("binary heatmap equal to gt reaches 1.0") {
        const Heatmap h = heatmap_of({1.0, 0.0, 0.0, 1.0}, 2, 2);
        const BinaryMask gt = mask_of({1, 0, 0, 1}, 2, 2);
        const auto [f1, thr] = best_threshold_f1(h, gt);
        CHECK(f1 == 1.0);
        CHECK(thr > 0.0);
        CHECK(thr <= 1.0);
    }
    SUBCASE("constant 0.5 heatmap with half-positive gt") {
        Heatmap h;
        h.values = RealGrid(2, 2, 0.5);
        const BinaryMask gt = mask_of({1, 1, 0, 0}, 2, 2);
        const auto [f1, thr] = best_threshold_f1(h, gt);
        // only outcomes are "everything" and "nothing"; p = 0.5
        CHECK(f1 == doctest::Approx(2 * 0.5 / (0.5 + 1)));
        (void)thr;
    }
    SUBCASE("random 4x4 instances match the exhaustive sweep") {
        Rng rng(61);
        for (int trial = 0; trial < 100; ++trial) {
            Heatmap h;
            h.values = RealGrid(4, 4);
            // few distinct levels so ties actually happen
            for (double& v : h.values.data())
                v = static_cast<double>(rng.uniform_int(0, 4)) / 4.0;
            BinaryMask gt;
            gt.pixels = ByteGrid(4, 4);
            for (auto& v : gt.pixels.data()) v = rng.uniform01() < 0.4 ? 1 : 0;
            const auto [f1, thr] = best_threshold_f1(h, gt);
            const auto [bf1, bthr] = oracles::brute_best_f1(h, gt);
            CHECK(f1 == bf1);
            CHECK(thr == bthr);
        }
    }
}

TEST_CASE("f1_best dominates any fixed threshold") {
    Rng rng(62);
    for (int trial = 0; trial < 100; ++trial) {
        Heatmap h;
        h.values = RealGrid(5, 5);
        for (double& v : h.values.data()) v = rng.uniform01();
        BinaryMask gt;
        gt.pixels = ByteGrid(5, 5);
        for (auto& v : gt.pixels.data()) v = rng.uniform01() < 0.5 ? 1 : 0;
        const auto [best, thr] = best_threshold_f1(h, gt);
        (void)thr;
        for (double t : {0.0, 0.1, 0.5, 0.9, 1.0})
            CHECK(best >= pixel_f1(h, gt, t));
    }
}

TEST_CASE("roc_auc on the worked examples") {
    CHECK(roc_auc({0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1}) == 1.0);
    CHECK(roc_auc({0.5, 0.5, 0.5, 0.5}, {0, 1, 0, 1}) == 0.5);
    CHECK(roc_auc({0.1, 0.4, 0.35, 0.8}, {0, 0, 1, 1}) == doctest::Approx(0.75));
    CHECK_THROWS_AS(roc_auc({0.1, 0.2}, {1, 1}), DegenerateLabels);
    CHECK_THROWS_AS(roc_auc({0.1}, {0}), DegenerateLabels);
}

TEST_CASE("roc_auc matches the pairwise oracle and monotone invariance") {
    Rng rng(63);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = static_cast<int>(rng.uniform_int(4, 40));
        std::vector<double> scores(static_cast<std::size_t>(n));
        std::vector<int> labels(static_cast<std::size_t>(n));
        bool has_pos = false, has_neg = false;
        for (int i = 0; i < n; ++i) {
            scores[static_cast<std::size_t>(i)] = static_cast<double>(rng.uniform_int(0, 10)) / 10.0;
            labels[static_cast<std::size_t>(i)] = rng.uniform01() < 0.5;
            (labels[static_cast<std::size_t>(i)] ? has_pos : has_neg) = true;
        }
        if (!has_pos || !has_neg) continue;
        const double ours = roc_auc(scores, labels);
        CHECK(ours == doctest::Approx(oracles::brute_auc(scores, labels)).epsilon(1e-12));

        // strictly monotone transform leaves AUC unchanged
        std::vector<double> warped(scores.size());
        for (std::size_t i = 0; i < scores.size(); ++i)
            warped[i] = std::exp(3.0 * scores[i]) + 0.1 * scores[i];
        CHECK(roc_auc(warped, labels) == doctest::Approx(ours).epsilon(1e-12));
    }
}

TEST_CASE("image_accuracy counts threshold agreements") {
    CHECK(image_accuracy({0.9, 0.8, 0.1, 0.2}, {1, 1, 0, 0}) == 1.0);
    CHECK(image_accuracy({0.1, 0.2, 0.9, 0.8}, {1, 1, 0, 0}) == 0.0);
    CHECK(image_accuracy({0.9, 0.8, 0.7, 0.2}, {1, 1, 0, 0}) == doctest::Approx(0.75));
    CHECK_THROWS_AS(image_accuracy({0.9}, {1, 0}), LengthMismatch);
}

TEST_CASE("summarize aggregates per-image rows deterministically") {
    std::vector<PerImageResult> rows;
    PerImageResult a;
    a.id = "b_tampered";
    a.label = "double";
    a.f1_fixed = 0.4;
    a.f1_best = 0.6;
    a.best_threshold = 0.3;
    a.score = 0.9;
    PerImageResult b;
    b.id = "a_authentic";
    b.label = "single";
    b.score = 0.2;
    rows = {a, b};
    const EvalReport report = summarize(rows);
    CHECK(report.n_images == 2);
    CHECK(report.per_image.front().id == "a_authentic"); // sorted by id
    CHECK(report.f1_fixed == doctest::Approx(0.4));      // tampered rows only
    CHECK(report.f1_best == doctest::Approx(0.6));
    CHECK(report.auc == 1.0); // tampered scored above authentic
    CHECK(report.accuracy == doctest::Approx(1.0));

    // permutation invariance
    std::vector<PerImageResult> swapped = {b, a};
    const EvalReport report2 = summarize(swapped);
    CHECK(report2.auc == report.auc);
    CHECK(report2.f1_fixed == report.f1_fixed);

    const std::string json = eval_report_to_json(report);
    CHECK(json.find("\"auc\"") != std::string::npos);
    CHECK(json.find("a_authentic") != std::string::npos);
}
