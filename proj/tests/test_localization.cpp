#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "recompress/block_codec.hpp"
#include "recompress/corpus_sim.hpp"
#include "recompress/errors.hpp"
#include "recompress/localization.hpp"
#include "recompress/rng.hpp"

using namespace recompress;

namespace {

Heatmap make_heatmap(int rows, int cols, double fill) {
    Heatmap h;
    h.values = RealGrid(rows, cols, fill);
    return h;
}

RecompressionTrace synthetic_trace(const IntGrid& start, const std::vector<IntGrid>& steps,
                                   int qf = 75) {
    RecompressionTrace trace;
    trace.q = quality_to_qmatrix(qf);
    trace.k = static_cast<int>(steps.size());
    trace.planes.push_back(CoefficientPlane{start, trace.q});
    for (const auto& grid : steps) trace.planes.push_back(CoefficientPlane{grid, trace.q});
    return trace;
}

} // namespace

TEST_CASE("instability_heatmap of a stable trace is zero") {
    IntGrid flat(16, 16, 3);
    const auto trace = synthetic_trace(flat, {flat, flat});
    const Heatmap h = instability_heatmap(trace);
    CHECK(h.values.rows() == 16);
    CHECK(h.values.cols() == 16);
    for (double v : h.values.data()) CHECK(v == 0.0);
    CHECK(image_level_score(h) == 0.0);
}

TEST_CASE("one unstable block saturates to one") {
    IntGrid a(16, 16, 0);
    IntGrid b = a, c = a;
    b.at(2, 2) = 1; // block (0,0) changes at step 1
    c = b;
    c.at(5, 5) = 7; // and again at step 2
    const auto trace = synthetic_trace(a, {b, c});
    const Heatmap h = instability_heatmap(trace);
    for (int r = 0; r < 16; ++r)
        for (int col = 0; col < 16; ++col) {
            const bool hot = r < 8 && col < 8;
            CHECK(h.values.at(r, col) == (hot ? 1.0 : 0.0));
        }
}

TEST_CASE("instability_heatmap ignores block ordering") {
    Rng rng(31);
    IntGrid start(24, 24, 0);
    IntGrid next = start;
    for (int i = 0; i < 30; ++i)
        next.at(static_cast<int>(rng.uniform_int(0, 23)), static_cast<int>(rng.uniform_int(0, 23))) += 1;
    const Heatmap h = instability_heatmap(synthetic_trace(start, {next}));

    // permute blocks identically in both planes; heatmap permutes along
    IntGrid start_p(24, 24, 0), next_p(24, 24, 0);
    const int perm[9] = {4, 2, 0, 8, 6, 1, 3, 7, 5};
    for (int b = 0; b < 9; ++b) {
        const int sr = (b / 3) * 8, sc = (b % 3) * 8;
        const int dr = (perm[b] / 3) * 8, dc = (perm[b] % 3) * 8;
        for (int r = 0; r < 8; ++r)
            for (int c = 0; c < 8; ++c) {
                start_p.at(dr + r, dc + c) = start.at(sr + r, sc + c);
                next_p.at(dr + r, dc + c) = next.at(sr + r, sc + c);
            }
    }
    const Heatmap hp = instability_heatmap(synthetic_trace(start_p, {next_p}));
    for (int b = 0; b < 9; ++b) {
        const int sr = (b / 3) * 8, sc = (b % 3) * 8;
        const int dr = (perm[b] / 3) * 8, dc = (perm[b] % 3) * 8;
        CHECK(h.values.at(sr, sc) == hp.values.at(dr, dc));
    }
}

TEST_CASE("adaptive_aggregate follows the soft-selection formula") {
    SUBCASE("main weight one returns the main map") {
        Heatmap a = make_heatmap(4, 4, 0.25);
        a.values.at(0, 0) = 1.0;
        const Heatmap b = make_heatmap(4, 4, 0.9);
        const Heatmap out = adaptive_aggregate(a, b);
        CHECK(out.values.at(1, 1) == doctest::Approx(0.25));
        CHECK(out.values.at(0, 0) == doctest::Approx(1.0));
    }
    SUBCASE("worked example: 0.6 max, 0.5/0.3 pixel") {
        Heatmap a = make_heatmap(2, 2, 0.5);
        a.values.at(0, 0) = 0.6;
        Heatmap b = make_heatmap(2, 2, 0.3);
        const Heatmap out = adaptive_aggregate(a, b);
        CHECK(out.values.at(1, 1) == doctest::Approx(0.6 * 0.5 + 0.4 * 0.3)); // 0.42
    }
    SUBCASE("equal maps are a fixed point") {
        Rng rng(32);
        Heatmap a = make_heatmap(8, 8, 0.0);
        for (double& v : a.values.data()) v = rng.uniform01();
        const Heatmap out = adaptive_aggregate(a, a);
        for (std::size_t i = 0; i < out.values.size(); ++i)
            CHECK(out.values.data()[i] == doctest::Approx(a.values.data()[i]));
    }
    SUBCASE("shape mismatch throws") {
        CHECK_THROWS_AS(adaptive_aggregate(make_heatmap(2, 2, 0.0), make_heatmap(4, 4, 0.0)),
                        ShapeMismatch);
    }
}

TEST_CASE("aggregate output is a pointwise convex combination") {
    Rng rng(33);
    for (int trial = 0; trial < 200; ++trial) {
        Heatmap a = make_heatmap(6, 6, 0.0);
        Heatmap b = make_heatmap(6, 6, 0.0);
        for (double& v : a.values.data()) v = rng.uniform01();
        for (double& v : b.values.data()) v = rng.uniform01();
        const Heatmap out = adaptive_aggregate(a, b);
        for (std::size_t i = 0; i < out.values.size(); ++i) {
            const double lo = std::min(a.values.data()[i], b.values.data()[i]);
            const double hi = std::max(a.values.data()[i], b.values.data()[i]);
            CHECK(out.values.data()[i] >= lo - 1e-12);
            CHECK(out.values.data()[i] <= hi + 1e-12);
        }
    }
}

TEST_CASE("aggregation is argument-order independent when maxima differ") {
    Rng rng(34);
    for (int trial = 0; trial < 50; ++trial) {
        Heatmap a = make_heatmap(5, 5, 0.0);
        Heatmap b = make_heatmap(5, 5, 0.0);
        for (double& v : a.values.data()) v = rng.uniform(0.0, 0.9);
        for (double& v : b.values.data()) v = rng.uniform(0.0, 0.9);
        if (image_level_score(a) == image_level_score(b)) continue;
        const Heatmap ab = adaptive_aggregate(a, b);
        const Heatmap ba = adaptive_aggregate(b, a);
        for (std::size_t i = 0; i < ab.values.size(); ++i)
            CHECK(ab.values.data()[i] == ba.values.data()[i]);
    }
}

TEST_CASE("binarize thresholds and stays monotone") {
    Heatmap h = make_heatmap(1, 2, 0.0);
    h.values.at(0, 0) = 0.2;
    h.values.at(0, 1) = 0.7;
    const BinaryMask at_half = binarize(h, 0.5);
    CHECK(at_half.pixels.at(0, 0) == 0);
    CHECK(at_half.pixels.at(0, 1) == 1);

    const BinaryMask all = binarize(h, 0.0);
    CHECK(all.pixels.at(0, 0) == 1);
    CHECK(all.pixels.at(0, 1) == 1);

    const BinaryMask none = binarize(h, 0.71);
    CHECK(none.pixels.at(0, 0) == 0);
    CHECK(none.pixels.at(0, 1) == 0);

    Rng rng(35);
    Heatmap random = make_heatmap(8, 8, 0.0);
    for (double& v : random.values.data()) v = rng.uniform01();
    double prev_count = 65;
    for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        const BinaryMask mask = binarize(random, t);
        double count = 0;
        for (auto v : mask.pixels.data()) count += v;
        CHECK(count <= prev_count);
        prev_count = count;
    }
}

TEST_CASE("image_level_score is the global max") {
    Heatmap zero = make_heatmap(4, 4, 0.0);
    CHECK(image_level_score(zero) == 0.0);
    zero.values.at(3, 2) = 0.9;
    CHECK(image_level_score(zero) == 0.9);
    const Heatmap agg = adaptive_aggregate(zero, zero);
    CHECK(image_level_score(agg) == doctest::Approx(0.9));
}

TEST_CASE("spliced simulation lights up inside the ground truth") {
    ForgerySpec spec;
    spec.width = 128;
    spec.height = 128;
    spec.qf = 80;
    spec.seed = 77;
    spec.texture = TextureKind::Gradient;
    spec.splice_rect = {40, 56, 24, 24};
    const LabeledSample sample = simulate_spliced_double(spec);
    const RecompressionTrace trace = recompression_trace(sample.coeffs, 7);
    const Heatmap h = instability_heatmap(trace);
    double inside = 0, outside = 0;
    long n_in = 0, n_out = 0;
    for (int r = 0; r < 128; ++r)
        for (int c = 0; c < 128; ++c) {
            if (sample.gt_mask.pixels.at(r, c)) {
                inside += h.values.at(r, c);
                ++n_in;
            } else {
                outside += h.values.at(r, c);
                ++n_out;
            }
        }
    CHECK(inside / n_in > outside / n_out);
}
