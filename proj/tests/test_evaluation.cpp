#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "endodepth/errors.hpp"
#include "endodepth/evaluation.hpp"

using namespace endo;

TEST_CASE("perfect estimates score zero", "[evaluation]") {
    std::vector<double> gt{1.0, 2.5, 7.0, 40.0};
    MetricsReport r = compute_metrics(gt, gt);
    REQUIRE(r.rel == 0.0);
    REQUIRE(r.log10 == 0.0);
    REQUIRE(r.rms == 0.0);
    REQUIRE(r.n_samples == 4);
    REQUIRE(r.n_clamped == 0);
}

TEST_CASE("metric hand values", "[evaluation]") {
    // rel: |2-1|/2 + |4-2|/4 over 2 samples -> 0.5.
    std::vector<double> gt{2.0, 4.0}, est{1.0, 2.0};
    MetricsReport r = compute_metrics(gt, est);
    REQUIRE(r.rel == Catch::Approx(0.5).margin(1e-15));

    // rms: sqrt(((4-0)^2 + (3-3)^2)/2) = sqrt(8).
    std::vector<double> gt2{4.0, 3.0}, est2{0.0, 3.0};
    MetricsReport r2 = compute_metrics(gt2, est2);
    REQUIRE(r2.rms == Catch::Approx(std::sqrt(8.0)).margin(1e-12));

    // log10: |log10(10) - log10(1)| = 1.
    std::vector<double> gt3{10.0}, est3{1.0};
    MetricsReport r3 = compute_metrics(gt3, est3);
    REQUIRE(r3.log10 == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(r3.n_clamped == 0);
}

TEST_CASE("log term clamps tiny and negative estimates", "[evaluation]") {
    std::vector<double> gt{1.0, 1.0, 1.0};
    std::vector<double> est{0.0, -5.0, 1e-9};
    MetricsReport r = compute_metrics(gt, est);
    REQUIRE(r.n_clamped == 3);
    // Every clamped term contributes |log10(1) - log10(1e-6)| = 6.
    REQUIRE(r.log10 == Catch::Approx(6.0).margin(1e-12));
    // rel and rms still use the raw estimates.
    REQUIRE(r.rel == Catch::Approx((1.0 + 6.0 + (1.0 - 1e-9)) / 3.0).margin(1e-12));
    std::vector<double> est2{1e-6, 0.5, 2.0};
    REQUIRE(compute_metrics(gt, est2).n_clamped == 0);
}

TEST_CASE("pooled metrics weight frames by pixel count", "[evaluation]") {
    // Frame A: one pixel with rel 0.2; frame B: one pixel with rel 0.4;
    // pooled mean 0.3.
    std::vector<double> gt{10.0}, estA{8.0}, estB{6.0};
    REQUIRE(compute_metrics(gt, estA).rel == Catch::Approx(0.2).margin(1e-15));
    REQUIRE(compute_metrics(gt, estB).rel == Catch::Approx(0.4).margin(1e-15));
    std::vector<double> gt2{10.0, 10.0}, est2{8.0, 6.0};
    REQUIRE(compute_metrics(gt2, est2).rel == Catch::Approx(0.3).margin(1e-15));

    // With unequal counts the bigger frame dominates: pixels {8,8,8,6}.
    std::vector<double> gt3{10.0, 10.0, 10.0, 10.0}, est3{8.0, 8.0, 8.0, 6.0};
    REQUIRE(compute_metrics(gt3, est3).rel == Catch::Approx(0.25).margin(1e-15));
}

TEST_CASE("rel is scale invariant and rms scales linearly", "[evaluation]") {
    std::vector<double> gt{3.0, 5.0, 9.0}, est{2.0, 6.0, 7.5};
    MetricsReport base = compute_metrics(gt, est);
    std::vector<double> gt_s = gt, est_s = est;
    for (auto& v : gt_s) v *= 10.0;
    for (auto& v : est_s) v *= 10.0;
    MetricsReport scaled = compute_metrics(gt_s, est_s);
    REQUIRE(scaled.rel == Catch::Approx(base.rel).margin(1e-12));
    REQUIRE(scaled.log10 == Catch::Approx(base.log10).margin(1e-12));
    REQUIRE(scaled.rms == Catch::Approx(10.0 * base.rms).margin(1e-9));
}

TEST_CASE("metric input validation", "[evaluation]") {
    std::vector<double> three(3, 1.0), two(2, 1.0);
    REQUIRE_THROWS_AS(compute_metrics(three, two), ShapeError);
    std::vector<double> empty;
    REQUIRE_THROWS_AS(compute_metrics(empty, empty), ParameterError);
    std::vector<double> bad_gt{1.0, 0.0}, est{1.0, 1.0};
    REQUIRE_THROWS_AS(compute_metrics(bad_gt, est), ParameterError);
    bad_gt = {1.0, -2.0};
    REQUIRE_THROWS_AS(compute_metrics(bad_gt, est), ParameterError);
    bad_gt = {1.0, std::numeric_limits<double>::quiet_NaN()};
    REQUIRE_THROWS_AS(compute_metrics(bad_gt, est), ParameterError);
    std::vector<double> gt{1.0, 2.0};
    std::vector<double> bad_est{1.0, std::numeric_limits<double>::infinity()};
    REQUIRE_THROWS_AS(compute_metrics(gt, bad_est), ParameterError);
}

TEST_CASE("accumulator skips sentinel pixels", "[evaluation]") {
    DepthMap gt(3, 2, -1.0f);
    DepthMap est(3, 2, -1.0f);
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 3; ++x) {
            gt.at(x, y) = 10.0f;
            est.at(x, y) = 8.0f;
        }
    gt.at(2, 1) = gt.sentinel;  // excluded pair
    est.at(2, 1) = 123.0f;

    MetricsAccumulator acc;
    REQUIRE(acc.empty());
    acc.add_pixels(gt, est);
    REQUIRE_FALSE(acc.empty());
    MetricsReport r = acc.finalize();
    REQUIRE(r.n_samples == 5);
    REQUIRE(r.rel == Catch::Approx(0.2).margin(1e-7));

    // A second frame pools by pixel count.
    DepthMap gt2(1, 1, -1.0f), est2(1, 1, -1.0f);
    gt2.at(0, 0) = 10.0f;
    est2.at(0, 0) = 2.0f;
    acc.add_pixels(gt2, est2);
    MetricsReport pooled = acc.finalize();
    REQUIRE(pooled.n_samples == 6);
    REQUIRE(pooled.rel == Catch::Approx((5 * 0.2 + 0.8) / 6.0).margin(1e-7));

    DepthMap small(2, 2, -1.0f);
    REQUIRE_THROWS_AS(acc.add_pixels(gt, small), ShapeError);

    MetricsAccumulator never;
    DepthMap all_invalid(2, 2, -1.0f);  // every pixel stores the sentinel
    never.add_pixels(all_invalid, all_invalid);
    REQUIRE(never.empty());
    REQUIRE_THROWS_AS(never.finalize(), ParameterError);
}

TEST_CASE("metrics table rows are fixed format", "[evaluation]") {
    MetricsReport m;
    m.rel = 0.18432;
    m.log10 = 0.07651;
    m.rms = 1.60949;
    REQUIRE(metrics_table_row("crf", "synthetic", "yes", m) ==
            "crf, synthetic, yes, 0.1843, 0.0765, 1.6095");
    MetricsReport zero;
    REQUIRE(metrics_table_row("unary", "mixed", "no", zero) ==
            "unary, mixed, no, 0.0000, 0.0000, 0.0000");
}
