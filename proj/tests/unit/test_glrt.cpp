#include <gtest/gtest.h>

#include <cmath>

#include "errexp/errors.hpp"
#include "errexp/glrt.hpp"
#include "helpers.hpp"

using namespace errexp;

namespace {
const Dist kP0{0.9, 0.1};
const Dist kP1{0.2, 0.8};
}  // namespace

TEST(GlrtE1, AgreesWithGridReferee) {
    const Dist h0{0.5, 0.3, 0.2}, p1{0.15, 0.25, 0.6};
    const double g = 0.08;
    const GlrtSide s = glrt_e1(h0, p1, g);
    EXPECT_NEAR(kl(s.achiever, h0), g, 1e-9);
    const GridResult ref = grid_oracle([&](const Vec& q) { return kl(q, p1); },
                                       [&](const Vec& q) { return kl(q, h0) <= g; }, 3, 1.0 / 400, Mode::Min);
    EXPECT_NEAR(s.e, ref.value, 2e-3);
    EXPECT_LE(s.e, ref.value + 1e-12);
}

TEST(GlrtE1, ZeroBranchWhenAlternativeIsInside) {
    const GlrtSide s = glrt_e1(kP0, Dist{0.88, 0.12}, 0.1);
    EXPECT_EQ(s.branch, Branch::Zero);
    EXPECT_EQ(s.e, 0.0);
}

TEST(GlrtE0, MatchedNullGivesTheThreshold) {
    for (double g : {0.01, 0.1, 0.5}) EXPECT_NEAR(glrt_e0(kP0, kP0, g).e, g, 1e-9);
}

TEST(GlrtE0, MismatchedAgreesWithGridAndSphere) {
    std::mt19937_64 rng(23);
    for (int t = 0; t < 8; ++t) {
        const Dist p0 = testutil::random_dist(rng, 3, 0.08), h0 = testutil::random_dist(rng, 3, 0.08);
        const double g = kl(p0, h0) + testutil::uniform(rng, 0.02, 0.3);
        const GlrtSide s = glrt_e0(p0, h0, g);
        if (s.branch != Branch::Interior) continue;
        const GridResult ref = grid_oracle([&](const Vec& q) { return kl(q, p0); },
                                           [&](const Vec& q) { return kl(q, h0) >= g; }, 3, 1.0 / 400, Mode::Min);
        EXPECT_NEAR(s.e, ref.value, 3e-3);
        EXPECT_LE(s.e, ref.value + 1e-12);
        const SphereResult sp = extremize_on_kl_sphere([&](const Vec& q) { return kl(q, p0); }, h0, g, Mode::Min);
        EXPECT_NEAR(s.e, sp.value, 1e-6);
    }
}

TEST(GlrtE0, BranchesAtTheEdges) {
    EXPECT_EQ(glrt_e0(kP1, kP0, 0.5).branch, Branch::Zero);
    EXPECT_EQ(glrt_e0(kP0, Dist{0.85, 0.15}, 5.0).branch, Branch::Infinite);
}

TEST(GlrtE0, NeverExceedsTheUpperBound) {
    std::mt19937_64 rng(29);
    for (int t = 0; t < 200; ++t) {
        const std::size_t k = 2 + t % 3;
        const Dist p0 = testutil::random_dist(rng, k, 0.05), h0 = testutil::random_dist(rng, k, 0.05);
        const double g = testutil::uniform(rng, 0.01, 0.99) * (-std::log(h0.max()));
        EXPECT_LE(glrt_e0(p0, h0, g).e, glrt_e0_upper(p0, h0, g) + 1e-10);
    }
}

TEST(GlrtE0, UpperBoundFailsOnceTheSphereLosesAVertexDirection) {
    const Dist p0{0.1281, 0.8719}, h0{0.3159, 0.6841};
    const double g = 0.6563;  // above -log max h0 = 0.3797
    EXPECT_GT(glrt_e0(p0, h0, g).e, glrt_e0_upper(p0, h0, g) + 0.5);
}

TEST(SmallGamma, QuadraticModelTracksExact) {
    const Dist p0{0.52, 0.3, 0.18}, h0{0.5, 0.3, 0.2};
    for (double g : {0.005, 0.01, 0.02}) {
        const QcqpReport q = glrt_e0_small_gamma(p0, h0, g);
        EXPECT_TRUE(q.in_window);
        const double exact = glrt_e0(p0, h0, g).e;
        EXPECT_NEAR(q.value, exact, 0.15 * exact) << "gamma=" << g;
    }
}

TEST(SmallGamma, InactiveWhenNullIsFarEnough) {
    const QcqpReport q = glrt_e0_small_gamma(kP1, kP0, 0.01);
    EXPECT_TRUE(q.inactive);
    EXPECT_EQ(q.value, 0.0);
}

TEST(HoeffdingSensitivity, LocalModelMatchesWorstCase) {
    const double g = 0.2, r = 1e-6;
    const SensitivityReport s = glrt_sensitivity(kP0, g, 1.0);
    const WorstCaseReport w = glrt_worst_case_e0(kP0, g, Ball(kP0, DivergenceSpec::kl(), r));
    EXPECT_NEAR((g - w.value) / std::sqrt(r), std::sqrt(s.theta), 0.02 * std::sqrt(s.theta));
}

TEST(HoeffdingSensitivity, WorstCaseE0AgreesWithGrid) {
    const double g = 0.2;
    const Ball ball(kP0, DivergenceSpec::kl(), 1e-3);
    const WorstCaseReport w = glrt_worst_case_e0(kP0, g, ball);
    const GridResult ref = grid_oracle([&](const Vec& p) { return glrt_e0(Dist::model(p), kP0, g).e; },
                                       [&](const Vec& p) { return ball.contains(p); }, 2, 1e-6, Mode::Min);
    EXPECT_NEAR(w.value, ref.value, 1e-4);
}

TEST(HoeffdingSensitivity, WorstCaseE1AgreesWithGrid) {
    const double g = 0.2;
    const Ball ball(kP1, DivergenceSpec::kl(), 1e-3);
    const WorstCaseReport w = glrt_worst_case_e1(kP0, g, ball);
    const GridResult ref = grid_oracle([&](const Vec& p) { return glrt_e1(kP0, Dist::model(p), g).e; },
                                       [&](const Vec& p) { return ball.contains(p); }, 2, 1e-6, Mode::Min);
    EXPECT_NEAR(w.value, ref.value, 1e-4);
}

TEST(RatioBounds, DeductionRatioStaysInsideBounds) {
    std::mt19937_64 rng(31);
    int checked = 0;
    for (int t = 0; t < 300; ++t) {
        const Dist a = testutil::random_dist(rng, 2, 0.01), b = testutil::random_dist(rng, 2, 0.01);
        if (std::abs(a[1] - b[1]) < 0.02) continue;
        const double g = testutil::uniform(rng, 0.001, 0.999) * kl(b, a);
        if (g > -std::log(a.min())) continue;
        const double gl = lrt_threshold_for_type1(a, b, g);
        const double tl = lrt_sensitivity(a, b, gl, 1.0, 0).theta;
        const double th = glrt_sensitivity(a, g, 1.0).theta;
        const RatioBounds rb = glrt_sensitivity_ratio_bounds(a, g);
        const double ratio = std::sqrt(th / tl);
        EXPECT_GE(ratio, rb.lower - 1e-9);
        EXPECT_LE(ratio, rb.upper_tight + 1e-9);
        EXPECT_LE(rb.upper_tight, rb.upper_weak + 1e-12);
        ++checked;
    }
    EXPECT_GT(checked, 200);
}

TEST(RatioBounds, SeriesBranchIsContinuous) {
    const Dist a{0.3, 0.7};
    // h - 1 = gamma / min, so these two thresholds straddle the switch to the series at 1e-4.
    const double near = glrt_sensitivity_ratio_bounds(a, 2.99e-5).upper_tight;
    const double far = glrt_sensitivity_ratio_bounds(a, 3.01e-5).upper_tight;
    EXPECT_NEAR(near, far, 1e-5);
    EXPECT_NEAR(near, std::sqrt(2.0), 1e-3);
}

TEST(KlToBall, MixtureFormulaAgreesWithFrankWolfe) {
    const Dist c{0.5, 0.3, 0.2};
    const Vec q{0.2, 0.2, 0.6};
    const double a = kl_to_ball(q, Ball(c, DivergenceSpec::kl(), 0.05));
    const GridResult g = grid_oracle([&](const Vec& p) { return kl(q, p); },
                                     [&](const Vec& p) { return kl(c, p) <= 0.05; }, 3, 1.0 / 400, Mode::Min);
    EXPECT_NEAR(a, g.value, 2e-3);
    EXPECT_LE(a, g.value + 1e-12);
}
