#include <gtest/gtest.h>

#include <cmath>

#include "errexp/errors.hpp"
#include "errexp/philox.hpp"
#include "errexp/sprt.hpp"
#include "helpers.hpp"

using namespace errexp;

namespace {
const Dist kP0{0.9, 0.1};
const Dist kP1{0.2, 0.8};
}  // namespace

TEST(Philox, KnownAnswerVectors) {
    using B = Philox4x32::Block;
    EXPECT_EQ(Philox4x32::generate({0, 0, 0, 0}, {0, 0}), (B{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
    EXPECT_EQ(Philox4x32::generate({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
              (B{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
    EXPECT_EQ(Philox4x32::generate({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
              (B{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Philox, StreamsAreReplayableAndUniform) {
    TrialStream a(42, 7), b(42, 7), c(42, 8);
    double sum = 0.0;
    bool differs = false;
    for (int i = 0; i < 20000; ++i) {
        const double x = a.uniform();
        EXPECT_EQ(x, b.uniform());
        differs |= x != c.uniform();
        ASSERT_GE(x, 0.0);
        ASSERT_LT(x, 1.0);
        sum += x;
    }
    EXPECT_TRUE(differs);
    EXPECT_NEAR(sum / 20000, 0.5, 0.01);
}

TEST(Exponents, MatchedPairGivesTheDivergences) {
    const SprtAnalysis a = sprt_exponents(kP0, kP1, kP0, kP1);
    EXPECT_NEAR(a.e0, kl(kP1, kP0), 1e-14);
    EXPECT_NEAR(a.e1, kl(kP0, kP1), 1e-14);
    EXPECT_NEAR(a.e0 * a.e1, 1.36273775 * 1.14572550, 1e-7);
    const SprtAnalysis b = sprt_exponents_practical(kP0, kP1, kP0, kP1);
    EXPECT_DOUBLE_EQ(b.eta, 1.0);
    EXPECT_NEAR(b.e0, a.e0, 1e-14);
}

TEST(Exponents, ProductIsInvariantUnderMismatch) {
    std::mt19937_64 rng(37);
    int checked = 0;
    for (int t = 0; t < 300; ++t) {
        const std::size_t k = 2 + t % 3;
        const Dist p0 = testutil::random_dist(rng, k), p1 = testutil::random_dist(rng, k);
        const Dist h0 = testutil::random_dist(rng, k), h1 = testutil::random_dist(rng, k);
        try {
            const SprtAnalysis a = sprt_exponents(p0, p1, h0, h1);
            EXPECT_NEAR(a.e0 * a.e1, kl(p0, p1) * kl(p1, p0), 1e-10 * std::max(1.0, a.e0 * a.e1));
            EXPECT_DOUBLE_EQ(a.expected_tau0, 1.0);
            ++checked;
        } catch (const DriftSignError& e) {
            EXPECT_LE(e.drift(), 0.0);
        }
    }
    EXPECT_GT(checked, 50);
}

TEST(Exponents, NegativeDriftIsReported) {
    try {
        (void)sprt_exponents(Dist{0.5, 0.5}, kP1, kP0, kP1);
        FAIL() << "expected a drift error";
    } catch (const DriftSignError& e) {
        EXPECT_EQ(e.hypothesis(), 0);
        EXPECT_LT(e.drift(), 0.0);
    }
}

TEST(Exponents, PracticalRegimeMatchedPairEtaIsOne) {
    // Mismatch can push eta either way, so only the matched value is pinned.
    const SprtAnalysis m = sprt_exponents_practical(Dist{0.88, 0.12}, Dist{0.22, 0.78}, kP0, kP1);
    EXPECT_GT(m.eta, 0.0);
    EXPECT_NEAR(std::max(m.expected_tau0, m.expected_tau1) * m.eta, 1.0, 1e-12);
}

namespace {
double brute_worst(const Ball& b0, const Ball& b1, int hyp, int n) {
    double best = INFINITY;
    for (int i = 0; i <= n; ++i) {
        for (int j = 0; j <= n; ++j) {
            const double a = 0.7 + 0.29 * i / n, b = 0.1 + 0.2 * j / n;  // first-symbol masses near the centres
            const Dist q0{a, 1 - a}, q1{b, 1 - b};
            if (!b0.contains(q0) || !b1.contains(q1)) continue;
            double v;
            try {
                const SprtAnalysis s = sprt_exponents_practical(q0, q1, kP0, kP1);
                v = hyp == 0 ? s.e0 : s.e1;
            } catch (const DriftSignError&) {
                v = 0.0;
            }
            best = std::min(best, v);
        }
    }
    return best;
}
}  // namespace

TEST(WorstCase, BinaryPathAgreesWithBruteForce) {
    for (double r : {1e-3, 1e-2}) {
        const Ball b0(kP0, DivergenceSpec::kl(), r), b1(kP1, DivergenceSpec::kl(), r);
        for (int hyp = 0; hyp < 2; ++hyp) {
            const SprtWorstCase w = sprt_worst_case_exact(kP0, kP1, b0, b1, hyp);
            const double ref = brute_worst(b0, b1, hyp, 1500);
            EXPECT_LE(w.value, ref + 1e-9) << "r=" << r << " hyp=" << hyp;
            EXPECT_NEAR(w.value, ref, 2e-3) << "r=" << r << " hyp=" << hyp;
        }
    }
}

TEST(WorstCase, ZeroRadiusAndReferenceValues) {
    const Ball z0(kP0, DivergenceSpec::kl(), 0.0), z1(kP1, DivergenceSpec::kl(), 0.0);
    EXPECT_NEAR(sprt_worst_case_exact(kP0, kP1, z0, z1, 0).value, kl(kP1, kP0), 1e-12);
    const Ball s0(kP0, DivergenceSpec::kl(), 1e-4), s1(kP1, DivergenceSpec::kl(), 1e-4);
    EXPECT_NEAR(sprt_worst_case_exact(kP0, kP1, s0, s1, 0).value, 1.3123, 0.01);
}

TEST(WorstCase, TernaryFallsBelowNominalAndIsFeasible) {
    const Dist h0{0.6, 0.3, 0.1}, h1{0.2, 0.3, 0.5};
    const Ball b0(h0, DivergenceSpec::kl(), 1e-3), b1(h1, DivergenceSpec::kl(), 1e-3);
    const SprtWorstCase w = sprt_worst_case_exact(h0, h1, b0, b1, 0);
    EXPECT_LT(w.value, kl(h1, h0));
    EXPECT_TRUE(b0.contains(w.worst0, 1e-9));
    EXPECT_TRUE(b1.contains(w.worst1, 1e-9));
    const SprtAnalysis s = sprt_exponents_practical(w.worst0, w.worst1, h0, h1);
    EXPECT_NEAR(s.e0, w.value, 1e-9);
}

TEST(Sensitivity, FirstOrderDropFollowsTheLargerDeduction) {
    const double r = 1e-6;
    const Ball b0(kP0, DivergenceSpec::kl(), r), b1(kP1, DivergenceSpec::kl(), r);
    for (int hyp = 0; hyp < 2; ++hyp) {
        const SprtSensitivity s = sprt_sensitivity(kP0, kP1, 1.0, hyp);
        const double drop = s.e - sprt_worst_case_exact(kP0, kP1, b0, b1, hyp).value;
        EXPECT_NEAR(drop / s.max_deduction(r, r), 1.0, 0.03) << "hyp=" << hyp;
        EXPECT_LE(s.min_deduction(r, r), s.max_deduction(r, r));
    }
}

TEST(Sensitivity, BernoulliThetas) {
    const SprtSensitivity s = sprt_sensitivity(kP0, kP1, 1.0, 0);
    EXPECT_NEAR(s.rho, kl(kP1, kP0) / kl(kP0, kP1), 1e-14);
    EXPECT_NEAR(s.rho, 1.18941, 1e-5);
    EXPECT_NEAR(s.theta_own, 3.27006, 1e-4);
    EXPECT_NEAR(s.theta_other, 8.66502, 1e-4);
    EXPECT_NEAR(s.theta_joint, 24.7087, 1e-3);
}

TEST(Simulation, DeterministicAcrossThreadCounts) {
    const SprtConfig cfg{kP0, kP1, 3.0, 3.0};
    const SimResult a = simulate_sprt(kP0, cfg, 0, 20000, 5, 1);
    const SimResult b = simulate_sprt(kP0, cfg, 0, 20000, 5, 4);
    EXPECT_EQ(a.errors, b.errors);
    EXPECT_EQ(a.decided0, b.decided0);
    EXPECT_EQ(a.mean_tau, b.mean_tau);
    EXPECT_EQ(a.var_tau, b.var_tau);
    // Wald: the lower crossing probability is at most exp(-3).
    EXPECT_LT(a.err_rate, std::exp(-3.0) * 1.2);
    EXPECT_GT(a.err_rate, 0.0);
}

TEST(Simulation, CensoringAtTheStepCap) {
    const SprtConfig cfg{kP0, kP1, 50.0, 50.0};
    const SimResult r = simulate_sprt(kP0, cfg, 0, 100, 1, 1, 5);
    EXPECT_EQ(r.censored, 100u);
    EXPECT_EQ(r.errors, 0u);
}

TEST(Simulation, NegativeDriftAlmostAlwaysErrs) {
    const SprtConfig cfg{kP0, kP1, 30.0, 30.0};
    const SimResult r = simulate_sprt(Dist{0.5, 0.5}, cfg, 0, 2000, 3, 2);
    EXPECT_GE(r.err_rate, 0.9);
}

TEST(Slope, RecoversExactExponentialDecay) {
    std::vector<std::pair<double, double>> pts;
    for (double g : {4.0, 5.0, 6.0, 7.0}) pts.emplace_back(g, 0.3 * std::exp(-1.7 * g));
    EXPECT_NEAR(estimate_exponent_slope(pts), 1.7, 1e-12);
    pts[1].second = 0.0;
    EXPECT_THROW(estimate_exponent_slope(pts), DomainError);
}
