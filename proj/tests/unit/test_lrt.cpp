#include <gtest/gtest.h>

#include <cmath>

#include "errexp/errors.hpp"
#include "errexp/lrt.hpp"
#include "helpers.hpp"

using namespace errexp;

namespace {
const Dist kP0{0.9, 0.1};
const Dist kP1{0.2, 0.8};

// Chernoff-bound exponent computed directly: sup_t [t g - log E_p exp(t stat)].
double chernoff(const Vec& p, const Vec& stat, double g) {
    auto f = [&](double t) {
        double z = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) z += p[i] * std::exp(t * stat[i]);
        return t * g - std::log(z);
    };
    return testutil::grid_max(f, 0.0, 60.0, 60000);
}
}  // namespace

TEST(Matched, ZeroThresholdIsChernoffInformation) {
    const ExponentReport r = matched_exponents(kP0, kP1, 0.0);
    auto neg_log_mix = [](double l) { return -std::log(std::pow(0.9, 1 - l) * std::pow(0.2, l) +
                                                       std::pow(0.1, 1 - l) * std::pow(0.8, l)); };
    const double ci = testutil::grid_max(neg_log_mix, 0.0, 1.0);
    EXPECT_NEAR(r.e0, ci, 1e-10);
    EXPECT_NEAR(r.e1, ci, 1e-10);
    EXPECT_NEAR(r.e0, 0.34737963, 1e-8);
    EXPECT_EQ(r.branch0, Branch::Interior);
}

TEST(Matched, HalfTiltGivesTwiceBhattacharyya) {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 50; ++t) {
        const std::size_t k = 2 + t % 3;
        const Dist a = testutil::random_dist(rng, k), b = testutil::random_dist(rng, k);
        const double g = lrt_statistic(tilted_lrt(a, b, 0.5), a, b);
        const ExponentReport r = matched_exponents(a, b, g);
        EXPECT_NEAR(r.e0 + r.e1, 2.0 * bhattacharyya(a, b), 1e-9);
    }
}

TEST(Matched, EndsOfTheThresholdRange) {
    const ExponentReport lo = matched_exponents(kP0, kP1, -kl(kP0, kP1));
    EXPECT_NEAR(lo.e0, 0.0, 1e-12);
    EXPECT_NEAR(lo.e1, kl(kP0, kP1), 1e-9);
    const ExponentReport hi = matched_exponents(kP0, kP1, kl(kP1, kP0));
    EXPECT_NEAR(hi.e0, kl(kP1, kP0), 1e-9);
    EXPECT_NEAR(hi.e1, 0.0, 1e-12);
}

TEST(Mismatched, PrimalMatchesIndependentChernoffBound) {
    std::mt19937_64 rng(8);
    for (int t = 0; t < 60; ++t) {
        const std::size_t k = 2 + t % 3;
        const Dist p0 = testutil::random_dist(rng, k), p1 = testutil::random_dist(rng, k);
        const Dist h0 = testutil::random_dist(rng, k), h1 = testutil::random_dist(rng, k);
        const Vec l = log_ratio(h0, h1);
        const double m0 = expectation(p0, l), m1 = expectation(p1, l);
        const double g = testutil::uniform(rng, std::min(m0, m1), std::max(m0, m1));
        const ExponentReport r = mismatched_exponents(p0, p1, h0, h1, g);
        Vec neg(l);
        for (double& v : neg) v = -v;
        EXPECT_NEAR(r.e0, chernoff(p0, l, g), 1e-7);
        EXPECT_NEAR(r.e1, chernoff(p1, neg, -g), 1e-7);
        EXPECT_NEAR(r.e0, r.dual0, 1e-8);
        EXPECT_NEAR(r.e1, r.dual1, 1e-8);
    }
}

TEST(Mismatched, AgreesWithGridReferee) {
    const Dist p0{0.5, 0.3, 0.2}, p1{0.2, 0.3, 0.5}, h0{0.45, 0.35, 0.2}, h1{0.25, 0.25, 0.5};
    const double g = 0.05;
    const ExponentReport r = mismatched_exponents(p0, p1, h0, h1, g);
    const Vec l = log_ratio(h0, h1);
    const GridResult g0 = grid_oracle([&](const Vec& q) { return kl(q, p0); },
                                      [&](const Vec& q) { return expectation(q, l) >= g; }, 3, 1.0 / 400, Mode::Min);
    EXPECT_NEAR(r.e0, g0.value, 2e-3);
    EXPECT_LE(r.e0, g0.value + 1e-12);
}

TEST(Mismatched, InfiniteBranchPastTheRange) {
    const Dist h0{0.5, 0.5}, h1{0.25, 0.75};
    const ExponentReport r = mismatched_exponents(kP0, kP1, h0, h1, 1.0);
    EXPECT_EQ(r.branch0, Branch::Infinite);
    EXPECT_TRUE(std::isinf(r.e0));
}

TEST(Stein, QuantileAndThreshold) {
    EXPECT_NEAR(normal_upper_quantile(0.05), 1.6448536269514722, 1e-12);
    EXPECT_THROW(normal_upper_quantile(0.0), DomainError);
    const SteinThreshold s = stein_threshold(kP0, kP0, kP1, 100.0, 0.05);
    EXPECT_NEAR(s.first_order, -kl(kP0, kP1), 1e-14);
    EXPECT_NEAR(s.gamma, s.first_order + std::sqrt(s.variance / 100.0) * 1.6448536269514722, 1e-12);
    const SteinThreshold flat = stein_threshold(Dist{0.5, 0.5}, Dist{0.5, 0.5}, Dist{0.5, 0.5}, 10.0, 0.1);
    EXPECT_TRUE(flat.degenerate);
    EXPECT_EQ(flat.gamma, flat.first_order);
}

TEST(Stein, MatchedExponentIsTheDivergence) {
    EXPECT_NEAR(stein_exponent(kP0, kP1, kP0, kP1), kl(kP0, kP1), 1e-8);
}

TEST(WorstCase, ZeroRadiusIsMatched) {
    const WorstCaseReport w = worst_case_exponent(kP0, kP1, 0.0, Ball(kP0, DivergenceSpec::kl(), 0.0), 0);
    EXPECT_NEAR(w.value, 0.34737963, 1e-8);
}

TEST(WorstCase, AlternationAgreesWithFrankWolfe) {
    std::mt19937_64 rng(13);
    for (int t = 0; t < 12; ++t) {
        const std::size_t k = 2 + t % 3;
        const Dist a = testutil::random_dist(rng, k, 0.05), b = testutil::random_dist(rng, k, 0.05);
        const double g = testutil::uniform(rng, -0.5, 0.5) * std::min(kl(a, b), kl(b, a));
        const double r = testutil::uniform(rng, 1e-4, 1e-2);
        for (int hyp = 0; hyp < 2; ++hyp) {
            const Ball ball(hyp == 0 ? a : b, DivergenceSpec::kl(), r);
            const WorstCaseReport x = worst_case_exponent(a, b, g, ball, hyp);
            const WorstCaseReport y = worst_case_exponent_fw(a, b, g, ball, hyp);
            EXPECT_NEAR(x.value, y.value, 1e-8) << "k=" << k << " hyp=" << hyp;
        }
    }
}

TEST(WorstCase, AgreesWithGridOnBinary) {
    for (const char* name : {"kl", "chi2", "hellinger", "renyi:0.5"}) {
        const DivergenceSpec spec = parse_divergence(name);
        for (int hyp = 0; hyp < 2; ++hyp) {
            const Ball ball(hyp == 0 ? kP0 : kP1, spec, 0.005);
            const WorstCaseReport w = worst_case_exponent(kP0, kP1, 0.1, ball, hyp);
            auto f = [&](const Vec& p) {
                const Dist d = Dist::model(p);
                const ExponentReport r = mismatched_exponents(d, d, kP0, kP1, 0.1);
                return hyp == 0 ? r.e0 : r.e1;
            };
            const GridResult g = grid_oracle(f, [&](const Vec& p) { return ball.contains(p); }, 2, 1e-5, Mode::Min);
            EXPECT_NEAR(w.value, g.value, 1e-4) << name << " hyp=" << hyp;
            EXPECT_LE(w.value, g.value + 1e-10) << name << " hyp=" << hyp;
        }
    }
}

TEST(WorstCase, NonincreasingInRadius) {
    double prev = INFINITY;
    for (double r : {0.0, 1e-5, 1e-4, 1e-3, 1e-2, 5e-2}) {
        const double v = worst_case_exponent(kP0, kP1, 0.0, Ball(kP0, DivergenceSpec::kl(), r), 0).value;
        EXPECT_LE(v, prev + 1e-12);
        prev = v;
    }
}

TEST(WorstCase, LargeBallReachesZero) {
    const WorstCaseReport w = worst_case_exponent(kP0, kP1, 0.0, Ball(kP0, DivergenceSpec::kl(), 1.0), 0);
    EXPECT_EQ(w.branch, Branch::Zero);
    EXPECT_EQ(w.value, 0.0);
}

TEST(Sensitivity, BareVarianceValuesOnBernoulliPair) {
    // With curvature 2 the prefactor 2/alpha is one and theta is chi^2 itself.
    const SensitivityReport s = lrt_sensitivity(kP0, kP1, 0.0, 2.0, 0);
    const Dist q = tilted_lrt(kP0, kP1, lambda_for_threshold(kP0, kP1, 0.0).lambda);
    EXPECT_NEAR(s.theta, chi_squared(q, kP0), 1e-14);
    EXPECT_NEAR(s.theta, 1.135793, 2e-6);
    EXPECT_NEAR(lrt_sensitivity(kP0, kP1, 0.0, 1.0, 0).theta, 2.0 * s.theta, 1e-13);
}

TEST(Sensitivity, LocalModelMatchesWorstCase) {
    for (int hyp = 0; hyp < 2; ++hyp) {
        const SensitivityReport s = lrt_sensitivity(kP0, kP1, 0.0, 1.0, hyp);
        const double r = 1e-6;
        const double w = worst_case_exponent(kP0, kP1, 0.0, Ball(hyp == 0 ? kP0 : kP1, DivergenceSpec::kl(), r), hyp)
                             .value;
        EXPECT_NEAR((s.matched_e - w) / std::sqrt(r), std::sqrt(s.theta), 0.02 * std::sqrt(s.theta));
    }
}

TEST(Sensitivity, MonotoneInThreshold) {
    std::mt19937_64 rng(17);
    for (int t = 0; t < 30; ++t) {
        const Dist a = testutil::random_dist(rng, 2 + t % 3), b = testutil::random_dist(rng, 2 + t % 3);
        const double lo = -kl(a, b), hi = kl(b, a);
        double p0 = -INFINITY, p1 = INFINITY;
        for (int i = 1; i < 50; ++i) {
            const double g = lo + (hi - lo) * i / 50.0;
            const double t0 = lrt_sensitivity(a, b, g, 1.0, 0).theta, t1 = lrt_sensitivity(a, b, g, 1.0, 1).theta;
            EXPECT_GE(t0, p0 - 1e-12);
            EXPECT_LE(t1, p1 + 1e-12);
            p0 = t0;
            p1 = t1;
        }
    }
}
