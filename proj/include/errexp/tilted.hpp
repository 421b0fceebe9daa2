#pragma once

#include "errexp/simplex.hpp"
#include "errexp/solver.hpp"

namespace errexp {

// Where a threshold sits relative to the range a tilted family can reach.
enum class Branch {
    Interior,  // a finite multiplier puts the family on the threshold
    Zero,      // the base distribution already satisfies the constraint; exponent 0
    Infinite,  // no distribution satisfies the constraint; exponent +inf
};

const char* branch_name(Branch b);

struct Multiplier {
    double lambda = 0.0;
    Branch branch = Branch::Interior;
};

// Q ~ p0^(1 - lambda) p1^lambda for lambda in [0, 1].
Dist tilted_lrt(const Dist& p0, const Dist& p1, double lambda);

// D(Q || p0) - D(Q || p1) along the family above; nondecreasing in lambda.
double lrt_statistic(const Dist& q, const Dist& p0, const Dist& p1);

// lambda with D(Q_lambda || p0) - D(Q_lambda || p1) = gamma. Outside
// [-D(p0||p1), D(p1||p0)] the nearer end is returned with a non-interior branch.
Multiplier lambda_for_threshold(const Dist& p0, const Dist& p1, double gamma, const SolveOptions& opts = {});

// Q ~ p0^s p1^(1 - s), s in [0, 1). s = 0 gives p1; s -> 1 approaches p0.
Dist tilted_hoeffding(const Dist& p0, const Dist& p1, double s);

// Conversions from the two multiplier conventions used for this family:
// exponents mu/(1+mu), 1/(1+mu) and exponents mu/(1-mu), 1/(1-mu). Only the
// ratio of the exponents matters after normalizing, so both map to the same s.
double s_from_mu_plus(double mu);
double s_from_mu_minus(double mu);

// s with D(Q_s || p0) = gamma. Zero branch (s = 0) if p1 itself is within gamma.
Multiplier hoeffding_s_for_threshold(const Dist& p0, const Dist& p1, double gamma,
                                     const SolveOptions& opts = {});

// Q ~ p_true (ph1/ph0)^lambda for hypothesis 0 and p_true (ph0/ph1)^lambda
// for hypothesis 1, lambda >= 0.
Dist mismatched_tilted(const Dist& p_true, const Dist& ph0, const Dist& ph1, double lambda, int hypothesis);

// lambda >= 0 putting D(Q||ph0) - D(Q||ph1) on gamma_hat. Zero branch when
// p_true is already on the far side; infinite branch when gamma_hat is past
// the largest (hypothesis 0) or smallest (hypothesis 1) log-likelihood ratio.
Multiplier lambda_for_mismatched_threshold(const Dist& p_true, const Dist& ph0, const Dist& ph1,
                                           double gamma_hat, int hypothesis, const SolveOptions& opts = {});

// Normalized exponential tilt p * exp(lambda * stat), computed in log space.
Dist exponential_tilt(const Vec& p, const Vec& stat, double lambda);

// log(ph1 / ph0) per symbol.
Vec log_ratio(const Dist& ph0, const Dist& ph1);

}  // namespace errexp
