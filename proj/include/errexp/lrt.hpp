#pragma once

#include <string>

#include "errexp/divergences.hpp"
#include "errexp/simplex.hpp"
#include "errexp/solver.hpp"
#include "errexp/tilted.hpp"

namespace errexp {

// Error exponents of a threshold test on D(T||ph0) - D(T||ph1) >= gamma.
// e0 is the type-I exponent (truth p0), e1 the type-II exponent (truth p1).
// The primal values come from tilted families; dual0/dual1 come from an
// independent one-dimensional concave maximization and should agree.
struct ExponentReport {
    double e0 = 0.0;
    double e1 = 0.0;
    Dist achiever0;
    Dist achiever1;
    double multiplier0 = 0.0;
    double multiplier1 = 0.0;
    Branch branch0 = Branch::Interior;
    Branch branch1 = Branch::Interior;
    double dual0 = 0.0;
    double dual1 = 0.0;
};

ExponentReport matched_exponents(const Dist& p0, const Dist& p1, double gamma, const SolveOptions& opts = {});
ExponentReport mismatched_exponents(const Dist& p0, const Dist& p1, const Dist& ph0, const Dist& ph1,
                                    double gamma_hat, const SolveOptions& opts = {});

// max over lambda >= 0 of lambda * target - log E_p exp(lambda * stat).
double dual_exponent(const Vec& p, const Vec& stat, double target);

// Inverse of the standard normal upper tail, Q^{-1}(eps).
double normal_upper_quantile(double eps);

struct SteinThreshold {
    double gamma = 0.0;
    double first_order = 0.0;  // D(p0||ph0) - D(p0||ph1)
    double variance = 0.0;     // Var_p0 log(ph0/ph1)
    bool degenerate = false;   // zero variance: only the first-order term is returned
};

// Threshold giving type-I error eps at sample size n to second order.
SteinThreshold stein_threshold(const Dist& p0, const Dist& ph0, const Dist& ph1, double n, double eps);

// Type-II exponent with the threshold at its first-order value.
double stein_exponent(const Dist& p0, const Dist& p1, const Dist& ph0, const Dist& ph1,
                      const SolveOptions& opts = {});

struct WorstCaseReport {
    double value = 0.0;
    Dist worst;     // least favourable truth inside the ball
    Dist achiever;  // dominant empirical type under that truth
    Branch branch = Branch::Interior;
    int iterations = 0;
    std::string method;
};

// min over P in the ball of the hypothesis-`hyp` exponent of the test built
// from (ph0, ph1, gamma_hat); the ball is centred at the nominal ph_hyp.
// KL balls use alternating exact minimization; other divergences Frank-Wolfe.
WorstCaseReport worst_case_exponent(const Dist& ph0, const Dist& ph1, double gamma_hat, const Ball& ball,
                                    int hyp, const SolveOptions& opts = {});
// Frank-Wolfe for any ball; exposed for cross-checking the alternation.
WorstCaseReport worst_case_exponent_fw(const Dist& ph0, const Dist& ph1, double gamma_hat, const Ball& ball,
                                       int hyp, const SolveOptions& opts = {});

// Local model E_worst(r) ~ matched_e - sqrt(r * theta) for small radii.
struct SensitivityReport {
    double matched_e = 0.0;
    double theta = 0.0;
    double alpha = 1.0;
    Branch branch = Branch::Interior;

    double deduction(double r) const;
    double approx(double r) const;  // clamped at 0
};

// theta_i = (2/alpha) chi^2(Q || ph_i) with Q the matched tilt at gamma_hat.
SensitivityReport lrt_sensitivity(const Dist& ph0, const Dist& ph1, double gamma_hat, double alpha, int hyp,
                                  const SolveOptions& opts = {});

}  // namespace errexp
