#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "errexp/divergences.hpp"
#include "errexp/simplex.hpp"
#include "errexp/solver.hpp"

namespace errexp {

// Per-sample mean of log(ph0/ph1) and of log(ph1/ph0) under p_true.
struct Drifts {
    double as_h0 = 0.0;
    double as_h1 = 0.0;
};

Drifts drifts(const Dist& p_true, const Dist& ph0, const Dist& ph1);

struct SprtAnalysis {
    double e0 = 0.0;
    double e1 = 0.0;
    double drift0 = 0.0;  // D(p0||ph1) - D(p0||ph0)
    double drift1 = 0.0;  // D(p1||ph0) - D(p1||ph1)
    double eta = 1.0;
    double gamma0 = 0.0;  // upper threshold (decide 0)
    double gamma1 = 0.0;  // lower threshold magnitude (decide 1)
    double expected_tau0 = 0.0;
    double expected_tau1 = 0.0;
};

// Thresholds matched to the true drifts so both expected stopping times are n.
SprtAnalysis sprt_exponents(const Dist& p0, const Dist& p1, const Dist& ph0, const Dist& ph1, double n = 1.0);
// Thresholds set from the nominal pair as if it were true; exponents are
// normalized by the larger of the two resulting stopping times.
SprtAnalysis sprt_exponents_practical(const Dist& p0, const Dist& p1, const Dist& ph0, const Dist& ph1,
                                      double n = 1.0);

struct SprtWorstCase {
    double value = 0.0;      // min over both balls of the practical exponent
    double own_branch = 0.0; // min of D(P_i||P_j) * rho_i
    double drift_branch = 0.0; // min of D(P_i||P_j) * drift_j / drift_i
    Dist worst0;
    Dist worst1;
    std::size_t grid_points = 0;
};

// Exact (to grid-plus-refinement accuracy for two symbols, local search
// otherwise) minimum of the practical exponent of hypothesis `hyp` over a
// ball around ph0 and a ball around ph1.
SprtWorstCase sprt_worst_case_exact(const Dist& ph0, const Dist& ph1, const Ball& ball0, const Ball& ball1,
                                    int hyp, const SolveOptions& opts = {});

struct SprtSensitivity {
    int hyp = 0;
    double e = 0.0;
    double rho = 1.0;
    double alpha = 1.0;
    double theta_own = 0.0;    // against the ball around ph_hyp
    double theta_other = 0.0;  // against the ball around the other nominal
    double theta_joint = 0.0;  // drift-ratio branch, other ball only

    // Deduction of the own-rate branch and of the drift-ratio branch.
    double split_deduction(double r_own, double r_other) const;
    double joint_deduction(double r_other) const;
    // The smaller deduction, and the larger one. Both branches agree at the
    // nominal pair, so the worst case to first order follows the larger.
    double min_deduction(double r_own, double r_other) const;
    double max_deduction(double r_own, double r_other) const;
};

SprtSensitivity sprt_sensitivity(const Dist& ph0, const Dist& ph1, double alpha, int hyp);

struct SprtConfig {
    Dist ph0;
    Dist ph1;
    double gamma0 = 0.0;
    double gamma1 = 0.0;
};

struct SimResult {
    std::uint64_t trials = 0;
    std::uint64_t errors = 0;
    std::uint64_t censored = 0;
    std::uint64_t decided0 = 0;
    std::uint64_t decided1 = 0;
    double err_rate = 0.0;
    double mean_tau = 0.0;
    double var_tau = 0.0;
};

// Monte Carlo of the sequential test. Trial t draws from its own Philox
// stream keyed by `seed`, so results do not depend on `threads`. A trial
// reaching step_cap without crossing is censored and excluded from the
// error and stopping-time statistics.
SimResult simulate_sprt(const Dist& p_true, const SprtConfig& config, int true_hyp, std::uint64_t trials,
                        std::uint64_t seed, unsigned threads = 1, std::uint64_t step_cap = 10'000'000);

// Least-squares slope of -log(err_rate) against the threshold.
double estimate_exponent_slope(const std::vector<std::pair<double, double>>& points);

}  // namespace errexp
