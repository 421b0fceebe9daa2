#pragma once

#include <cstdint>
#include <string>

#include "errexp/divergences.hpp"
#include "errexp/lrt.hpp"
#include "errexp/simplex.hpp"
#include "errexp/solver.hpp"
#include "errexp/sprt.hpp"

namespace errexp {

// An adversary sees the empirical type T and may replace it by any T' with
// d(T, T') <= r before the test statistic is computed. Only divergences that
// are jointly convex qualify: f-divergences and Renyi orders in (0, 1].
void require_adversarial_divergence(const DivergenceSpec& spec);

struct AdvReport {
    double value = 0.0;
    Dist true_type;       // T, the type the sample actually has
    Dist perturbed_type;  // T', what the test sees
    double residual = 0.0;  // KKT residual of the optimality condition (KL only, else 0)
    Branch branch = Branch::Interior;
};

// Error exponent of the LRT (p0, p1, gamma) under the adversary above.
AdvReport adv_lrt_worst_case(const Dist& p0, const Dist& p1, double gamma, double r, const DivergenceSpec& spec,
                             int hyp, const SolveOptions& opts = {});

// theta_i = (2/alpha) Var_{Q}(log(Q / p_i)), Q the matched tilt at gamma.
SensitivityReport adv_lrt_sensitivity(const Dist& p0, const Dist& p1, double gamma, double alpha, int hyp,
                                      const SolveOptions& opts = {});

// (min p_i/Q) theta_dist - (2/alpha) E_i^2 <= theta_adv <= theta_dist, all in theta units.
struct SandwichReport {
    double lower = 0.0;
    double theta_adv = 0.0;
    double theta_dist = 0.0;
    double matched_e = 0.0;
};

SandwichReport adv_vs_dist_bounds(const Dist& p0, const Dist& p1, double gamma, double alpha, int hyp,
                                  const SolveOptions& opts = {});

struct AdvGlrtReport {
    double e0 = 0.0;
    double e1 = 0.0;
    Dist perturbed0;
    Dist perturbed1;
};

// Exponents of the universal test D(T' || p0) >= gamma under the adversary.
AdvGlrtReport adv_glrt_worst_case(const Dist& p0, const Dist& p1, double gamma, double r,
                                  const DivergenceSpec& spec, const SolveOptions& opts = {});

struct AdvGlrtSensitivity {
    double e0 = 0.0;
    double e1 = 0.0;
    double theta0 = 0.0;
    double theta1 = 0.0;
    double alpha = 1.0;
};

AdvGlrtSensitivity adv_glrt_sensitivity(const Dist& p0, const Dist& p1, double gamma, double alpha,
                                        const SolveOptions& opts = {});

struct AdvSprtBounds {
    double theta0 = 0.0;  // (2/alpha) Var_{p1} log(p1/p0)
    double theta1 = 0.0;  // (2/alpha) Var_{p0} log(p0/p1)
    double factor0 = 0.0;
    double factor1 = 0.0;
    double product_bound = 0.0;
    bool vacuous = false;  // a factor was clamped at zero
    double tau0 = 0.0;     // inflated expected stopping times
    double tau1 = 0.0;
};

AdvSprtBounds adv_sprt_bounds(const Dist& p0, const Dist& p1, double r, double alpha, double n = 1.0);

struct AdvSprtSim {
    SimResult h0;
    SimResult h1;
};

// Binary alphabet, KL adversary: at every step the running type is replaced
// by the point of its radius-r ball that pushes the statistic hardest toward
// the wrong boundary. A greedy, non-clairvoyant adversary.
AdvSprtSim simulate_sprt_adversarial(const Dist& p0, const Dist& p1, double gamma0, double gamma1, double r,
                                     std::uint64_t trials, std::uint64_t seed, std::uint64_t step_cap = 100000);

}  // namespace errexp
