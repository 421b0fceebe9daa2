#pragma once

#include "errexp/divergences.hpp"
#include "errexp/lrt.hpp"
#include "errexp/simplex.hpp"
#include "errexp/solver.hpp"

namespace errexp {

// One side of the universal test that rejects ph0 when D(T || ph0) >= gamma_hat.
struct GlrtSide {
    double e = 0.0;
    Dist achiever;
    double multiplier = 0.0;
    Branch branch = Branch::Interior;
};

// min D(Q || p1) over D(Q || ph0) <= gamma_hat, reached on the geometric
// family between ph0 and p1.
GlrtSide glrt_e1(const Dist& ph0, const Dist& p1, double gamma_hat, const SolveOptions& opts = {});

// min D(Q || p0) over D(Q || ph0) >= gamma_hat. Any minimizer in the relative
// interior of a face of the simplex lies on the geometric family through p0
// and ph0 restricted to that face, so for moderate alphabets every face is
// enumerated and solved exactly. Larger alphabets fall back to the sphere search.
GlrtSide glrt_e0(const Dist& p0, const Dist& ph0, double gamma_hat, const SolveOptions& opts = {});

// (gamma_hat - sqrt(2 gamma_hat) TV(p0, ph0))^+. Holds as a bound on glrt_e0
// while gamma_hat <= -log max ph0, i.e. while the sphere around ph0 reaches
// every vertex direction; past that the exponent can exceed it.
double glrt_e0_upper(const Dist& p0, const Dist& ph0, double gamma_hat);

struct QcqpReport {
    double value = 0.0;
    double multiplier = 0.0;
    bool inactive = false;   // p0 already satisfies the quadratic constraint
    bool in_window = false;  // the quadratic model is meant for gamma_hat <= 0.1 with p0 inside the sphere
};

// Quadratic small-threshold model: min (1/2) chi^2-type distance to p0 subject
// to the same distance to ph0 being at least gamma_hat, solved through its
// one-multiplier dual (exact for one quadratic constraint).
QcqpReport glrt_e0_small_gamma(const Dist& p0, const Dist& ph0, double gamma_hat);

// theta = (2/alpha) max chi^2(Q || ph0) over the sphere D(Q || ph0) = gamma_hat.
SensitivityReport glrt_sensitivity(const Dist& ph0, double gamma_hat, double alpha, const SolveOptions& opts = {});

struct RatioBounds {
    double h = 1.0;
    double lower = 1.0;
    double upper_tight = 0.0;
    double upper_weak = 0.0;
};

// Bounds on sqrt(theta_glrt / theta_lrt), the ratio of first-order deductions
// when both tests share the same type-I exponent gamma_hat.
RatioBounds glrt_sensitivity_ratio_bounds(const Dist& ph0, double gamma_hat);

// LRT threshold whose matched type-I exponent equals `target`.
double lrt_threshold_for_type1(const Dist& ph0, const Dist& ph1, double target, const SolveOptions& opts = {});

// min over P0 in the ball (centred at ph0) of glrt_e0(P0, ph0, gamma_hat).
WorstCaseReport glrt_worst_case_e0(const Dist& ph0, double gamma_hat, const Ball& ball,
                                   const SolveOptions& opts = {});
// min over P1 in the ball (centred at the nominal alternative) of glrt_e1(ph0, P1, gamma_hat).
WorstCaseReport glrt_worst_case_e1(const Dist& ph0, double gamma_hat, const Ball& ball,
                                   const SolveOptions& opts = {});

// min over P in the ball of D(q || P): the KL distance from q to the ball.
double kl_to_ball(const Vec& q, const Ball& ball, Vec* argmin = nullptr, const SolveOptions& opts = {});

}  // namespace errexp
