#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "errexp/divergences.hpp"
#include "errexp/simplex.hpp"

namespace errexp {

struct SolveOptions {
    double tol_root = 1e-11;
    double tol_dual = 1e-8;
    double tol_opt = 1e-10;
    int max_iters = 200;
    int max_outer = 5000;
    int multistarts = 20;
    double grid_step = 1e-5;
    std::uint64_t seed = 0x5eed;
};

enum class Mode { Min, Max };

struct RootResult {
    double x = 0.0;
    double fx = 0.0;
    int iterations = 0;
};

// Bisection on a sign change. Stops when |f| <= f_tol, when the bracket is
// narrower than x_tol, or when the midpoint no longer moves in floating point.
RootResult bisect(const std::function<double(double)>& f, double lo, double hi, double f_tol,
                  double x_tol = 0.0, int max_iter = 200);

struct LineResult {
    double x = 0.0;
    double fx = 0.0;
};

// Golden-section search for the minimum of a unimodal function on [a, b].
// The endpoints are also compared, so a monotone f returns the better end.
LineResult golden_minimize(const std::function<double(double)>& f, double a, double b,
                           double x_tol = 1e-12, int max_iter = 300);

// Convex set {x in simplex : sum_i w_i g(x_i / w_i) <= bound} with g convex.
// Both orientations of a divergence ball have this form, which gives an exact
// linear minimization oracle through two nested monotone root solves.
struct SeparableSet {
    Vec w;
    double bound = 0.0;
    std::function<double(double)> g;
    std::function<double(double)> dg;
    std::function<double(double)> dg_inv;
    double dg_lo = 0.0;   // limit of g' at 0+
    double dg_hi = 0.0;   // limit of g' at +inf
    double g_zero = 0.0;  // g(0+), possibly +inf

    double value(const Vec& x) const;
    bool contains(const Vec& x, double tol = 1e-12) const;
    // argmin_x <c, x> over the set
    Vec linear_minimizer(const Vec& c) const;
    // Moves x toward the center along the segment until it lies in the set.
    Vec retract(const Vec& x) const;
};

// {P : d(center, P) <= r}
SeparableSet ball_set(const Ball& ball);
// {Q : d(Q, center) <= r}, the set of perturbations an adversary may reach from `center`.
SeparableSet reverse_ball_set(const Dist& center, const DivergenceSpec& spec, double r);

struct MinimizeResult {
    Vec x;
    double value = 0.0;
    double gap = 0.0;  // Frank-Wolfe duality gap, an upper bound on value - optimum for convex objectives
    int iterations = 0;
};

using Objective = std::function<double(const Vec&)>;
using Gradient = std::function<Vec(const Vec&)>;

// Frank-Wolfe with exact line search. Throws SolverError if the gap does not
// fall below tol_opt * max(1, |value|) within max_outer iterations.
MinimizeResult minimize_over_set(const Objective& f, const Gradient& grad, const SeparableSet& set,
                                 const Vec& start, const SolveOptions& opts = {});
MinimizeResult minimize_over_ball(const Objective& f, const Gradient& grad, const Ball& ball,
                                  const SolveOptions& opts = {});

// The two points of the binary KL sphere {q : D(q || c) = gamma}, given as the
// probability of the second symbol. Missing sides are omitted.
std::vector<double> binary_kl_sphere(double c, double gamma);

struct SphereResult {
    Dist point;
    double value = 0.0;
};

// Extremizes f over {Q : D(Q || center) = gamma}. Exact for two symbols; for
// larger alphabets a radial parametrization is searched with multistart
// Nelder-Mead over directions in the tangent plane.
SphereResult extremize_on_kl_sphere(const Objective& f, const Dist& center, double gamma, Mode mode,
                                    const SolveOptions& opts = {});

struct GridResult {
    Vec point;
    double value = 0.0;
    std::uint64_t visited = 0;
    std::uint64_t feasible = 0;
};

// Brute-force referee over the simplex grid with spacing `step`.
GridResult grid_oracle(const Objective& f, const std::function<bool(const Vec&)>& feasible, std::size_t k,
                       double step, Mode mode, std::uint64_t cap = kEnumerationCap);

// log(n!) for 0..n by cumulative sums.
std::vector<double> log_factorials(std::uint32_t n);

// Natural log of P_true(type of X^n lands in the region), by exact summation
// of multinomial probabilities over all types. Returns -inf for an empty region.
double sanov_log_probability(const Dist& p_true, std::uint32_t n,
                             const std::function<bool(const EmpiricalType&)>& in_region,
                             std::uint64_t cap = kEnumerationCap);

}  // namespace errexp
