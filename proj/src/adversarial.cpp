#include "errexp/adversarial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "errexp/errors.hpp"
#include "errexp/glrt.hpp"
#include "errexp/philox.hpp"
#include "errexp/tilted.hpp"

namespace errexp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFloor = 1e-12;

Dist floored(const Vec& q) {
    Vec v(q);
    for (double& x : v) x = std::max(x, kFloor);
    return Dist::normalize(std::move(v));
}

struct Inner {
    double value;
    Vec q;        // true type achieving it
    double mu;    // multiplier of d(Q, Qhat) <= r (KL only)
};

// min D(Q || target) over {Q : d(Q, qhat) <= r}.
Inner inner_min(const Vec& qhat_in, const Dist& target, double r, const DivergenceSpec& spec,
                const SolveOptions& opts) {
    const Dist qhat = floored(qhat_in);
    if (spec.is_kl()) {
        const GlrtSide s = glrt_e1(qhat, target, r, opts);
        if (s.branch == Branch::Zero) return {0.0, target.values(), 0.0};
        const double mu = s.multiplier >= 1.0 ? kInf : s.multiplier / (1.0 - s.multiplier);
        return {s.e, s.achiever.values(), mu};
    }
    const SeparableSet set = reverse_ball_set(qhat, spec, r);
    if (set.contains(target.values())) return {0.0, target.values(), 0.0};
    auto f = [&](const Vec& q) { return kl(q, target.values()); };
    auto grad = [&](const Vec& q) {
        Vec g(q.size());
        for (std::size_t i = 0; i < q.size(); ++i) g[i] = std::log(std::max(q[i], 1e-300) / target[i]) + 1.0;
        return g;
    };
    const MinimizeResult m = minimize_over_set(f, grad, set, qhat.values(), opts);
    return {m.value, m.x, 0.0};
}

// Gradient of qhat -> inner_min(qhat).value, analytic for KL, else by
// central differences along e_i - qhat.
Vec inner_gradient(const Vec& qhat, const Dist& target, double r, const DivergenceSpec& spec,
                   const SolveOptions& opts) {
    const std::size_t k = qhat.size();
    Vec g(k, 0.0);
    if (spec.is_kl()) {
        const Inner in = inner_min(qhat, target, r, spec, opts);
        if (in.value <= 0.0) return g;
        const double mu = std::isfinite(in.mu) ? in.mu : 1e12;
        for (std::size_t i = 0; i < k; ++i) g[i] = -mu * in.q[i] / std::max(qhat[i], kFloor);
        return g;
    }
    const double h = 1e-6;
    for (std::size_t i = 0; i < k; ++i) {
        Vec a(qhat), b(qhat);
        for (std::size_t j = 0; j < k; ++j) {
            const double d = (j == i ? 1.0 : 0.0) - qhat[j];
            a[j] += h * d;
            b[j] -= h * d;
        }
        g[i] = (inner_min(a, target, r, spec, opts).value - inner_min(b, target, r, spec, opts).value) / (2.0 * h);
    }
    return g;
}

// Euclidean projection onto {x >= floor, sum x = 1}.
Vec project_floor(const Vec& y, double floor) {
    const std::size_t k = y.size();
    const double mass = 1.0 - floor * static_cast<double>(k);
    Vec z(k);
    for (std::size_t i = 0; i < k; ++i) z[i] = (y[i] - floor) / mass;
    Vec p = project_to_simplex(z);
    for (double& v : p) v = floor + mass * v;
    return p;
}

// Projection onto {x >= floor, sum x = 1, <l, x> >= t}.
Vec project_halfspace(const Vec& y, const Vec& l, double t) {
    Vec x = project_floor(y, kFloor);
    if (expectation(x, l) >= t) return x;
    auto shifted = [&](double kappa) {
        Vec z(y);
        for (std::size_t i = 0; i < z.size(); ++i) z[i] += kappa * l[i];
        return project_floor(z, kFloor);
    };
    double hi = 1.0;
    while (expectation(shifted(hi), l) < t && hi < 1e12) hi *= 2.0;
    double lo = 0.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (expectation(shifted(mid), l) >= t ? hi : lo) = mid;
    }
    return shifted(hi);
}

double kkt_residual(const Vec& q, const Vec& qhat, const Vec& l) {
    // At a KL optimum Q/Qhat is affine in the log-likelihood ratio.
    const std::size_t k = q.size();
    Vec y(k);
    for (std::size_t i = 0; i < k; ++i) y[i] = q[i] / qhat[i];
    const double n = static_cast<double>(k);
    double ml = 0.0, my = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        ml += l[i] / n;
        my += y[i] / n;
    }
    double sll = 0.0, sly = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        sll += (l[i] - ml) * (l[i] - ml);
        sly += (l[i] - ml) * (y[i] - my);
    }
    const double b = sll > 0.0 ? sly / sll : 0.0;
    double res = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double e = y[i] - (my + b * (l[i] - ml));
        res += e * e;
    }
    return std::sqrt(res / n) / std::max(1.0, std::abs(my));
}

}  // namespace

void require_adversarial_divergence(const DivergenceSpec& spec) {
    if (spec.kind == DivKind::Renyi && spec.order > 1.0)
        throw DomainError("adversarial balls need a jointly convex divergence; Renyi orders above 1 are not");
}

AdvReport adv_lrt_worst_case(const Dist& p0, const Dist& p1, double gamma, double r, const DivergenceSpec& spec,
                             int hyp, const SolveOptions& opts) {
    if (hyp != 0 && hyp != 1) throw UsageError("hypothesis must be 0 or 1");
    require_adversarial_divergence(spec);
    if (!(r >= 0.0)) throw DomainError("radius must be nonnegative");
    require_same_size(p0.values(), p1.values(), "adv_lrt_worst_case");
    const Dist& target = hyp == 0 ? p0 : p1;
    // hypothesis 0 errs when <L, T'> >= gamma; hypothesis 1 when <-L, T'> >= -gamma
    Vec l = log_ratio(p0, p1);
    double t = gamma;
    if (hyp == 1) {
        for (double& v : l) v = -v;
        t = -gamma;
    }
    AdvReport rep;
    rep.true_type = target;
    rep.perturbed_type = target;
    if (expectation(target.values(), l) >= t) {
        rep.branch = Branch::Zero;
        return rep;
    }
    {
        Vec neg(l);
        for (double& v : neg) v = -v;
        const Vec far = ball_set(Ball(target, spec, r)).linear_minimizer(neg);
        if (expectation(far, l) >= t) {
            rep.perturbed_type = Dist::normalize(far);
            rep.branch = Branch::Zero;
            return rep;
        }
    }
    double lmax = -kInf;
    for (double v : l) lmax = std::max(lmax, v);
    if (t > lmax) {
        rep.value = kInf;
        rep.branch = Branch::Infinite;
        return rep;
    }
    auto psi = [&](const Vec& qh) { return inner_min(qh, target, r, spec, opts).value; };
    Vec best;
    if (p0.size() == 2) {
        // <l, q> = l0 + q (l1 - l0) >= t on an interval of the second coordinate
        const double qt = (t - l[0]) / (l[1] - l[0]);
        double lo = kFloor, hi = 1.0 - kFloor;
        if (l[1] > l[0]) lo = std::max(lo, qt);
        else hi = std::min(hi, qt);
        const LineResult lr = golden_minimize([&](double q) { return psi({1.0 - q, q}); }, lo, hi, 1e-15, 400);
        best = {1.0 - lr.x, lr.x};
    } else {
        Vec x = project_halfspace(target.values(), l, t);
        double fx = psi(x), step = 1.0;
        for (int it = 0; it < opts.max_outer; ++it) {
            const Vec g = inner_gradient(x, target, r, spec, opts);
            bool moved = false;
            for (int bt = 0; bt < 60; ++bt) {
                Vec y(x);
                for (std::size_t i = 0; i < y.size(); ++i) y[i] -= step * g[i];
                const Vec xn = project_halfspace(y, l, t);
                double d2 = 0.0;
                for (std::size_t i = 0; i < xn.size(); ++i) d2 += (xn[i] - x[i]) * (xn[i] - x[i]);
                const double fn = psi(xn);
                if (fn <= fx - 1e-4 / step * d2) {
                    moved = d2 > 1e-28;
                    x = xn;
                    fx = fn;
                    step *= 2.0;
                    break;
                }
                step *= 0.5;
            }
            if (!moved) break;
        }
        best = x;
    }
    const Inner in = inner_min(best, target, r, spec, opts);
    rep.value = in.value;
    rep.true_type = Dist::normalize(in.q);
    rep.perturbed_type = Dist::normalize(best);
    if (spec.is_kl()) rep.residual = kkt_residual(in.q, best, l);
    return rep;
}

SensitivityReport adv_lrt_sensitivity(const Dist& p0, const Dist& p1, double gamma, double alpha, int hyp,
                                      const SolveOptions& opts) {
    if (hyp != 0 && hyp != 1) throw UsageError("hypothesis must be 0 or 1");
    if (!(alpha > 0.0)) throw DomainError("curvature must be positive");
    const Multiplier m = lambda_for_threshold(p0, p1, gamma, opts);
    const Dist q = tilted_lrt(p0, p1, m.lambda);
    const Dist& ref = hyp == 0 ? p0 : p1;
    Vec lq(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) lq[i] = std::log(q[i] / ref[i]);
    SensitivityReport rep;
    rep.alpha = alpha;
    rep.matched_e = kl(q.values(), ref.values());
    rep.theta = 2.0 / alpha * variance(q.values(), lq);
    rep.branch = m.branch;
    return rep;
}

SandwichReport adv_vs_dist_bounds(const Dist& p0, const Dist& p1, double gamma, double alpha, int hyp,
                                  const SolveOptions& opts) {
    const SensitivityReport adv = adv_lrt_sensitivity(p0, p1, gamma, alpha, hyp, opts);
    const SensitivityReport dist = lrt_sensitivity(p0, p1, gamma, alpha, hyp, opts);
    const Multiplier m = lambda_for_threshold(p0, p1, gamma, opts);
    const Dist q = tilted_lrt(p0, p1, m.lambda);
    const Dist& ref = hyp == 0 ? p0 : p1;
    double ratio = kInf;
    for (std::size_t i = 0; i < q.size(); ++i) ratio = std::min(ratio, ref[i] / q[i]);
    SandwichReport s;
    s.theta_adv = adv.theta;
    s.theta_dist = dist.theta;
    s.matched_e = adv.matched_e;
    s.lower = ratio * dist.theta - 2.0 / alpha * adv.matched_e * adv.matched_e;
    return s;
}

AdvGlrtReport adv_glrt_worst_case(const Dist& p0, const Dist& p1, double gamma, double r,
                                  const DivergenceSpec& spec, const SolveOptions& opts) {
    require_adversarial_divergence(spec);
    if (!(gamma > 0.0)) throw DomainError("threshold must be positive");
    AdvGlrtReport rep;
    auto psi0 = [&](const Vec& qh) { return inner_min(qh, p0, r, spec, opts).value; };
    auto psi1 = [&](const Vec& qh) { return inner_min(qh, p1, r, spec, opts).value; };
    const SphereResult s0 = extremize_on_kl_sphere(psi0, p0, gamma, Mode::Min, opts);
    rep.e0 = s0.value;
    rep.perturbed0 = s0.point;
    if (p0.size() == 2) {
        const std::vector<double> pts = binary_kl_sphere(p0[1], gamma);
        double lo = pts.size() == 2 ? pts[0] : (pts[0] < p0[1] ? pts[0] : kFloor);
        double hi = pts.size() == 2 ? pts[1] : (pts[0] > p0[1] ? pts[0] : 1.0 - kFloor);
        lo = std::max(lo, kFloor);
        hi = std::min(hi, 1.0 - kFloor);
        const LineResult lr = golden_minimize([&](double q) { return psi1({1.0 - q, q}); }, lo, hi, 1e-15, 400);
        rep.e1 = lr.fx;
        rep.perturbed1 = Dist::normalize({1.0 - lr.x, lr.x});
    } else {
        const SeparableSet set = reverse_ball_set(p0, DivergenceSpec::kl(), gamma);
        auto grad = [&](const Vec& qh) { return inner_gradient(qh, p1, r, spec, opts); };
        const MinimizeResult m = minimize_over_set(psi1, grad, set, p0.values(), opts);
        rep.e1 = m.value;
        rep.perturbed1 = Dist::normalize(m.x);
    }
    return rep;
}

AdvGlrtSensitivity adv_glrt_sensitivity(const Dist& p0, const Dist& p1, double gamma, double alpha,
                                        const SolveOptions& opts) {
    if (!(alpha > 0.0)) throw DomainError("curvature must be positive");
    if (!(gamma > 0.0)) throw DomainError("threshold must be positive");
    AdvGlrtSensitivity s;
    s.alpha = alpha;
    s.e0 = gamma;
    auto var_log = [&](const Vec& q) {
        Vec lq(q.size(), 0.0);
        for (std::size_t i = 0; i < q.size(); ++i)
            if (q[i] > 0.0) lq[i] = std::log(q[i] / p0[i]);
        return variance(q, lq);
    };
    s.theta0 = 2.0 / alpha * extremize_on_kl_sphere(var_log, p0, gamma, Mode::Max, opts).value;
    const GlrtSide e1 = glrt_e1(p0, p1, gamma, opts);
    s.e1 = e1.e;
    Vec lq(p1.size());
    for (std::size_t i = 0; i < p1.size(); ++i) lq[i] = std::log(e1.achiever[i] / p1[i]);
    s.theta1 = 2.0 / alpha * variance(e1.achiever.values(), lq);
    return s;
}

AdvSprtBounds adv_sprt_bounds(const Dist& p0, const Dist& p1, double r, double alpha, double n) {
    if (!(alpha > 0.0)) throw DomainError("curvature must be positive");
    if (!(r >= 0.0)) throw DomainError("radius must be nonnegative");
    const std::size_t k = p0.size();
    Vec l10(k), l01(k);
    for (std::size_t i = 0; i < k; ++i) {
        l10[i] = std::log(p1[i] / p0[i]);
        l01[i] = -l10[i];
    }
    const double d01 = kl(p0.values(), p1.values()), d10 = kl(p1.values(), p0.values());
    AdvSprtBounds b;
    b.theta0 = 2.0 / alpha * variance(p1.values(), l10);
    b.theta1 = 2.0 / alpha * variance(p0.values(), l01);
    b.factor0 = d10 - 2.0 * std::sqrt(r * b.theta0);
    b.factor1 = d01 - 2.0 * std::sqrt(r * b.theta1);
    b.vacuous = b.factor0 <= 0.0 || b.factor1 <= 0.0;
    b.product_bound = std::max(0.0, b.factor0) * std::max(0.0, b.factor1);
    b.tau0 = n * (1.0 + std::sqrt(b.theta1 * r) / d01);
    b.tau1 = n * (1.0 + std::sqrt(b.theta0 * r) / d10);
    return b;
}

AdvSprtSim simulate_sprt_adversarial(const Dist& p0, const Dist& p1, double gamma0, double gamma1, double r,
                                     std::uint64_t trials, std::uint64_t seed, std::uint64_t step_cap) {
    if (p0.size() != 2 || p1.size() != 2) throw DomainError("the greedy adversary is implemented for binary alphabets");
    if (!(gamma0 > 0.0) || !(gamma1 > 0.0)) throw DomainError("thresholds must be positive");
    const double l0 = std::log(p0[0] / p1[0]), l1 = std::log(p0[1] / p1[1]);
    auto bkl = [](double t, double u) {
        double s = 0.0;
        if (t > 0.0) s += t * std::log(t / u);
        if (t < 1.0) s += (1.0 - t) * std::log((1.0 - t) / (1.0 - u));
        return s;
    };
    // Endpoint of {u : D(Bern(t) || Bern(u)) <= r} on the side given by `up`.
    auto endpoint = [&](double t, bool up) {
        if (r <= 0.0) return t;
        auto f = [&](double u) { return bkl(t, u) - r; };
        if (up) {
            if (t >= 1.0) return 1.0;
            if (t <= 0.0) return 1.0 - std::exp(-r);
            return bisect(f, t, 1.0 - 1e-16, 0.0).x;
        }
        if (t <= 0.0) return 0.0;
        if (t >= 1.0) return std::exp(-r);
        return bisect(f, 1e-300, t, 0.0).x;
    };
    auto run = [&](const Dist& truth, int true_hyp) {
        SimResult res;
        res.trials = trials;
        std::uint64_t tau = 0;
        unsigned __int128 tau2 = 0;
        // Raising the second coordinate moves the statistic by (l1 - l0).
        const bool push_up = (true_hyp == 0) == (l1 < l0);
        for (std::uint64_t trial = 0; trial < trials; ++trial) {
            TrialStream rng(seed, trial);
            std::uint64_t ones = 0, n = 0;
            int decision = -1;
            while (n < step_cap) {
                if (rng.uniform() >= truth[0]) ++ones;
                ++n;
                const double t = static_cast<double>(ones) / static_cast<double>(n);
                const double u = endpoint(t, push_up);
                const double s = static_cast<double>(n) * ((1.0 - u) * l0 + u * l1);
                if (s >= gamma0) {
                    decision = 0;
                    break;
                }
                if (s <= -gamma1) {
                    decision = 1;
                    break;
                }
            }
            if (decision < 0) {
                ++res.censored;
                continue;
            }
            (decision == 0 ? res.decided0 : res.decided1)++;
            if (decision != true_hyp) ++res.errors;
            tau += n;
            tau2 += static_cast<unsigned __int128>(n) * n;
        }
        res.err_rate = static_cast<double>(res.errors) / static_cast<double>(trials);
        const std::uint64_t done = trials - res.censored;
        if (done > 0) {
            res.mean_tau = static_cast<double>(tau) / static_cast<double>(done);
            res.var_tau = static_cast<double>(static_cast<long double>(tau2) / done -
                                              static_cast<long double>(res.mean_tau) * res.mean_tau);
        }
        return res;
    };
    return {run(p0, 0), run(p1, 1)};
}

}  // namespace errexp
