#include "errexp/lrt.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include "errexp/errors.hpp"

namespace errexp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_hyp(int hyp) {
    if (hyp != 0 && hyp != 1) throw UsageError("hypothesis must be 0 or 1");
}

double log_mgf(const Vec& p, const Vec& stat, double lambda) {
    double mx = -kInf;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] > 0.0) mx = std::max(mx, std::log(p[i]) + lambda * stat[i]);
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] > 0.0) s += std::exp(std::log(p[i]) + lambda * stat[i] - mx);
    return mx + std::log(s);
}

struct OneSide {
    double e;
    Dist achiever;
    double lambda;
    Branch branch;
};

OneSide one_side(const Dist& p, const Dist& ph0, const Dist& ph1, double gamma_hat, int hyp,
                 const SolveOptions& opts) {
    const Multiplier m = lambda_for_mismatched_threshold(p, ph0, ph1, gamma_hat, hyp, opts);
    if (m.branch == Branch::Zero) return {0.0, p, 0.0, Branch::Zero};
    if (m.branch == Branch::Infinite) return {kInf, p, kInf, Branch::Infinite};
    Dist q = mismatched_tilted(p, ph0, ph1, m.lambda, hyp);
    return {kl(q.values(), p.values()), q, m.lambda, Branch::Interior};
}

Vec signed_stat(const Dist& ph0, const Dist& ph1, int hyp) {
    Vec s = log_ratio(ph0, ph1);
    if (hyp == 1)
        for (double& v : s) v = -v;
    return s;
}

// Closest point to `center` in KL-ball terms on the segment toward q at radius r.
Vec mix_to_radius(const Vec& center, const Vec& q, double r) {
    auto at = [&](double b) {
        Vec p(center.size());
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = b * q[i] + (1.0 - b) * center[i];
        return p;
    };
    if (kl(center, q) <= r) return q;
    const double b = bisect([&](double t) { return kl(center, at(t)) - r; }, 0.0, 1.0, 0.0).x;
    return at(b);
}

}  // namespace

ExponentReport mismatched_exponents(const Dist& p0, const Dist& p1, const Dist& ph0, const Dist& ph1,
                                    double gamma_hat, const SolveOptions& opts) {
    require_same_size(p0.values(), p1.values(), "mismatched_exponents");
    require_same_size(p0.values(), ph0.values(), "mismatched_exponents");
    require_same_size(p0.values(), ph1.values(), "mismatched_exponents");
    const OneSide s0 = one_side(p0, ph0, ph1, gamma_hat, 0, opts);
    const OneSide s1 = one_side(p1, ph0, ph1, gamma_hat, 1, opts);
    ExponentReport r;
    r.e0 = s0.e;
    r.e1 = s1.e;
    r.achiever0 = s0.achiever;
    r.achiever1 = s1.achiever;
    r.multiplier0 = s0.lambda;
    r.multiplier1 = s1.lambda;
    r.branch0 = s0.branch;
    r.branch1 = s1.branch;
    r.dual0 = dual_exponent(p0.values(), signed_stat(ph0, ph1, 0), gamma_hat);
    r.dual1 = dual_exponent(p1.values(), signed_stat(ph0, ph1, 1), -gamma_hat);
    return r;
}

ExponentReport matched_exponents(const Dist& p0, const Dist& p1, double gamma, const SolveOptions& opts) {
    require_same_size(p0.values(), p1.values(), "matched_exponents");
    const double lo = -kl(p0.values(), p1.values());
    const double hi = kl(p1.values(), p0.values());
    if (gamma < lo || gamma > hi) return mismatched_exponents(p0, p1, p0, p1, gamma, opts);
    const Multiplier m = lambda_for_threshold(p0, p1, gamma, opts);
    const Dist q = tilted_lrt(p0, p1, m.lambda);
    ExponentReport r;
    r.e0 = kl(q.values(), p0.values());
    r.e1 = kl(q.values(), p1.values());
    r.achiever0 = q;
    r.achiever1 = q;
    r.multiplier0 = m.lambda;
    r.multiplier1 = 1.0 - m.lambda;
    r.branch0 = m.lambda <= 0.0 ? Branch::Zero : Branch::Interior;
    r.branch1 = m.lambda >= 1.0 ? Branch::Zero : Branch::Interior;
    r.dual0 = dual_exponent(p0.values(), signed_stat(p0, p1, 0), gamma);
    r.dual1 = dual_exponent(p1.values(), signed_stat(p0, p1, 1), -gamma);
    return r;
}

double dual_exponent(const Vec& p, const Vec& stat, double target) {
    if (expectation(p, stat) >= target) return 0.0;
    double smax = -kInf;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] > 0.0) smax = std::max(smax, stat[i]);
    if (target > smax + 1e-14 * std::max(1.0, std::abs(smax))) return kInf;
    auto phi = [&](double lam) { return lam * target - log_mgf(p, stat, lam); };
    // The objective is concave; walk out geometrically until it turns down.
    double a = 0.0, b = 1.0, fb = phi(b);
    double c = 2.0, fc = phi(c);
    while (fc > fb) {
        a = b;
        b = c;
        fb = fc;
        c *= 2.0;
        if (c > 1e12) return phi(c);
        fc = phi(c);
    }
    auto neg = [&](double lam) { return -phi(lam); };
    const LineResult lr = golden_minimize(neg, a, c, 1e-13 * std::max(1.0, c), 400);
    return -lr.fx;
}

double normal_upper_quantile(double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("error level must lie in (0, 1)");
    return boost::math::quantile(boost::math::complement(boost::math::normal_distribution<double>(), eps));
}

SteinThreshold stein_threshold(const Dist& p0, const Dist& ph0, const Dist& ph1, double n, double eps) {
    if (!(n >= 1.0)) throw DomainError("sample size must be at least 1");
    const double q = normal_upper_quantile(eps);
    const Vec l = log_ratio(ph0, ph1);
    SteinThreshold s;
    s.first_order = kl(p0.values(), ph0.values()) - kl(p0.values(), ph1.values());
    s.variance = variance(p0.values(), l);
    s.degenerate = !(s.variance > 1e-300);
    s.gamma = s.first_order + (s.degenerate ? 0.0 : std::sqrt(s.variance / n) * q);
    return s;
}

double stein_exponent(const Dist& p0, const Dist& p1, const Dist& ph0, const Dist& ph1,
                      const SolveOptions& opts) {
    const double g = kl(p0.values(), ph0.values()) - kl(p0.values(), ph1.values());
    return one_side(p1, ph0, ph1, g, 1, opts).e;
}

WorstCaseReport worst_case_exponent(const Dist& ph0, const Dist& ph1, double gamma_hat, const Ball& ball,
                                    int hyp, const SolveOptions& opts) {
    check_hyp(hyp);
    if (!ball.spec.is_kl()) return worst_case_exponent_fw(ph0, ph1, gamma_hat, ball, hyp, opts);
    const Vec stat = signed_stat(ph0, ph1, hyp);
    const double target = hyp == 0 ? gamma_hat : -gamma_hat;
    const SeparableSet set = ball_set(ball);
    WorstCaseReport rep;
    rep.method = "alternation";
    {
        Vec neg(stat);
        for (double& v : neg) v = -v;
        const Vec far = set.linear_minimizer(neg);
        if (expectation(far, stat) >= target) {
            rep.worst = Dist::normalize(far);
            rep.achiever = rep.worst;
            rep.branch = Branch::Zero;
            return rep;
        }
    }
    const Vec& c = ball.center.values();
    Dist p = ball.center;
    double prev = kInf;
    for (int it = 1; it <= opts.max_outer; ++it) {
        rep.iterations = it;
        const OneSide s = one_side(p, ph0, ph1, gamma_hat, hyp, opts);
        if (s.branch != Branch::Interior) {
            rep.value = s.e;
            rep.worst = p;
            rep.achiever = s.achiever;
            rep.branch = s.branch;
            return rep;
        }
        const Vec next = mix_to_radius(c, s.achiever.values(), ball.radius);
        double move = 0.0;
        for (std::size_t i = 0; i < next.size(); ++i) move = std::max(move, std::abs(next[i] - p[i]));
        p = Dist::normalize(next);
        const double value = kl(s.achiever.values(), p.values());
        rep.value = value;
        rep.achiever = s.achiever;
        if (move <= 1e-14 || std::abs(prev - value) <= 1e-15 * std::max(1.0, value)) {
            const OneSide fin = one_side(p, ph0, ph1, gamma_hat, hyp, opts);
            rep.value = fin.e;
            rep.achiever = fin.achiever;
            rep.worst = p;
            return rep;
        }
        prev = value;
    }
    throw SolverError("worst-case alternation did not settle", p.values(), std::abs(prev - rep.value));
}

WorstCaseReport worst_case_exponent_fw(const Dist& ph0, const Dist& ph1, double gamma_hat, const Ball& ball,
                                       int hyp, const SolveOptions& opts) {
    check_hyp(hyp);
    const Vec stat = signed_stat(ph0, ph1, hyp);
    const double target = hyp == 0 ? gamma_hat : -gamma_hat;
    const SeparableSet set = ball_set(ball);
    WorstCaseReport rep;
    rep.method = "frank-wolfe";
    {
        Vec neg(stat);
        for (double& v : neg) v = -v;
        const Vec far = set.linear_minimizer(neg);
        if (expectation(far, stat) >= target) {
            rep.worst = Dist::normalize(far);
            rep.achiever = rep.worst;
            rep.branch = Branch::Zero;
            return rep;
        }
    }
    auto f = [&](const Vec& p) { return one_side(Dist::normalize(p), ph0, ph1, gamma_hat, hyp, opts).e; };
    auto grad = [&](const Vec& p) {
        const OneSide s = one_side(Dist::normalize(p), ph0, ph1, gamma_hat, hyp, opts);
        Vec g(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) g[i] = -s.achiever[i] / p[i];
        return g;
    };
    const MinimizeResult m = minimize_over_set(f, grad, set, ball.center.values(), opts);
    rep.worst = Dist::normalize(m.x);
    const OneSide s = one_side(rep.worst, ph0, ph1, gamma_hat, hyp, opts);
    rep.value = s.e;
    rep.achiever = s.achiever;
    rep.branch = s.branch;
    rep.iterations = m.iterations;
    return rep;
}

double SensitivityReport::deduction(double r) const { return std::sqrt(std::max(r, 0.0) * theta); }

double SensitivityReport::approx(double r) const { return std::max(0.0, matched_e - deduction(r)); }

SensitivityReport lrt_sensitivity(const Dist& ph0, const Dist& ph1, double gamma_hat, double alpha, int hyp,
                                  const SolveOptions& opts) {
    check_hyp(hyp);
    if (!(alpha > 0.0)) throw DomainError("curvature must be positive");
    const Multiplier m = lambda_for_threshold(ph0, ph1, gamma_hat, opts);
    const Dist q = tilted_lrt(ph0, ph1, m.lambda);
    const Dist& ref = hyp == 0 ? ph0 : ph1;
    SensitivityReport rep;
    rep.alpha = alpha;
    rep.matched_e = kl(q.values(), ref.values());
    rep.theta = 2.0 / alpha * chi_squared(q.values(), ref.values());
    rep.branch = m.branch;
    if (m.lambda <= 0.0 && hyp == 0) rep.branch = Branch::Zero;
    if (m.lambda >= 1.0 && hyp == 1) rep.branch = Branch::Zero;
    return rep;
}

}  // namespace errexp
