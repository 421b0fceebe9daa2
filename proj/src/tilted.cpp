#include "errexp/tilted.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "errexp/divergences.hpp"
#include "errexp/errors.hpp"

namespace errexp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLambdaCap = 1e12;

// lambda >= 0 with E_{p e^{lambda s}}[s] = target; the mean is nondecreasing in lambda.
Multiplier tilt_root(const Vec& p, const Vec& stat, double target, const SolveOptions& opts) {
    const double m0 = expectation(p, stat);
    if (m0 >= target) return {0.0, Branch::Zero};
    double smax = -kInf;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] > 0.0) smax = std::max(smax, stat[i]);
    const double slack = 1e-14 * std::max(1.0, std::abs(smax));
    if (target > smax + slack) return {kInf, Branch::Infinite};
    auto g = [&](double lam) { return expectation(exponential_tilt(p, stat, lam).values(), stat) - target; };
    double lo = 0.0, hi = 1.0;
    while (g(hi) < 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > kLambdaCap) return {kLambdaCap, Branch::Interior};
    }
    return {bisect(g, lo, hi, opts.tol_root * 1e-3).x, Branch::Interior};
}

void check_pair(const Dist& a, const Dist& b, const char* what) { require_same_size(a.values(), b.values(), what); }

}  // namespace

const char* branch_name(Branch b) {
    switch (b) {
        case Branch::Interior: return "interior";
        case Branch::Zero: return "zero";
        case Branch::Infinite: return "infinite";
    }
    return "?";
}

Dist exponential_tilt(const Vec& p, const Vec& stat, double lambda) {
    Vec lw(p.size(), -kInf);
    double mx = -kInf;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        lw[i] = std::log(p[i]) + lambda * stat[i];
        mx = std::max(mx, lw[i]);
    }
    Vec w(p.size(), 0.0);
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] > 0.0) w[i] = std::exp(lw[i] - mx);
    return Dist::normalize(std::move(w));
}

Vec log_ratio(const Dist& ph0, const Dist& ph1) {
    check_pair(ph0, ph1, "log_ratio");
    Vec l(ph0.size());
    for (std::size_t i = 0; i < l.size(); ++i) {
        if (!(ph0[i] > 0.0) || !(ph1[i] > 0.0)) throw DomainError("log-likelihood ratio needs full support");
        l[i] = std::log(ph1[i] / ph0[i]);
    }
    return l;
}

double lrt_statistic(const Dist& q, const Dist& p0, const Dist& p1) {
    return expectation(q.values(), log_ratio(p0, p1));
}

Dist tilted_lrt(const Dist& p0, const Dist& p1, double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw DomainError("tilt parameter must lie in [0, 1]");
    return exponential_tilt(p0.values(), log_ratio(p0, p1), lambda);
}

Multiplier lambda_for_threshold(const Dist& p0, const Dist& p1, double gamma, const SolveOptions& opts) {
    const Vec l = log_ratio(p0, p1);
    auto g = [&](double lam) { return expectation(exponential_tilt(p0.values(), l, lam).values(), l) - gamma; };
    const double g0 = g(0.0), g1 = g(1.0);
    if (g0 >= 0.0) return {0.0, g0 <= opts.tol_root ? Branch::Interior : Branch::Zero};
    if (g1 <= 0.0) return {1.0, g1 >= -opts.tol_root ? Branch::Interior : Branch::Zero};
    return {bisect(g, 0.0, 1.0, opts.tol_root * 1e-3).x, Branch::Interior};
}

Dist tilted_hoeffding(const Dist& p0, const Dist& p1, double s) {
    if (!(s >= 0.0 && s < 1.0)) throw DomainError("Hoeffding tilt parameter must lie in [0, 1)");
    return exponential_tilt(p1.values(), log_ratio(p1, p0), s);
}

double s_from_mu_plus(double mu) {
    if (!(mu >= 0.0)) throw DomainError("multiplier must be nonnegative");
    return mu / (1.0 + mu);
}

double s_from_mu_minus(double mu) {
    if (!(mu >= 0.0 && mu < 1.0)) throw DomainError("multiplier must lie in [0, 1)");
    // exponents mu/(1-mu) and 1/(1-mu) have ratio mu : 1
    return mu / (1.0 + mu);
}

Multiplier hoeffding_s_for_threshold(const Dist& p0, const Dist& p1, double gamma, const SolveOptions& opts) {
    check_pair(p0, p1, "hoeffding_s_for_threshold");
    if (gamma < 0.0) throw DomainError("threshold must be nonnegative");
    const Vec stat = log_ratio(p1, p0);
    auto q = [&](double s) { return s >= 1.0 ? p0 : exponential_tilt(p1.values(), stat, s); };
    auto h = [&](double s) { return kl(q(s).values(), p0.values()) - gamma; };
    if (h(0.0) <= 0.0) return {0.0, Branch::Zero};
    if (gamma == 0.0) return {1.0, Branch::Interior};
    return {bisect(h, 0.0, 1.0, opts.tol_root * 1e-3).x, Branch::Interior};
}

Dist mismatched_tilted(const Dist& p_true, const Dist& ph0, const Dist& ph1, double lambda, int hypothesis) {
    if (!(lambda >= 0.0)) throw DomainError("tilt parameter must be nonnegative");
    if (hypothesis != 0 && hypothesis != 1) throw UsageError("hypothesis must be 0 or 1");
    check_pair(p_true, ph0, "mismatched_tilted");
    Vec stat = log_ratio(ph0, ph1);
    if (hypothesis == 1)
        for (double& v : stat) v = -v;
    return exponential_tilt(p_true.values(), stat, lambda);
}

Multiplier lambda_for_mismatched_threshold(const Dist& p_true, const Dist& ph0, const Dist& ph1,
                                           double gamma_hat, int hypothesis, const SolveOptions& opts) {
    if (hypothesis != 0 && hypothesis != 1) throw UsageError("hypothesis must be 0 or 1");
    check_pair(p_true, ph0, "lambda_for_mismatched_threshold");
    Vec stat = log_ratio(ph0, ph1);
    double target = gamma_hat;
    if (hypothesis == 1) {
        for (double& v : stat) v = -v;
        target = -gamma_hat;
    }
    return tilt_root(p_true.values(), stat, target, opts);
}

}  // namespace errexp
