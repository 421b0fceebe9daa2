#include "errexp/glrt.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

#include "errexp/errors.hpp"
#include "errexp/tilted.hpp"

namespace errexp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kFaceEnumerationLimit = 12;

Vec restrict_normalized(const Vec& p, unsigned mask, double& mass) {
    Vec q(p.size(), 0.0);
    mass = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (mask >> i & 1u) {
            q[i] = p[i];
            mass += p[i];
        }
    for (double& v : q) v /= mass;
    return q;
}

// Roots of D(Q_t || base) = level on the family Q_t ~ base * exp(t * stat),
// restricted to the support of base. The divergence is unimodal in t with
// its minimum 0 at t = 0, so there is at most one root on each side.
std::vector<Vec> family_sphere_points(const Vec& base, const Vec& stat, double level) {
    std::vector<Vec> out;
    double smin = kInf, smax = -kInf;
    for (std::size_t i = 0; i < base.size(); ++i)
        if (base[i] > 0.0) {
            smin = std::min(smin, stat[i]);
            smax = std::max(smax, stat[i]);
        }
    Vec dir_stat = stat;
    if (!(smax - smin > 1e-14)) {
        // The objective is flat on this face, so any sphere point will do:
        // tilt toward the lightest atom, which reaches the largest divergence.
        std::size_t light = 0;
        std::size_t support = 0;
        for (std::size_t i = 0; i < base.size(); ++i)
            if (base[i] > 0.0) {
                ++support;
                if (base[light] <= 0.0 || base[i] < base[light]) light = i;
            }
        if (support < 2) return out;
        dir_stat.assign(base.size(), 0.0);
        dir_stat[light] = 1.0;
    }
    auto q = [&](double t) { return exponential_tilt(base, dir_stat, t).values(); };
    auto h = [&](double t) { return kl(q(t), base) - level; };
    for (double dir : {1.0, -1.0}) {
        double hi = dir;
        bool ok = true;
        while (h(hi) < 0.0) {
            hi *= 2.0;
            if (std::abs(hi) > 1e9) {
                ok = false;
                break;
            }
        }
        if (!ok) continue;
        const double t = bisect(h, 0.0, hi, 1e-15).x;
        out.push_back(q(t));
    }
    return out;
}

}  // namespace

GlrtSide glrt_e1(const Dist& ph0, const Dist& p1, double gamma_hat, const SolveOptions& opts) {
    require_same_size(ph0.values(), p1.values(), "glrt_e1");
    const Multiplier m = hoeffding_s_for_threshold(ph0, p1, gamma_hat, opts);
    if (m.branch == Branch::Zero) return {0.0, p1, 0.0, Branch::Zero};
    const Dist q = m.lambda >= 1.0 ? ph0 : tilted_hoeffding(ph0, p1, m.lambda);
    return {kl(q.values(), p1.values()), q, m.lambda, Branch::Interior};
}

GlrtSide glrt_e0(const Dist& p0, const Dist& ph0, double gamma_hat, const SolveOptions& opts) {
    require_same_size(p0.values(), ph0.values(), "glrt_e0");
    if (gamma_hat < 0.0) throw DomainError("threshold must be nonnegative");
    const std::size_t k = p0.size();
    if (kl(p0.values(), ph0.values()) >= gamma_hat) return {0.0, p0, 0.0, Branch::Zero};
    if (gamma_hat > -std::log(ph0.min())) return {kInf, p0, 0.0, Branch::Infinite};

    if (k > kFaceEnumerationLimit) {
        auto f = [&](const Vec& q) { return kl(q, p0.values()); };
        SphereResult s = extremize_on_kl_sphere(f, ph0, gamma_hat, Mode::Min, opts);
        return {s.value, s.point, 0.0, Branch::Interior};
    }
    Vec stat(k);
    for (std::size_t i = 0; i < k; ++i) stat[i] = std::log(p0[i] / ph0[i]);
    GlrtSide best{kInf, p0, 0.0, Branch::Interior};
    auto consider = [&](const Vec& q) {
        if (kl(q, ph0.values()) < gamma_hat * (1.0 - 1e-12)) return;
        const double v = kl(q, p0.values());
        if (v < best.e) best = {v, Dist::normalize(q), 0.0, Branch::Interior};
    };
    const unsigned full = (1u << k) - 1u;
    for (unsigned mask = 1; mask <= full; ++mask) {
        double a = 0.0, b = 0.0;
        const Vec p0s = restrict_normalized(p0.values(), mask, a);
        const Vec base = restrict_normalized(ph0.values(), mask, b);
        // On this face D(Q || ph0) = D(Q || base) - log b.
        const double level = gamma_hat + std::log(b);
        if (kl(p0s, base) >= level) {
            consider(p0s);
            continue;
        }
        for (const Vec& q : family_sphere_points(base, stat, level)) consider(q);
    }
    return best;
}

double glrt_e0_upper(const Dist& p0, const Dist& ph0, double gamma_hat) {
    if (gamma_hat < 0.0) throw DomainError("threshold must be nonnegative");
    return std::max(0.0, gamma_hat - std::sqrt(2.0 * gamma_hat) * total_variation(p0.values(), ph0.values()));
}

QcqpReport glrt_e0_small_gamma(const Dist& p0, const Dist& ph0, double gamma_hat) {
    require_same_size(p0.values(), ph0.values(), "glrt_e0_small_gamma");
    if (!(gamma_hat > 0.0)) throw DomainError("threshold must be positive");
    const std::size_t k = p0.size();
    const Eigen::Index m = static_cast<Eigen::Index>(k - 1);
    // Coordinates are the first k-1 masses; the last is implied.
    auto metric = [&](const Dist& c) {
        Eigen::MatrixXd h = Eigen::MatrixXd::Constant(m, m, 1.0 / c[k - 1]);
        for (Eigen::Index i = 0; i < m; ++i) h(i, i) += 1.0 / c[static_cast<std::size_t>(i)];
        return h;
    };
    const Eigen::MatrixXd H = metric(p0), Hh = metric(ph0);
    Eigen::VectorXd p(m), ph(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        p(i) = p0[static_cast<std::size_t>(i)];
        ph(i) = ph0[static_cast<std::size_t>(i)];
    }
    auto quad = [](const Eigen::MatrixXd& A, const Eigen::VectorXd& d) { return 0.5 * d.dot(A * d); };

    QcqpReport rep;
    rep.in_window = gamma_hat <= 0.1 && kl(p0.values(), ph0.values()) < gamma_hat;
    if (quad(Hh, p - ph) >= gamma_hat) {
        rep.inactive = true;
        return rep;
    }
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(H, Hh, Eigen::EigenvaluesOnly);
    const double lam_max = ges.eigenvalues().minCoeff();
    auto dual = [&](double lam) {
        const Eigen::MatrixXd A = H - lam * Hh;
        const Eigen::VectorXd rhs = H * p - lam * (Hh * ph);
        const Eigen::VectorXd q = A.ldlt().solve(rhs);
        return quad(H, q - p) - lam * (quad(Hh, q - ph) - gamma_hat);
    };
    const LineResult lr = golden_minimize([&](double l) { return -dual(l); }, 0.0, lam_max * (1.0 - 1e-12),
                                          1e-15 * std::max(1.0, lam_max), 400);
    rep.value = -lr.fx;
    rep.multiplier = lr.x;
    return rep;
}

SensitivityReport glrt_sensitivity(const Dist& ph0, double gamma_hat, double alpha, const SolveOptions& opts) {
    if (!(alpha > 0.0)) throw DomainError("curvature must be positive");
    if (!(gamma_hat > 0.0)) throw DomainError("threshold must be positive");
    auto chi = [&](const Vec& q) { return chi_squared(q, ph0.values()); };
    const SphereResult s = extremize_on_kl_sphere(chi, ph0, gamma_hat, Mode::Max, opts);
    SensitivityReport rep;
    rep.alpha = alpha;
    rep.matched_e = gamma_hat;
    rep.theta = 2.0 / alpha * s.value;
    return rep;
}

RatioBounds glrt_sensitivity_ratio_bounds(const Dist& ph0, double gamma_hat) {
    if (!(gamma_hat > 0.0)) throw DomainError("threshold must be positive");
    const double mn = ph0.min();
    RatioBounds b;
    b.h = std::min(1.0, gamma_hat + mn) / mn;
    const double e = b.h - 1.0;
    double denom;
    if (std::abs(e) < 1e-4)
        denom = e * e * (0.5 - e / 6.0 + e * e / 12.0);
    else
        denom = b.h * std::log(b.h) + 1.0 - b.h;
    b.upper_tight = e == 0.0 ? std::sqrt(2.0) : std::sqrt(e * e / denom);
    b.upper_weak = std::sqrt(4.0 / mn);
    return b;
}

double lrt_threshold_for_type1(const Dist& ph0, const Dist& ph1, double target, const SolveOptions& opts) {
    const double lo = -kl(ph0.values(), ph1.values());
    const double hi = kl(ph1.values(), ph0.values());
    if (!(target >= 0.0 && target < hi)) throw DomainError("type-I exponent target out of reach");
    if (target == 0.0) return lo;
    auto h = [&](double g) { return matched_exponents(ph0, ph1, g, opts).e0 - target; };
    return bisect(h, lo, hi, 1e-15).x;
}

double kl_to_ball(const Vec& q, const Ball& ball, Vec* argmin, const SolveOptions& opts) {
    const Vec& c = ball.center.values();
    if (ball.contains(q, 0.0)) {
        if (argmin) *argmin = q;
        return 0.0;
    }
    if (ball.spec.is_kl()) {
        auto at = [&](double b) {
            Vec p(c.size());
            for (std::size_t i = 0; i < p.size(); ++i) p[i] = b * q[i] + (1.0 - b) * c[i];
            return p;
        };
        const double b = bisect([&](double t) { return kl(c, at(t)) - ball.radius; }, 0.0, 1.0, 0.0).x;
        const Vec p = at(b);
        if (argmin) *argmin = p;
        return kl(q, p);
    }
    auto f = [&](const Vec& p) { return kl(q, p); };
    auto grad = [&](const Vec& p) {
        Vec g(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) g[i] = q[i] > 0.0 ? -q[i] / p[i] : 0.0;
        return g;
    };
    const MinimizeResult m = minimize_over_ball(f, grad, ball, opts);
    if (argmin) *argmin = m.x;
    return m.value;
}

WorstCaseReport glrt_worst_case_e0(const Dist& ph0, double gamma_hat, const Ball& ball, const SolveOptions& opts) {
    if (!(gamma_hat > 0.0)) throw DomainError("threshold must be positive");
    WorstCaseReport rep;
    rep.method = "sphere";
    auto h = [&](const Vec& q) { return kl_to_ball(q, ball, nullptr, opts); };
    const SphereResult s = extremize_on_kl_sphere(h, ph0, gamma_hat, Mode::Min, opts);
    Vec worst;
    rep.value = kl_to_ball(s.point.values(), ball, &worst, opts);
    rep.worst = Dist::normalize(worst);
    rep.achiever = s.point;
    rep.branch = rep.value <= 0.0 ? Branch::Zero : Branch::Interior;
    return rep;
}

WorstCaseReport glrt_worst_case_e1(const Dist& ph0, double gamma_hat, const Ball& ball, const SolveOptions& opts) {
    WorstCaseReport rep;
    rep.method = "frank-wolfe";
    auto f = [&](const Vec& p) { return glrt_e1(ph0, Dist::normalize(p), gamma_hat, opts).e; };
    auto grad = [&](const Vec& p) {
        const GlrtSide s = glrt_e1(ph0, Dist::normalize(p), gamma_hat, opts);
        Vec g(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) g[i] = -s.achiever[i] / p[i];
        return g;
    };
    const MinimizeResult m = minimize_over_ball(f, grad, ball, opts);
    rep.worst = Dist::normalize(m.x);
    const GlrtSide s = glrt_e1(ph0, rep.worst, gamma_hat, opts);
    rep.value = s.e;
    rep.achiever = s.achiever;
    rep.branch = s.branch;
    rep.iterations = m.iterations;
    return rep;
}

}  // namespace errexp
