#include "errexp/divergences.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "errexp/errors.hpp"

namespace errexp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void support_error(const char* what, std::size_t i) {
    std::ostringstream os;
    os << what << ": second argument has zero mass at symbol " << i << " where the first has mass";
    throw DomainError(os.str());
}

}  // namespace

DivergenceSpec DivergenceSpec::kl() { return {}; }

DivergenceSpec DivergenceSpec::renyi(double order) {
    if (!(order > 0.0) || !std::isfinite(order)) throw DomainError("Renyi order must be positive and finite");
    DivergenceSpec s;
    s.kind = order == 1.0 ? DivKind::Kl : DivKind::Renyi;
    s.order = order;
    s.label = "renyi";
    return s;
}

DivergenceSpec DivergenceSpec::chi_squared() {
    DivergenceSpec s;
    s.kind = DivKind::ChiSquared;
    s.f = [](double t) { return (t - 1.0) * (t - 1.0); };
    s.label = "chi2";
    return s;
}

DivergenceSpec DivergenceSpec::squared_hellinger() {
    DivergenceSpec s;
    s.kind = DivKind::SquaredHellinger;
    s.f = [](double t) {
        const double r = std::sqrt(t) - 1.0;
        return r * r;
    };
    s.label = "hellinger";
    return s;
}

DivergenceSpec DivergenceSpec::custom(std::string label, std::function<double(double)> f, double curvature) {
    if (!f) throw UsageError("custom divergence needs a generator");
    if (std::abs(f(1.0)) > 1e-12) throw DomainError("generator must vanish at 1");
    if (!(curvature > 0.0)) throw DomainError("curvature must be positive");
    DivergenceSpec s;
    s.kind = DivKind::CustomF;
    s.f = std::move(f);
    s.custom_curvature = curvature;
    s.label = std::move(label);
    return s;
}

double DivergenceSpec::curvature() const {
    switch (kind) {
        case DivKind::Kl: return 1.0;
        case DivKind::Renyi: return order;
        case DivKind::ChiSquared: return 2.0;
        case DivKind::SquaredHellinger: return 0.5;
        case DivKind::CustomF: return custom_curvature;
    }
    return 1.0;
}

std::string DivergenceSpec::name() const {
    if (kind == DivKind::Renyi) {
        std::ostringstream os;
        os << "renyi:" << order;
        return os.str();
    }
    return label;
}

DivergenceSpec parse_divergence(const std::string& text) {
    if (text == "kl") return DivergenceSpec::kl();
    if (text == "chi2" || text == "chi_squared") return DivergenceSpec::chi_squared();
    if (text == "hellinger" || text == "squared_hellinger") return DivergenceSpec::squared_hellinger();
    const std::string prefix = "renyi:";
    if (text.rfind(prefix, 0) == 0) {
        std::size_t used = 0;
        double order = 0.0;
        try {
            order = std::stod(text.substr(prefix.size()), &used);
        } catch (const std::exception&) {
            throw UsageError("bad Renyi order in '" + text + "'");
        }
        if (used != text.size() - prefix.size()) throw UsageError("bad Renyi order in '" + text + "'");
        return DivergenceSpec::renyi(order);
    }
    throw UsageError("unknown divergence '" + text + "' (expected kl, chi2, hellinger or renyi:<order>)");
}

double kl(const Vec& p, const Vec& q) {
    require_same_size(p, q, "kl");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        if (q[i] <= 0.0) support_error("kl", i);
        s += p[i] * std::log(p[i] / q[i]);
    }
    return std::max(s, 0.0);
}

double renyi(const Vec& p, const Vec& q, double order) {
    require_same_size(p, q, "renyi");
    if (!(order > 0.0)) throw DomainError("Renyi order must be positive");
    if (order == 1.0) return kl(p, q);
    // log-sum-exp of a log p + (1 - a) log q over the common support
    double mx = -kInf;
    Vec terms;
    terms.reserve(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        if (q[i] <= 0.0) {
            if (order > 1.0) support_error("renyi", i);
            continue;
        }
        const double t = order * std::log(p[i]) + (1.0 - order) * std::log(q[i]);
        terms.push_back(t);
        mx = std::max(mx, t);
    }
    if (terms.empty()) return kInf;
    double acc = 0.0;
    for (double t : terms) acc += std::exp(t - mx);
    const double value = (mx + std::log(acc)) / (order - 1.0);
    return std::max(value, 0.0);
}

double f_divergence(const Vec& p, const Vec& q, const std::function<double(double)>& f) {
    require_same_size(p, q, "f_divergence");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (q[i] <= 0.0) {
            if (p[i] > 0.0) support_error("f_divergence", i);
            continue;
        }
        s += q[i] * f(p[i] / q[i]);
    }
    return std::max(s, 0.0);
}

double chi_squared(const Vec& p, const Vec& q) {
    require_same_size(p, q, "chi_squared");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (q[i] <= 0.0) {
            if (p[i] > 0.0) support_error("chi_squared", i);
            continue;
        }
        const double d = p[i] - q[i];
        s += d * d / q[i];
    }
    return s;
}

double squared_hellinger(const Vec& p, const Vec& q) {
    require_same_size(p, q, "squared_hellinger");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = std::sqrt(p[i]) - std::sqrt(q[i]);
        s += d * d;
    }
    return s;
}

double total_variation(const Vec& p, const Vec& q) {
    require_same_size(p, q, "total_variation");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
    return 0.5 * s;
}

double bhattacharyya(const Vec& p, const Vec& q) {
    require_same_size(p, q, "bhattacharyya");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += std::sqrt(p[i] * q[i]);
    if (!(s > 0.0)) return kInf;
    return -std::log(s);
}

double divergence(const DivergenceSpec& spec, const Vec& a, const Vec& b) {
    switch (spec.kind) {
        case DivKind::Kl: return kl(a, b);
        case DivKind::Renyi: return renyi(a, b, spec.order);
        case DivKind::ChiSquared: return chi_squared(a, b);
        case DivKind::SquaredHellinger: return squared_hellinger(a, b);
        case DivKind::CustomF: return f_divergence(a, b, spec.f);
    }
    return kInf;
}

double fisher_quadratic(const Vec& center, const Vec& delta, double alpha) {
    require_same_size(center, delta, "fisher_quadratic");
    double sum = 0.0, scale = 0.0, q = 0.0;
    for (std::size_t i = 0; i < delta.size(); ++i) {
        sum += delta[i];
        scale += std::abs(delta[i]);
        if (center[i] + delta[i] < -1e-12) throw UsageError("perturbation leaves the simplex");
        if (delta[i] != 0.0) {
            if (center[i] <= 0.0) throw DomainError("perturbation on a zero-mass symbol");
            q += delta[i] * delta[i] / center[i];
        }
    }
    if (std::abs(sum) > 1e-12 * std::max(1.0, scale)) throw UsageError("perturbation must sum to zero");
    return 0.5 * alpha * q;
}

double expectation(const Vec& p, const Vec& g) {
    require_same_size(p, g, "expectation");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] > 0.0) s += p[i] * g[i];
    return s;
}

double variance(const Vec& p, const Vec& g) {
    const double m = expectation(p, g);
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] > 0.0) s += p[i] * (g[i] - m) * (g[i] - m);
    return s;
}

Ball::Ball(Dist c, DivergenceSpec s, double r) : center(std::move(c)), spec(std::move(s)), radius(r) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw DomainError("ball radius must be finite and nonnegative");
}

double Ball::distance_to(const Vec& p) const {
    try {
        return divergence(spec, center.values(), p);
    } catch (const DomainError&) {
        return kInf;
    }
}

bool Ball::contains(const Vec& p, double tol) const { return distance_to(p) <= radius + tol; }

}  // namespace errexp
