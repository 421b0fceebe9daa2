#include "errexp/solver.hpp"

#include <gsl/gsl_multimin.h>
#include <gsl/gsl_vector.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "errexp/errors.hpp"

namespace errexp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double safe_eval(const Objective& f, const Vec& x) {
    try {
        const double v = f(x);
        return std::isnan(v) ? kInf : v;
    } catch (const DomainError&) {
        return kInf;
    }
}

// Numeric fallbacks for user-supplied generators.
SeparableSet numeric_set(Vec w, double bound, std::function<double(double)> g) {
    SeparableSet s;
    s.w = std::move(w);
    s.bound = bound;
    s.g = g;
    s.dg = [g](double u) {
        const double h = 1e-6 * std::max(1.0, u);
        const double lo = std::max(u - h, 0.5 * u);
        return (g(u + h) - g(lo)) / (u + h - lo);
    };
    auto dg = s.dg;
    s.dg_lo = dg(1e-12);
    s.dg_hi = dg(1e12);
    s.dg_inv = [dg](double y) {
        double lo = 1e-15, hi = 1e15;
        for (int i = 0; i < 200; ++i) {
            const double mid = std::sqrt(lo * hi);
            (dg(mid) < y ? lo : hi) = mid;
        }
        return std::sqrt(lo * hi);
    };
    s.g_zero = g(1e-300);
    if (!std::isfinite(s.g_zero)) s.g_zero = kInf;
    return s;
}

}  // namespace

RootResult bisect(const std::function<double(double)>& f, double lo, double hi, double f_tol, double x_tol,
                  int max_iter) {
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return {lo, 0.0, 0};
    if (fhi == 0.0) return {hi, 0.0, 0};
    if ((flo > 0.0) == (fhi > 0.0)) {
        std::ostringstream os;
        os << "bisection bracket [" << lo << ", " << hi << "] has no sign change (" << flo << ", " << fhi << ")";
        throw DomainError(os.str());
    }
    RootResult best{std::abs(flo) < std::abs(fhi) ? lo : hi, std::min(std::abs(flo), std::abs(fhi)), 0};
    best.fx = std::abs(flo) < std::abs(fhi) ? flo : fhi;
    for (int it = 1; it <= max_iter; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= std::min(lo, hi) || mid >= std::max(lo, hi)) break;
        const double fm = f(mid);
        best.iterations = it;
        if (std::abs(fm) < std::abs(best.fx)) {
            best.x = mid;
            best.fx = fm;
        }
        if (std::abs(fm) <= f_tol || std::abs(hi - lo) <= x_tol) return {mid, fm, it};
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return best;
}

LineResult golden_minimize(const std::function<double(double)>& f, double a, double b, double x_tol,
                           int max_iter) {
    constexpr double invphi = 0.6180339887498949;
    double c = b - invphi * (b - a), d = a + invphi * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < max_iter && std::abs(b - a) > x_tol; ++it) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    LineResult best = fc <= fd ? LineResult{c, fc} : LineResult{d, fd};
    for (double e : {a, b}) {
        const double fe = f(e);
        if (fe < best.fx) best = {e, fe};
    }
    return best;
}

double SeparableSet::value(const Vec& x) const {
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] <= 0.0) {
            if (x[i] > 0.0) return kInf;
            continue;
        }
        const double u = x[i] / w[i];
        const double gi = u <= 0.0 ? g_zero : g(u);
        if (!std::isfinite(gi)) return kInf;
        s += w[i] * gi;
    }
    return s;
}

bool SeparableSet::contains(const Vec& x, double tol) const { return value(x) <= bound + tol; }

Vec SeparableSet::linear_minimizer(const Vec& c_in) const {
    const std::size_t k = w.size();
    std::vector<std::size_t> act;
    for (std::size_t i = 0; i < k; ++i)
        if (w[i] > 0.0) act.push_back(i);
    double cmin = kInf, cmax = -kInf;
    std::size_t arg = act.front();
    for (std::size_t i : act) {
        if (c_in[i] < cmin) {
            cmin = c_in[i];
            arg = i;
        }
        cmax = std::max(cmax, c_in[i]);
    }
    if (!(cmax - cmin > 1e-300)) return w;
    if (!(bound > value(w))) return w;
    {
        Vec e(k, 0.0);
        e[arg] = 1.0;
        if (value(e) <= bound) return e;
    }
    // Shift and scale the costs to [0, 1]; the minimizer is unchanged.
    Vec c(k, 0.0);
    for (std::size_t i : act) c[i] = (c_in[i] - cmin) / (cmax - cmin);

    // Stationarity gives g'(x_i / w_i) = a - b c_i with b > 0 and a < g'(inf).
    auto u_of = [&](double a, double b, std::size_t i) {
        const double y = a - b * c[i];
        if (y <= dg_lo) return 0.0;
        return dg_inv(y);
    };
    auto mass = [&](double a, double b) {
        double s = 0.0;
        for (std::size_t i : act) s += w[i] * u_of(a, b, i);
        return s;
    };
    auto solve_a = [&](double b) {
        double hi, lo;
        if (std::isfinite(dg_hi)) {
            double delta = 1.0;
            hi = dg_hi - delta;
            for (int j = 0; j < 2000 && mass(hi, b) <= 1.0; ++j) {
                delta *= 0.5;
                hi = dg_hi - delta;
                if (hi >= dg_hi) break;
            }
        } else {
            hi = 1.0;
            for (int j = 0; j < 2000 && mass(hi, b) <= 1.0; ++j) hi = 2.0 * hi + 1.0;
        }
        double step = 1.0;
        lo = hi - step;
        for (int j = 0; j < 2000 && mass(lo, b) >= 1.0; ++j) {
            step *= 2.0;
            lo = hi - step;
        }
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            (mass(mid, b) > 1.0 ? hi : lo) = mid;
        }
        return 0.5 * (lo + hi);
    };
    auto point = [&](double b) {
        const double a = solve_a(b);
        Vec x(k, 0.0);
        double s = 0.0;
        for (std::size_t i : act) {
            x[i] = w[i] * u_of(a, b, i);
            s += x[i];
        }
        for (double& v : x) v /= s;
        return x;
    };
    double blo = 1.0, bhi = 1.0;
    for (int j = 0; j < 2000 && value(point(blo)) > bound; ++j) blo *= 0.5;
    for (int j = 0; j < 2000 && value(point(bhi)) <= bound; ++j) bhi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = std::sqrt(blo * bhi);
        if (mid <= blo || mid >= bhi) break;
        (value(point(mid)) <= bound ? blo : bhi) = mid;
    }
    return point(blo);
}

Vec SeparableSet::retract(const Vec& x) const {
    if (contains(x)) return x;
    auto at = [&](double t) {
        Vec y(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = w[i] + t * (x[i] - w[i]);
        return y;
    };
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (contains(at(mid), 0.0) ? lo : hi) = mid;
    }
    return at(lo);
}

SeparableSet ball_set(const Ball& ball) {
    const DivergenceSpec& s = ball.spec;
    const double r = ball.radius;
    SeparableSet set;
    set.w = ball.center.values();
    set.bound = r;
    if (s.is_kl()) {
        set.g = [](double u) { return -std::log(u); };
        set.dg = [](double u) { return -1.0 / u; };
        set.dg_inv = [](double y) { return -1.0 / y; };
        set.dg_lo = -kInf;
        set.dg_hi = 0.0;
        set.g_zero = kInf;
        return set;
    }
    switch (s.kind) {
        case DivKind::ChiSquared:
            set.g = [](double u) { return u - 2.0 + 1.0 / u; };
            set.dg = [](double u) { return 1.0 - 1.0 / (u * u); };
            set.dg_inv = [](double y) { return 1.0 / std::sqrt(1.0 - y); };
            set.dg_lo = -kInf;
            set.dg_hi = 1.0;
            set.g_zero = kInf;
            return set;
        case DivKind::SquaredHellinger:
            set.g = [](double u) {
                const double d = 1.0 - std::sqrt(u);
                return d * d;
            };
            set.dg = [](double u) { return 1.0 - 1.0 / std::sqrt(u); };
            set.dg_inv = [](double y) { return 1.0 / ((1.0 - y) * (1.0 - y)); };
            set.dg_lo = -kInf;
            set.dg_hi = 1.0;
            set.g_zero = 1.0;
            return set;
        case DivKind::Renyi: {
            const double a = s.order;
            const double sg = a > 1.0 ? 1.0 : -1.0;
            set.bound = sg * std::exp((a - 1.0) * r);
            set.g = [a, sg](double u) { return sg * std::pow(u, 1.0 - a); };
            set.dg = [a, sg](double u) { return sg * (1.0 - a) * std::pow(u, -a); };
            set.dg_inv = [a, sg](double y) { return std::pow(y / (sg * (1.0 - a)), -1.0 / a); };
            set.dg_lo = -kInf;
            set.dg_hi = 0.0;
            set.g_zero = a > 1.0 ? kInf : 0.0;
            return set;
        }
        case DivKind::CustomF: {
            auto f = s.f;
            return numeric_set(set.w, r, [f](double u) { return u * f(1.0 / u); });
        }
        case DivKind::Kl: break;
    }
    return set;
}

SeparableSet reverse_ball_set(const Dist& center, const DivergenceSpec& s, double r) {
    if (!(r >= 0.0)) throw DomainError("radius must be nonnegative");
    SeparableSet set;
    set.w = center.values();
    set.bound = r;
    if (s.is_kl()) {
        set.g = [](double u) { return u * std::log(u); };
        set.dg = [](double u) { return std::log(u) + 1.0; };
        set.dg_inv = [](double y) { return std::exp(y - 1.0); };
        set.dg_lo = -kInf;
        set.dg_hi = kInf;
        set.g_zero = 0.0;
        return set;
    }
    switch (s.kind) {
        case DivKind::ChiSquared:
            set.g = [](double u) { return (u - 1.0) * (u - 1.0); };
            set.dg = [](double u) { return 2.0 * (u - 1.0); };
            set.dg_inv = [](double y) { return 1.0 + 0.5 * y; };
            set.dg_lo = -2.0;
            set.dg_hi = kInf;
            set.g_zero = 1.0;
            return set;
        case DivKind::SquaredHellinger:
            set.g = [](double u) {
                const double d = std::sqrt(u) - 1.0;
                return d * d;
            };
            set.dg = [](double u) { return 1.0 - 1.0 / std::sqrt(u); };
            set.dg_inv = [](double y) { return 1.0 / ((1.0 - y) * (1.0 - y)); };
            set.dg_lo = -kInf;
            set.dg_hi = 1.0;
            set.g_zero = 1.0;
            return set;
        case DivKind::Renyi: {
            const double a = s.order;
            const double sg = a > 1.0 ? 1.0 : -1.0;
            set.bound = sg * std::exp((a - 1.0) * r);
            set.g = [a, sg](double u) { return sg * std::pow(u, a); };
            set.dg = [a, sg](double u) { return sg * a * std::pow(u, a - 1.0); };
            set.dg_inv = [a, sg](double y) { return std::pow(y / (sg * a), 1.0 / (a - 1.0)); };
            set.dg_lo = a > 1.0 ? 0.0 : -kInf;
            set.dg_hi = a > 1.0 ? kInf : 0.0;
            set.g_zero = 0.0;
            return set;
        }
        case DivKind::CustomF: return numeric_set(set.w, r, s.f);
        case DivKind::Kl: break;
    }
    return set;
}

MinimizeResult minimize_over_set(const Objective& f, const Gradient& grad, const SeparableSet& set,
                                 const Vec& start, const SolveOptions& opts) {
    MinimizeResult res;
    res.x = set.retract(start);
    res.value = safe_eval(f, res.x);
    int stalls = 0;
    for (int it = 1; it <= opts.max_outer; ++it) {
        res.iterations = it;
        const Vec gr = grad(res.x);
        const Vec s = set.linear_minimizer(gr);
        Vec dir(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) dir[i] = s[i] - res.x[i];
        res.gap = -dot(gr, dir);
        const double scale = std::max(1.0, std::abs(res.value));
        if (res.gap <= opts.tol_opt * scale) return res;
        auto along = [&](double t) {
            Vec y(res.x);
            for (std::size_t i = 0; i < y.size(); ++i) y[i] += t * dir[i];
            return safe_eval(f, y);
        };
        const LineResult ls = golden_minimize(along, 0.0, 1.0, 1e-14, 200);
        if (!(ls.fx < res.value)) {
            // No measurable progress: the gap is at the noise floor of f.
            if (++stalls >= 3) {
                if (res.gap <= 1e-7 * scale) return res;
                break;
            }
            continue;
        }
        stalls = 0;
        for (std::size_t i = 0; i < res.x.size(); ++i) res.x[i] += ls.x * dir[i];
        res.value = ls.fx;
    }
    std::ostringstream os;
    os << "Frank-Wolfe did not converge: gap " << res.gap << " after " << res.iterations << " iterations";
    throw SolverError(os.str(), res.x, res.gap);
}

MinimizeResult minimize_over_ball(const Objective& f, const Gradient& grad, const Ball& ball,
                                  const SolveOptions& opts) {
    return minimize_over_set(f, grad, ball_set(ball), ball.center.values(), opts);
}

namespace {

double binary_kl(double q, double c) {
    double s = 0.0;
    if (q > 0.0) s += q * std::log(q / c);
    if (q < 1.0) s += (1.0 - q) * std::log((1.0 - q) / (1.0 - c));
    return std::max(s, 0.0);
}

}  // namespace

std::vector<double> binary_kl_sphere(double c, double gamma) {
    std::vector<double> pts;
    if (gamma <= 0.0) return {c};
    auto h = [&](double q) { return binary_kl(q, c) - gamma; };
    if (h(0.0) >= 0.0) pts.push_back(bisect(h, 0.0, c, 0.0).x);
    if (h(1.0) >= 0.0) pts.push_back(bisect(h, c, 1.0, 0.0).x);
    return pts;
}

namespace {

struct SphereSearch {
    const Objective* f;
    Vec c;
    double gamma;
    double sign;
    std::vector<Vec> basis;  // orthonormal, spans {sum = 0}

    Vec direction(const double* v) const {
        Vec u(c.size(), 0.0);
        for (std::size_t j = 0; j < basis.size(); ++j)
            for (std::size_t i = 0; i < c.size(); ++i) u[i] += v[j] * basis[j][i];
        const double n = std::sqrt(dot(u, u));
        if (n > 0.0)
            for (double& x : u) x /= n;
        return u;
    }

    // Sphere point along direction u, or nothing if the ray leaves the
    // simplex first. `exit_gap` reports how far short it fell.
    bool point(const Vec& u, Vec& q, double& exit_gap) const {
        double texit = kInf;
        for (std::size_t i = 0; i < c.size(); ++i)
            if (u[i] < 0.0) texit = std::min(texit, -c[i] / u[i]);
        auto at = [&](double t) {
            Vec y(c.size());
            for (std::size_t i = 0; i < c.size(); ++i) y[i] = std::max(c[i] + t * u[i], 0.0);
            return y;
        };
        const double dexit = kl(at(texit), c);
        if (dexit < gamma) {
            exit_gap = gamma - dexit;
            q = at(texit);
            return false;
        }
        const double t = bisect([&](double s) { return kl(at(s), c) - gamma; }, 0.0, texit, 0.0).x;
        q = at(t);
        exit_gap = 0.0;
        return true;
    }

    double score(const double* v) const {
        Vec q;
        double gap = 0.0;
        if (!point(direction(v), q, gap)) return 1e12 * (1.0 + gap);
        return sign * safe_eval(*f, q);
    }
};

double nm_trampoline(const gsl_vector* v, void* params) {
    return static_cast<SphereSearch*>(params)->score(v->data);
}

}  // namespace

SphereResult extremize_on_kl_sphere(const Objective& f, const Dist& center, double gamma, Mode mode,
                                    const SolveOptions& opts) {
    const std::size_t k = center.size();
    const double sign = mode == Mode::Min ? 1.0 : -1.0;
    if (!center.full_support()) throw DomainError("sphere center must have full support");
    if (gamma <= 0.0) return {center, f(center.values())};
    const double reach = -std::log(center.min());
    if (gamma > reach) {
        std::ostringstream os;
        os << "KL sphere of radius " << gamma << " misses the simplex (largest reachable " << reach << ")";
        throw DomainError(os.str());
    }
    if (k == 2) {
        SphereResult best{center, kInf};
        bool any = false;
        for (double q : binary_kl_sphere(center[1], gamma)) {
            Dist p = Dist::normalize({1.0 - q, q});
            const double v = f(p.values());
            if (!any || sign * v < sign * best.value) best = {p, v};
            any = true;
        }
        return best;
    }

    SphereSearch search{&f, center.values(), gamma, sign, {}};
    for (std::size_t j = 0; j + 1 < k; ++j) {
        Vec b(k, 0.0);
        b[j] = 1.0;
        b[k - 1] = -1.0;
        for (const Vec& e : search.basis) {
            const double d = dot(b, e);
            for (std::size_t i = 0; i < k; ++i) b[i] -= d * e[i];
        }
        const double n = std::sqrt(dot(b, b));
        for (double& x : b) x /= n;
        search.basis.push_back(b);
    }
    const std::size_t dim = k - 1;
    if (k == 3) {
        // The sphere is a closed curve: scan the direction angle, then polish
        // the best few local minima of the scan with a golden search.
        constexpr int kAngles = 1440;
        const double step = 2.0 * std::acos(-1.0) / kAngles;
        auto score_at = [&](double phi) {
            const double v[2] = {std::cos(phi), std::sin(phi)};
            return search.score(v);
        };
        std::vector<double> sc(kAngles);
        for (int i = 0; i < kAngles; ++i) sc[i] = score_at(i * step);
        std::vector<std::pair<double, int>> minima;
        for (int i = 0; i < kAngles; ++i)
            if (sc[i] <= sc[(i + 1) % kAngles] && sc[i] <= sc[(i + kAngles - 1) % kAngles])
                minima.emplace_back(sc[i], i);
        std::sort(minima.begin(), minima.end());
        double best_phi = 0.0, best_score = kInf;
        for (std::size_t m = 0; m < std::min<std::size_t>(minima.size(), 4); ++m) {
            const double mid = minima[m].second * step;
            const LineResult r = golden_minimize(score_at, mid - step, mid + step, 1e-13, 200);
            const double fx = std::min(r.fx, minima[m].first);
            if (fx < best_score) {
                best_score = fx;
                best_phi = r.fx <= minima[m].first ? r.x : mid;
            }
        }
        const double v[2] = {std::cos(best_phi), std::sin(best_phi)};
        Vec q;
        double gap = 0.0;
        if (!search.point(search.direction(v), q, gap))
            throw SolverError("no sphere point found by the angle scan", q, gap);
        Dist p = Dist::normalize(q);
        return {p, f(p.values())};
    }
    auto coords = [&](const Vec& u) {
        Vec v(dim);
        for (std::size_t j = 0; j < dim; ++j) v[j] = dot(u, search.basis[j]);
        return v;
    };

    std::vector<Vec> seeds;
    for (std::size_t i = 0; i < k; ++i) {
        Vec u(k);
        for (std::size_t j = 0; j < k; ++j) u[j] = (j == i ? 1.0 : 0.0) - center[j];
        seeds.push_back(coords(u));
        for (double& x : u) x = -x;
        seeds.push_back(coords(u));
    }
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> gauss;
    const std::size_t samples = 64 * k + static_cast<std::size_t>(opts.multistarts);
    for (std::size_t s = 0; s < samples; ++s) {
        Vec v(dim);
        for (double& x : v) x = gauss(rng);
        seeds.push_back(v);
    }
    std::vector<std::pair<double, std::size_t>> ranked;
    for (std::size_t s = 0; s < seeds.size(); ++s) ranked.emplace_back(search.score(seeds[s].data()), s);
    std::sort(ranked.begin(), ranked.end());
    const std::size_t starts = std::min<std::size_t>(ranked.size(), std::max(1, opts.multistarts));

    gsl_multimin_function fn{&nm_trampoline, dim, &search};
    gsl_multimin_fminimizer* nm = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, dim);
    gsl_vector* x = gsl_vector_alloc(dim);
    gsl_vector* step = gsl_vector_alloc(dim);
    double best_score = kInf;
    Vec best_v;
    for (std::size_t s = 0; s < starts; ++s) {
        const Vec& v0 = seeds[ranked[s].second];
        const double n = std::sqrt(dot(v0, v0));
        for (std::size_t j = 0; j < dim; ++j) gsl_vector_set(x, j, v0[j] / n);
        gsl_vector_set_all(step, 0.2);
        gsl_multimin_fminimizer_set(nm, &fn, x, step);
        for (int it = 0; it < 4000; ++it) {
            if (gsl_multimin_fminimizer_iterate(nm) != GSL_SUCCESS) break;
            if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(nm), 1e-11) == GSL_SUCCESS) break;
        }
        if (nm->fval < best_score) {
            best_score = nm->fval;
            best_v.assign(nm->x->data, nm->x->data + dim);
        }
    }
    gsl_vector_free(step);
    gsl_vector_free(x);
    gsl_multimin_fminimizer_free(nm);

    Vec q;
    double gap = 0.0;
    if (!search.point(search.direction(best_v.data()), q, gap))
        throw SolverError("no sphere point found by the direction search", q, gap);
    Dist p = Dist::normalize(q);
    return {p, f(p.values())};
}

GridResult grid_oracle(const Objective& f, const std::function<bool(const Vec&)>& feasible, std::size_t k,
                       double step, Mode mode, std::uint64_t cap) {
    if (!(step > 0.0) || step > 1.0) throw UsageError("grid step must lie in (0, 1]");
    const auto m = static_cast<std::uint32_t>(std::llround(1.0 / step));
    GridResult res;
    res.value = mode == Mode::Min ? kInf : -kInf;
    for_each_grid_point(k, m, [&](const Vec& p) {
        ++res.visited;
        if (!feasible(p)) return true;
        ++res.feasible;
        const double v = safe_eval(f, p);
        if (mode == Mode::Min ? v < res.value : v > res.value) {
            res.value = v;
            res.point = p;
        }
        return true;
    }, cap);
    return res;
}

std::vector<double> log_factorials(std::uint32_t n) {
    std::vector<double> lf(n + 1, 0.0);
    for (std::uint32_t i = 2; i <= n; ++i) lf[i] = lf[i - 1] + std::log(static_cast<double>(i));
    return lf;
}

double sanov_log_probability(const Dist& p_true, std::uint32_t n,
                             const std::function<bool(const EmpiricalType&)>& in_region, std::uint64_t cap) {
    const std::size_t k = p_true.size();
    const std::vector<double> lf = log_factorials(n);
    Vec logp(k);
    for (std::size_t i = 0; i < k; ++i) logp[i] = p_true[i] > 0.0 ? std::log(p_true[i]) : -kInf;
    double mx = -kInf, acc = 0.0;
    EmpiricalType t;
    t.n = n;
    for_each_type(k, n, [&](const std::vector<std::uint32_t>& c) {
        t.counts = c;
        if (!in_region(t)) return true;
        double l = lf[n];
        for (std::size_t i = 0; i < k; ++i) {
            if (c[i] == 0) continue;
            if (p_true[i] <= 0.0) return true;
            l += c[i] * logp[i] - lf[c[i]];
        }
        if (l > mx) {
            acc = acc * std::exp(mx - l) + 1.0;
            mx = l;
        } else {
            acc += std::exp(l - mx);
        }
        return true;
    }, cap);
    if (acc == 0.0) return -kInf;
    return mx + std::log(acc);
}

}  // namespace errexp
