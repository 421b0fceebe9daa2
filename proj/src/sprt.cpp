#include "errexp/sprt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "errexp/errors.hpp"
#include "errexp/philox.hpp"
#include "errexp/tilted.hpp"

namespace errexp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEdge = 1e-12;
constexpr std::size_t kAxisCap = 2001;

void check_hyp(int hyp) {
    if (hyp != 0 && hyp != 1) throw UsageError("hypothesis must be 0 or 1");
}

void require_positive(double drift, int hyp) {
    if (!(drift > 0.0)) {
        std::ostringstream os;
        os << "drift under hypothesis " << hyp << " is " << drift
           << "; the sequential test needs it positive toward the correct boundary";
        throw DriftSignError(hyp, drift, os.str());
    }
}

// Range of the second-symbol probability inside a binary ball.
std::pair<double, double> binary_interval(const Ball& ball) {
    const double c = ball.center[1];
    auto f = [&](double q) { return ball.distance_to({1.0 - q, q}) - ball.radius; };
    if (f(c) >= 0.0) return {c, c};  // zero radius, up to rounding of 1 - c
    const double lo = f(kEdge) <= 0.0 ? kEdge : bisect(f, kEdge, c, 0.0).x;
    const double hi = f(1.0 - kEdge) <= 0.0 ? 1.0 - kEdge : bisect(f, c, 1.0 - kEdge, 0.0).x;
    return {lo, hi};
}

struct Branches {
    double own;
    double drift;
};

// Practical exponent branches for hypothesis `hyp` on arbitrary (P0, P1).
struct Objective2 {
    Vec l01;  // log(ph0/ph1)
    double rho0, rho1;
    int hyp;

    Branches eval(const Vec& p0, const Vec& p1) const {
        const double d0 = expectation(p0, l01);
        const double d1 = -expectation(p1, l01);
        if (!(d0 > 0.0) || !(d1 > 0.0)) return {0.0, 0.0};
        if (hyp == 0) {
            const double d = kl(p0, p1);
            return {d * rho0, d * d1 / d0};
        }
        const double d = kl(p1, p0);
        return {d * rho1, d * d0 / d1};
    }
};

Branches binary_eval(const Objective2& ob, double a, double b) {
    return ob.eval({1.0 - a, a}, {1.0 - b, b});
}

// Shrinking pattern search on a box; robust to the kink of min(own, drift).
template <class F>
std::pair<double, double> pattern_refine(const F& f, double a, double b, double ha, double hb, double alo,
                                         double ahi, double blo, double bhi) {
    double best = f(a, b);
    for (int round = 0; round < 60; ++round) {
        double ba = a, bb = b;
        for (int i = -2; i <= 2; ++i)
            for (int j = -2; j <= 2; ++j) {
                const double x = std::clamp(a + 0.5 * i * ha, alo, ahi);
                const double y = std::clamp(b + 0.5 * j * hb, blo, bhi);
                const double v = f(x, y);
                if (v < best) {
                    best = v;
                    ba = x;
                    bb = y;
                }
            }
        if (ba == a && bb == b) {
            ha *= 0.5;
            hb *= 0.5;
            if (ha < 1e-15 && hb < 1e-15) break;
        }
        a = ba;
        b = bb;
    }
    return {a, b};
}

SprtWorstCase worst_binary(const Objective2& ob, const Ball& ball0, const Ball& ball1, const SolveOptions& opts) {
    const auto [alo, ahi] = binary_interval(ball0);
    const auto [blo, bhi] = binary_interval(ball1);
    auto axis = [&](double lo, double hi) {
        const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / opts.grid_step)) + 1;
        const std::size_t m = std::clamp<std::size_t>(n, 2, kAxisCap);
        Vec v(m);
        for (std::size_t i = 0; i < m; ++i)
            v[i] = m == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(m - 1);
        return v;
    };
    const Vec av = axis(alo, ahi), bv = axis(blo, bhi);
    // Per-axis pieces so each grid cell costs a handful of flops.
    struct AxisP {
        double l0, l1, negent, drift;
    };
    auto pieces = [&](const Vec& v, double sign) {
        std::vector<AxisP> out(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double q = v[i];
            out[i].l0 = std::log(1.0 - q);
            out[i].l1 = std::log(q);
            out[i].negent = (1.0 - q) * out[i].l0 + q * out[i].l1;
            out[i].drift = sign * ((1.0 - q) * ob.l01[0] + q * ob.l01[1]);
        }
        return out;
    };
    const std::vector<AxisP> pa = pieces(av, 1.0), pb = pieces(bv, -1.0);
    double best_own = kInf, best_drift = kInf;
    std::size_t oa = 0, ob_ = 0, da = 0, db = 0;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        const double qa = av[i];
        for (std::size_t j = 0; j < pb.size(); ++j) {
            const double qb = bv[j];
            double own, drift;
            if (!(pa[i].drift > 0.0) || !(pb[j].drift > 0.0)) {
                own = drift = 0.0;
            } else if (ob.hyp == 0) {
                const double d = pa[i].negent - (1.0 - qa) * pb[j].l0 - qa * pb[j].l1;
                own = d * ob.rho0;
                drift = d * pb[j].drift / pa[i].drift;
            } else {
                const double d = pb[j].negent - (1.0 - qb) * pa[i].l0 - qb * pa[i].l1;
                own = d * ob.rho1;
                drift = d * pa[i].drift / pb[j].drift;
            }
            if (own < best_own) {
                best_own = own;
                oa = i;
                ob_ = j;
            }
            if (drift < best_drift) {
                best_drift = drift;
                da = i;
                db = j;
            }
        }
    }
    const double ha = av.size() > 1 ? av[1] - av[0] : 0.0, hb = bv.size() > 1 ? bv[1] - bv[0] : 0.0;
    auto own_f = [&](double a, double b) { return binary_eval(ob, a, b).own; };
    auto drift_f = [&](double a, double b) { return binary_eval(ob, a, b).drift; };
    const auto po = pattern_refine(own_f, av[oa], bv[ob_], ha, hb, alo, ahi, blo, bhi);
    const auto pd = pattern_refine(drift_f, av[da], bv[db], ha, hb, alo, ahi, blo, bhi);
    SprtWorstCase res;
    res.own_branch = std::min(best_own, own_f(po.first, po.second));
    res.drift_branch = std::min(best_drift, drift_f(pd.first, pd.second));
    const bool own_wins = res.own_branch <= res.drift_branch;
    const auto& pw = own_wins ? po : pd;
    res.value = std::min(res.own_branch, res.drift_branch);
    res.worst0 = Dist::normalize({1.0 - pw.first, pw.first});
    res.worst1 = Dist::normalize({1.0 - pw.second, pw.second});
    res.grid_points = av.size() * bv.size();
    return res;
}

// Frank-Wolfe over the product of the two balls for one branch.
std::pair<double, std::pair<Vec, Vec>> product_fw(const Objective2& ob, bool own, const Ball& ball0,
                                                  const Ball& ball1, Vec x0, Vec x1, const SolveOptions& opts) {
    const SeparableSet s0 = ball_set(ball0), s1 = ball_set(ball1);
    const Vec& l = ob.l01;
    auto value = [&](const Vec& a, const Vec& b) {
        try {
            const Branches br = ob.eval(a, b);
            return own ? br.own : br.drift;
        } catch (const DomainError&) {
            return kInf;
        }
    };
    double fx = value(x0, x1);
    for (int it = 0; it < opts.max_outer; ++it) {
        const std::size_t k = x0.size();
        Vec g0(k), g1(k);
        const double d0 = expectation(x0, l), d1 = -expectation(x1, l);
        const Vec& pi = ob.hyp == 0 ? x0 : x1;
        const Vec& pj = ob.hyp == 0 ? x1 : x0;
        const double d = kl(pi, pj);
        double scale_own = ob.hyp == 0 ? ob.rho0 : ob.rho1;
        // gradients of D(pi||pj) times a factor that may depend on both drifts
        Vec gi(k), gj(k);
        for (std::size_t i = 0; i < k; ++i) {
            gi[i] = std::log(pi[i] / pj[i]) + 1.0;
            gj[i] = -pi[i] / pj[i];
        }
        if (own) {
            for (std::size_t i = 0; i < k; ++i) {
                gi[i] *= scale_own;
                gj[i] *= scale_own;
            }
        } else {
            // hyp 0: factor d1/d0; hyp 1: factor d0/d1
            const double num = ob.hyp == 0 ? d1 : d0, den = ob.hyp == 0 ? d0 : d1;
            for (std::size_t i = 0; i < k; ++i) {
                const double lnum = ob.hyp == 0 ? -l[i] : l[i];  // d num / d p_j
                const double lden = ob.hyp == 0 ? l[i] : -l[i];  // d den / d p_i
                gi[i] = gi[i] * num / den - d * num / (den * den) * lden;
                gj[i] = gj[i] * num / den + d / den * lnum;
            }
        }
        g0 = ob.hyp == 0 ? gi : gj;
        g1 = ob.hyp == 0 ? gj : gi;
        const Vec t0 = s0.linear_minimizer(g0), t1 = s1.linear_minimizer(g1);
        double gap = 0.0;
        for (std::size_t i = 0; i < k; ++i) gap += g0[i] * (x0[i] - t0[i]) + g1[i] * (x1[i] - t1[i]);
        if (gap <= opts.tol_opt * std::max(1.0, std::abs(fx))) break;
        auto along = [&](double t) {
            Vec a(x0), b(x1);
            for (std::size_t i = 0; i < k; ++i) {
                a[i] += t * (t0[i] - x0[i]);
                b[i] += t * (t1[i] - x1[i]);
            }
            return value(a, b);
        };
        const LineResult ls = golden_minimize(along, 0.0, 1.0, 1e-14, 200);
        if (!(ls.fx < fx)) break;
        for (std::size_t i = 0; i < k; ++i) {
            x0[i] += ls.x * (t0[i] - x0[i]);
            x1[i] += ls.x * (t1[i] - x1[i]);
        }
        fx = ls.fx;
    }
    return {fx, {x0, x1}};
}

}  // namespace

Drifts drifts(const Dist& p_true, const Dist& ph0, const Dist& ph1) {
    const Vec l = log_ratio(ph1, ph0);  // log(ph0/ph1)
    const double d = expectation(p_true.values(), l);
    return {d, -d};
}

SprtAnalysis sprt_exponents(const Dist& p0, const Dist& p1, const Dist& ph0, const Dist& ph1, double n) {
    if (!(n > 0.0)) throw DomainError("sample budget must be positive");
    SprtAnalysis a;
    a.drift0 = drifts(p0, ph0, ph1).as_h0;
    a.drift1 = drifts(p1, ph0, ph1).as_h1;
    require_positive(a.drift0, 0);
    require_positive(a.drift1, 1);
    a.e0 = kl(p0.values(), p1.values()) * a.drift1 / a.drift0;
    a.e1 = kl(p1.values(), p0.values()) * a.drift0 / a.drift1;
    a.gamma0 = n * a.drift0;
    a.gamma1 = n * a.drift1;
    a.expected_tau0 = n;
    a.expected_tau1 = n;
    return a;
}

SprtAnalysis sprt_exponents_practical(const Dist& p0, const Dist& p1, const Dist& ph0, const Dist& ph1, double n) {
    if (!(n > 0.0)) throw DomainError("sample budget must be positive");
    SprtAnalysis a;
    a.drift0 = drifts(p0, ph0, ph1).as_h0;
    a.drift1 = drifts(p1, ph0, ph1).as_h1;
    require_positive(a.drift0, 0);
    require_positive(a.drift1, 1);
    const double d01 = kl(ph0.values(), ph1.values()), d10 = kl(ph1.values(), ph0.values());
    a.gamma0 = n * d01;
    a.gamma1 = n * d10;
    a.expected_tau0 = a.gamma0 / a.drift0;
    a.expected_tau1 = a.gamma1 / a.drift1;
    a.eta = 1.0 / std::max(d01 / a.drift0, d10 / a.drift1);
    a.e0 = kl(p0.values(), p1.values()) * d10 / a.drift0 * a.eta;
    a.e1 = kl(p1.values(), p0.values()) * d01 / a.drift1 * a.eta;
    return a;
}

SprtWorstCase sprt_worst_case_exact(const Dist& ph0, const Dist& ph1, const Ball& ball0, const Ball& ball1, int hyp,
                                    const SolveOptions& opts) {
    check_hyp(hyp);
    require_same_size(ph0.values(), ph1.values(), "sprt_worst_case_exact");
    const double d01 = kl(ph0.values(), ph1.values()), d10 = kl(ph1.values(), ph0.values());
    require_positive(d01, 0);
    Objective2 ob{log_ratio(ph1, ph0), d10 / d01, d01 / d10, hyp};
    if (ph0.size() == 2) return worst_binary(ob, ball0, ball1, opts);

    SprtWorstCase res;
    double best_own = kInf, best_drift = kInf;
    std::pair<Vec, Vec> arg_own, arg_drift;
    std::vector<std::pair<Vec, Vec>> starts{{ph0.values(), ph1.values()}};
    const SeparableSet s0 = ball_set(ball0), s1 = ball_set(ball1);
    for (std::size_t i = 0; i < ph0.size(); ++i) {
        Vec c(ph0.size(), 0.0);
        c[i] = 1.0;
        Vec mc(ph0.size(), 0.0);
        mc[i] = -1.0;
        starts.push_back({s0.linear_minimizer(c), s1.linear_minimizer(mc)});
        starts.push_back({s0.linear_minimizer(mc), s1.linear_minimizer(c)});
    }
    for (const auto& st : starts) {
        auto o = product_fw(ob, true, ball0, ball1, st.first, st.second, opts);
        if (o.first < best_own) {
            best_own = o.first;
            arg_own = o.second;
        }
        auto d = product_fw(ob, false, ball0, ball1, st.first, st.second, opts);
        if (d.first < best_drift) {
            best_drift = d.first;
            arg_drift = d.second;
        }
    }
    res.own_branch = best_own;
    res.drift_branch = best_drift;
    res.value = std::min(best_own, best_drift);
    const auto& w = best_own <= best_drift ? arg_own : arg_drift;
    res.worst0 = Dist::normalize(w.first);
    res.worst1 = Dist::normalize(w.second);
    return res;
}

double SprtSensitivity::split_deduction(double r_own, double r_other) const {
    return std::sqrt(r_own * theta_own) + std::sqrt(r_other * theta_other);
}

double SprtSensitivity::joint_deduction(double r_other) const { return std::sqrt(r_other * theta_joint); }

double SprtSensitivity::min_deduction(double r_own, double r_other) const {
    return std::min(split_deduction(r_own, r_other), joint_deduction(r_other));
}

double SprtSensitivity::max_deduction(double r_own, double r_other) const {
    return std::max(split_deduction(r_own, r_other), joint_deduction(r_other));
}

SprtSensitivity sprt_sensitivity(const Dist& ph0, const Dist& ph1, double alpha, int hyp) {
    check_hyp(hyp);
    if (!(alpha > 0.0)) throw DomainError("curvature must be positive");
    const Dist& pi = hyp == 0 ? ph0 : ph1;
    const Dist& pj = hyp == 0 ? ph1 : ph0;
    const double dij = kl(pi.values(), pj.values()), dji = kl(pj.values(), pi.values());
    SprtSensitivity s;
    s.hyp = hyp;
    s.alpha = alpha;
    s.rho = dji / dij;
    s.e = dji;
    const std::size_t k = pi.size();
    Vec own(k), other(k), joint(k);
    for (std::size_t x = 0; x < k; ++x) {
        const double lr = std::log(pi[x] / pj[x]);
        own[x] = s.rho * lr;
        other[x] = s.rho * pi[x] / pj[x];
        joint[x] = lr + s.rho * pi[x] / pj[x];
    }
    s.theta_own = 2.0 / alpha * variance(pi.values(), own);
    s.theta_other = 2.0 / alpha * variance(pj.values(), other);
    s.theta_joint = 2.0 / alpha * variance(pj.values(), joint);
    return s;
}

SimResult simulate_sprt(const Dist& p_true, const SprtConfig& config, int true_hyp, std::uint64_t trials,
                        std::uint64_t seed, unsigned threads, std::uint64_t step_cap) {
    check_hyp(true_hyp);
    require_same_size(p_true.values(), config.ph0.values(), "simulate_sprt");
    require_same_size(p_true.values(), config.ph1.values(), "simulate_sprt");
    if (!(config.gamma0 > 0.0) || !(config.gamma1 > 0.0)) throw DomainError("thresholds must be positive");
    if (trials == 0) throw UsageError("need at least one trial");
    const std::size_t k = p_true.size();
    const Vec inc = log_ratio(config.ph1, config.ph0);  // log(ph0/ph1)
    Vec cdf(k);
    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i) cdf[i] = acc += p_true[i];
    cdf[k - 1] = 1.0;

    struct Tally {
        std::uint64_t err = 0, cens = 0, d0 = 0, d1 = 0, tau = 0;
        unsigned __int128 tau2 = 0;
    };
    auto run = [&](std::uint64_t begin, std::uint64_t end, Tally& t) {
        for (std::uint64_t trial = begin; trial < end; ++trial) {
            TrialStream rng(seed, trial);
            double s = 0.0;
            std::uint64_t n = 0;
            int decision = -1;
            while (n < step_cap) {
                const double u = rng.uniform();
                std::size_t x = 0;
                while (x + 1 < k && u >= cdf[x]) ++x;
                s += inc[x];
                ++n;
                if (s >= config.gamma0) {
                    decision = 0;
                    break;
                }
                if (s <= -config.gamma1) {
                    decision = 1;
                    break;
                }
            }
            if (decision < 0) {
                ++t.cens;
                continue;
            }
            (decision == 0 ? t.d0 : t.d1)++;
            if (decision != true_hyp) ++t.err;
            t.tau += n;
            t.tau2 += static_cast<unsigned __int128>(n) * n;
        }
    };
    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::min<std::uint64_t>(trials, 1024))));
    std::vector<Tally> tallies(workers);
    if (workers == 1) {
        run(0, trials, tallies[0]);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            const std::uint64_t b = trials * w / workers, e = trials * (w + 1) / workers;
            pool.emplace_back(run, b, e, std::ref(tallies[w]));
        }
        for (auto& th : pool) th.join();
    }
    Tally tot;
    for (const Tally& t : tallies) {
        tot.err += t.err;
        tot.cens += t.cens;
        tot.d0 += t.d0;
        tot.d1 += t.d1;
        tot.tau += t.tau;
        tot.tau2 += t.tau2;
    }
    SimResult r;
    r.trials = trials;
    r.errors = tot.err;
    r.censored = tot.cens;
    r.decided0 = tot.d0;
    r.decided1 = tot.d1;
    r.err_rate = static_cast<double>(tot.err) / static_cast<double>(trials);
    const std::uint64_t done = trials - tot.cens;
    if (done > 0) {
        r.mean_tau = static_cast<double>(tot.tau) / static_cast<double>(done);
        const long double m2 = static_cast<long double>(tot.tau2) / static_cast<long double>(done);
        r.var_tau = static_cast<double>(m2 - static_cast<long double>(r.mean_tau) * r.mean_tau);
    }
    return r;
}

double estimate_exponent_slope(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3) throw UsageError("slope estimate needs at least three thresholds");
    double sx = 0.0, sy = 0.0;
    for (const auto& [g, e] : points) {
        if (!(e > 0.0)) {
            std::ostringstream os;
            os << "no errors observed at threshold " << g << "; increase the trial count";
            throw DomainError(os.str());
        }
        sx += g;
        sy += -std::log(e);
    }
    const double n = static_cast<double>(points.size());
    const double mx = sx / n, my = sy / n;
    double sxy = 0.0, sxx = 0.0;
    for (const auto& [g, e] : points) {
        sxy += (g - mx) * (-std::log(e) - my);
        sxx += (g - mx) * (g - mx);
    }
    if (!(sxx > 0.0)) throw UsageError("thresholds must not all coincide");
    return sxy / sxx;
}

}  // namespace errexp
