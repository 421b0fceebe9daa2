#pragma once

#include <functional>
#include <string>

#include "errexp/simplex.hpp"

namespace errexp {

enum class DivKind { Kl, Renyi, ChiSquared, SquaredHellinger, CustomF };

// A divergence d(a, b). The curvature is the constant c in the local
// expansion d(P, P + delta) ~ (c/2) sum delta^2 / P: the Renyi order for the
// Renyi family, f''(1) for f-divergences.
struct DivergenceSpec {
    DivKind kind = DivKind::Kl;
    double order = 1.0;
    std::function<double(double)> f;
    double custom_curvature = 1.0;
    std::string label = "kl";

    static DivergenceSpec kl();
    static DivergenceSpec renyi(double order);
    static DivergenceSpec chi_squared();
    static DivergenceSpec squared_hellinger();
    // User generator f: convex on (0, inf) with f(1) = 0.
    static DivergenceSpec custom(std::string label, std::function<double(double)> f, double curvature);

    double curvature() const;
    bool is_kl() const { return kind == DivKind::Kl || (kind == DivKind::Renyi && order == 1.0); }
    std::string name() const;
};

// Parses "kl", "chi2", "hellinger", "renyi:<order>".
DivergenceSpec parse_divergence(const std::string& text);

// Natural-log KL. 0 log 0 = 0; positive mass against zero throws DomainError.
double kl(const Vec& p, const Vec& q);
double renyi(const Vec& p, const Vec& q, double order);
// sum q f(p / q)
double f_divergence(const Vec& p, const Vec& q, const std::function<double(double)>& f);
double chi_squared(const Vec& p, const Vec& q);
double squared_hellinger(const Vec& p, const Vec& q);
double total_variation(const Vec& p, const Vec& q);
double bhattacharyya(const Vec& p, const Vec& q);
double divergence(const DivergenceSpec& spec, const Vec& a, const Vec& b);

// (alpha/2) sum delta^2 / center for a zero-sum perturbation.
double fisher_quadratic(const Vec& center, const Vec& delta, double alpha);

// Moments of a function under a distribution.
double expectation(const Vec& p, const Vec& g);
double variance(const Vec& p, const Vec& g);

// Divergence ball {P : d(center, P) <= radius}.
struct Ball {
    Dist center;
    DivergenceSpec spec;
    double radius = 0.0;

    Ball(Dist c, DivergenceSpec s, double r);
    bool contains(const Vec& p, double tol = 1e-12) const;
    double distance_to(const Vec& p) const;
};

}  // namespace errexp
