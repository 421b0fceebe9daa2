#pragma once

#include <cmath>
#include <random>

#include "errexp/simplex.hpp"

namespace errexp::testutil {

// Random full-support distribution with every entry at least `floor`.
inline Dist random_dist(std::mt19937_64& rng, std::size_t k, double floor = 0.02) {
    std::gamma_distribution<double> g(1.0, 1.0);
    Vec v(k);
    double s = 0.0;
    for (double& x : v) s += x = g(rng);
    for (double& x : v) x = floor + (1.0 - floor * static_cast<double>(k)) * x / s;
    return Dist::model(v);
}

inline double uniform(std::mt19937_64& rng, double a, double b) {
    return std::uniform_real_distribution<double>(a, b)(rng);
}

// Brute-force scalar maximization on a fine grid followed by local refinement;
// used as an oracle independent of the library's root finders.
template <class F>
double grid_max(F f, double a, double b, int n = 4000) {
    double best = -INFINITY, bx = a;
    for (int i = 0; i <= n; ++i) {
        const double x = a + (b - a) * i / n;
        const double v = f(x);
        if (v > best) best = v, bx = x;
    }
    double h = (b - a) / n;
    for (int it = 0; it < 200 && h > 1e-15; ++it) {
        for (double x : {bx - h, bx + h}) {
            if (x < a || x > b) continue;
            const double v = f(x);
            if (v > best) best = v, bx = x;
        }
        h *= 0.5;
    }
    return best;
}

}  // namespace errexp::testutil
