#include "errexp/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "errexp/errors.hpp"

namespace errexp {

Alphabet::Alphabet(std::size_t k) : size(k) {
    if (k < 2) throw UsageError("alphabet needs at least two symbols");
    labels.reserve(k);
    for (std::size_t i = 0; i < k; ++i) labels.push_back(std::to_string(i));
}

Alphabet::Alphabet(std::vector<std::string> names) : size(names.size()), labels(std::move(names)) {
    if (size < 2) throw UsageError("alphabet needs at least two symbols");
}

Dist::Dist(std::initializer_list<double> values) : Dist(model(Vec(values))) {}

Dist Dist::model(Vec values, double floor) {
    if (values.size() < 2) throw UsageError("distribution needs at least two entries");
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = values[i];
        if (!std::isfinite(v)) {
            std::ostringstream os;
            os << "entry " << i << " is not finite";
            throw UsageError(os.str());
        }
        if (v < floor) {
            std::ostringstream os;
            os << "entry " << i << " = " << v << " is below the support floor " << floor;
            throw DomainError(os.str());
        }
        sum += v;
    }
    if (std::abs(sum - 1.0) > kSumTolerance * static_cast<double>(values.size())) {
        std::ostringstream os;
        os.precision(17);
        os << "entries sum to " << sum << ", not 1";
        throw UsageError(os.str());
    }
    return Dist(std::move(values));
}

Dist Dist::normalize(Vec weights) {
    if (weights.empty()) throw UsageError("empty weight vector");
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw UsageError("weights must be finite and nonnegative");
        sum += w;
    }
    if (!(sum > 0.0)) throw UsageError("weights sum to zero");
    for (double& w : weights) w /= sum;
    return Dist(std::move(weights));
}

Dist Dist::uniform(std::size_t k) {
    if (k == 0) throw UsageError("empty alphabet");
    return Dist(Vec(k, 1.0 / static_cast<double>(k)));
}

Dist Dist::point_mass(std::size_t k, std::size_t at) {
    if (at >= k) throw UsageError("point mass index out of range");
    Vec v(k, 0.0);
    v[at] = 1.0;
    return Dist(std::move(v));
}

double Dist::min() const { return *std::min_element(p_.begin(), p_.end()); }
double Dist::max() const { return *std::max_element(p_.begin(), p_.end()); }

bool Dist::full_support() const {
    return std::all_of(p_.begin(), p_.end(), [](double v) { return v > 0.0; });
}

void require_same_size(const Vec& a, const Vec& b, const char* what) {
    if (a.size() != b.size()) {
        std::ostringstream os;
        os << what << ": alphabet sizes differ (" << a.size() << " vs " << b.size() << ")";
        throw UsageError(os.str());
    }
}

EmpiricalType EmpiricalType::from_counts(std::vector<std::uint32_t> counts) {
    EmpiricalType t;
    t.n = std::accumulate(counts.begin(), counts.end(), std::uint32_t{0});
    if (t.n == 0) throw UsageError("type with zero length");
    t.counts = std::move(counts);
    return t;
}

Dist EmpiricalType::as_dist() const {
    Vec v(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) v[i] = static_cast<double>(counts[i]);
    return Dist::normalize(std::move(v));
}

namespace {

std::uint64_t binomial_saturating(std::uint64_t n, std::uint64_t r) {
    if (r > n) return 0;
    r = std::min(r, n - r);
    unsigned __int128 acc = 1;
    for (std::uint64_t i = 1; i <= r; ++i) {
        acc = acc * (n - r + i) / i;
        if (acc > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
    }
    return static_cast<std::uint64_t>(acc);
}

void check_cap(std::uint64_t count, std::uint64_t cap, const char* what) {
    if (count > cap) {
        std::ostringstream os;
        os << what << " would produce " << count << " points, above the cap of " << cap;
        throw CapExceeded(os.str());
    }
}

// Fills positions [pos, k) with every split of `left`, ascending.
bool compositions(std::vector<std::uint32_t>& c, std::size_t pos, std::uint32_t left,
                  const std::function<bool(const std::vector<std::uint32_t>&)>& visit) {
    if (pos + 1 == c.size()) {
        c[pos] = left;
        return visit(c);
    }
    for (std::uint32_t v = 0; v <= left; ++v) {
        c[pos] = v;
        if (!compositions(c, pos + 1, left - v, visit)) return false;
    }
    return true;
}

}  // namespace

std::uint64_t count_types(std::size_t k, std::uint32_t n) {
    if (k == 0) return 0;
    return binomial_saturating(static_cast<std::uint64_t>(n) + k - 1, k - 1);
}

void for_each_type(std::size_t k, std::uint32_t n,
                   const std::function<bool(const std::vector<std::uint32_t>&)>& visit,
                   std::uint64_t cap) {
    if (k < 1) throw UsageError("alphabet size must be positive");
    check_cap(count_types(k, n), cap, "type enumeration");
    std::vector<std::uint32_t> c(k, 0);
    compositions(c, 0, n, visit);
}

std::vector<EmpiricalType> enumerate_types(std::size_t k, std::uint32_t n, std::uint64_t cap) {
    std::vector<EmpiricalType> out;
    out.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(count_types(k, n), cap)));
    for_each_type(k, n, [&](const std::vector<std::uint32_t>& c) {
        EmpiricalType t;
        t.counts = c;
        t.n = n;
        out.push_back(std::move(t));
        return true;
    }, cap);
    return out;
}

std::uint64_t count_grid(std::size_t k, std::uint32_t m) { return count_types(k, m); }

void for_each_grid_point(std::size_t k, std::uint32_t m, const std::function<bool(const Vec&)>& visit,
                         std::uint64_t cap, double floor) {
    if (m == 0) throw UsageError("grid resolution must be positive");
    Vec point(k);
    for_each_type(k, m, [&](const std::vector<std::uint32_t>& c) {
        double sum = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            point[i] = std::max(static_cast<double>(c[i]) / m, floor);
            sum += point[i];
        }
        for (double& v : point) v /= sum;
        return visit(point);
    }, cap);
}

std::vector<Dist> simplex_grid(std::size_t k, std::uint32_t m, std::uint64_t cap) {
    std::vector<Dist> out;
    for_each_grid_point(k, m, [&](const Vec& p) {
        out.push_back(Dist::normalize(p));
        return true;
    }, cap);
    return out;
}

Vec project_to_simplex(const Vec& y) {
    Vec s(y);
    std::sort(s.begin(), s.end(), std::greater<>());
    double cum = 0.0, tau = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) {
        cum += s[j];
        const double t = (cum - 1.0) / static_cast<double>(j + 1);
        if (s[j] - t > 0.0) tau = t;
    }
    Vec x(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) x[i] = std::max(y[i] - tau, 0.0);
    return x;
}

}  // namespace errexp
