#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <string>
#include <vector>

namespace errexp {

using Vec = std::vector<double>;

inline constexpr double kSupportFloor = 1e-12;
inline constexpr double kSumTolerance = 1e-12;
inline constexpr std::uint64_t kEnumerationCap = 10'000'000;

struct Alphabet {
    std::size_t size = 0;
    std::vector<std::string> labels;

    explicit Alphabet(std::size_t k);
    Alphabet(std::vector<std::string> names);
};

// Probability vector over a finite alphabet. Entries are nonnegative and sum
// to one. Distributions built from user data (the braced constructor and
// model()) must also clear the support floor so every log-ratio is finite.
class Dist {
public:
    Dist() = default;
    Dist(std::initializer_list<double> values);

    static Dist model(Vec values, double floor = kSupportFloor);
    // Rescales nonnegative weights to sum one; zeros are allowed.
    static Dist normalize(Vec weights);
    static Dist uniform(std::size_t k);
    static Dist point_mass(std::size_t k, std::size_t at);

    std::size_t size() const noexcept { return p_.size(); }
    double operator[](std::size_t i) const { return p_[i]; }
    const Vec& values() const noexcept { return p_; }
    operator const Vec&() const noexcept { return p_; }
    auto begin() const noexcept { return p_.begin(); }
    auto end() const noexcept { return p_.end(); }

    double min() const;
    double max() const;
    bool full_support() const;

private:
    explicit Dist(Vec v) : p_(std::move(v)) {}
    Vec p_;
};

void require_same_size(const Vec& a, const Vec& b, const char* what);

// Counts of each symbol in a length-n sequence.
struct EmpiricalType {
    std::vector<std::uint32_t> counts;
    std::uint32_t n = 0;

    static EmpiricalType from_counts(std::vector<std::uint32_t> counts);
    Dist as_dist() const;
};

// Number of compositions of n into k nonnegative parts, saturating at UINT64_MAX.
std::uint64_t count_types(std::size_t k, std::uint32_t n);

// Visits every type of length n over k symbols in ascending lexicographic
// order of the count vector. Returning false from the visitor stops early.
void for_each_type(std::size_t k, std::uint32_t n,
                   const std::function<bool(const std::vector<std::uint32_t>&)>& visit,
                   std::uint64_t cap = kEnumerationCap);

std::vector<EmpiricalType> enumerate_types(std::size_t k, std::uint32_t n,
                                           std::uint64_t cap = kEnumerationCap);

// Grid points j/m on the simplex. Zero coordinates are lifted to the support
// floor and the point renormalized, so the grid can feed log-ratios directly.
std::uint64_t count_grid(std::size_t k, std::uint32_t m);
void for_each_grid_point(std::size_t k, std::uint32_t m,
                         const std::function<bool(const Vec&)>& visit,
                         std::uint64_t cap = kEnumerationCap,
                         double floor = kSupportFloor);
std::vector<Dist> simplex_grid(std::size_t k, std::uint32_t m,
                               std::uint64_t cap = kEnumerationCap);

// Euclidean projection onto the probability simplex (sort-and-threshold).
Vec project_to_simplex(const Vec& y);

}  // namespace errexp
