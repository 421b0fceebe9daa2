#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "errexp/divergences.hpp"
#include "errexp/simplex.hpp"

namespace errexp {

struct SweepSpec {
    double r_min = 1e-4;
    double r_max = 1e-2;
    int points = 100;
    bool log_spaced = false;

    bool operator==(const SweepSpec&) const = default;
};

struct SimSpec {
    std::uint64_t trials = 100000;
    std::uint64_t seed = 1;
    Vec gamma_grid{4.0, 5.0, 6.0, 7.0};
    std::uint64_t step_cap = 10'000'000;

    bool operator==(const SimSpec&) const = default;
};

// Everything a command needs, read from a JSON document. Exponents and
// thresholds are in nats on disk; display_units only affects output.
struct Scenario {
    std::vector<std::string> alphabet;
    Vec p0;
    Vec p1;
    std::optional<Vec> p0_hat;
    std::optional<Vec> p1_hat;
    double gamma = 0.0;
    std::string divergence = "kl";
    double divergence_alpha = 1.0;  // order, only read for renyi
    double r0 = 0.0;
    double r1 = 0.0;
    SweepSpec sweep;
    SimSpec sim;
    std::string display_units = "nats";

    bool operator==(const Scenario&) const = default;

    Dist nominal0() const { return Dist::model(p0_hat ? *p0_hat : p0); }
    Dist nominal1() const { return Dist::model(p1_hat ? *p1_hat : p1); }
    DivergenceSpec divergence_spec() const;
    // Radii of the sweep, in input order.
    Vec sweep_radii() const;
};

// Parses and validates. Errors name the offending field, or the line and
// column for malformed JSON; `source` prefixes every message.
Scenario parse_scenario(const std::string& text, const std::string& source = "scenario");
Scenario load_scenario(const std::string& path);
std::string serialize_scenario(const Scenario& s);
void validate_scenario(const Scenario& s);

// Runs one command line (without the program name). Exit status 0 on
// success, 1 for invalid input, 2 when a solver fails to converge.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace errexp
