#include "errexp/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <mutex>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "errexp/adversarial.hpp"
#include "errexp/errors.hpp"
#include "errexp/glrt.hpp"
#include "errexp/lrt.hpp"
#include "errexp/sprt.hpp"

namespace errexp {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Scenario I/O

template <class T>
T field(const json& j, const std::string& path, const char* key, const T& fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw UsageError("field '" + path + key + "' has the wrong type (found " +
                         std::string(j.at(key).type_name()) + ")");
    }
}

void reject_unknown(const json& j, const std::string& path, std::initializer_list<const char*> known) {
    for (const auto& item : j.items()) {
        if (std::none_of(known.begin(), known.end(), [&](const char* k) { return item.key() == k; }))
            throw UsageError("unknown field '" + path + item.key() + "'");
    }
}

void check_dist(const Vec& v, const char* name, std::size_t k) {
    if (v.size() != k)
        throw UsageError(std::string("field '") + name + "' has " + std::to_string(v.size()) +
                         " entries, expected " + std::to_string(k));
    try {
        (void)Dist::model(v);
    } catch (const std::exception& e) {
        throw UsageError(std::string("field '") + name + "': " + e.what());
    }
}

json num(double x) {
    if (std::isfinite(x)) return x;
    return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
}

json dist_json(const Vec& v) {
    json a = json::array();
    for (double x : v) a.push_back(num(x));
    return a;
}

}  // namespace

DivergenceSpec Scenario::divergence_spec() const {
    if (divergence == "renyi") return DivergenceSpec::renyi(divergence_alpha);
    return parse_divergence(divergence);
}

Vec Scenario::sweep_radii() const {
    Vec r(static_cast<std::size_t>(sweep.points));
    for (int i = 0; i < sweep.points; ++i) {
        const double t = sweep.points == 1 ? 0.0 : static_cast<double>(i) / (sweep.points - 1);
        r[i] = sweep.log_spaced ? std::exp(std::log(sweep.r_min) + t * (std::log(sweep.r_max) - std::log(sweep.r_min)))
                                : sweep.r_min + t * (sweep.r_max - sweep.r_min);
    }
    return r;
}

void validate_scenario(const Scenario& s) {
    if (s.p0.empty() || s.p1.empty()) throw UsageError("fields 'p0' and 'p1' are required");
    const std::size_t k = s.p0.size();
    if (k < 2) throw UsageError("field 'p0' needs at least two symbols");
    if (!s.alphabet.empty() && s.alphabet.size() != k)
        throw UsageError("field 'alphabet' has " + std::to_string(s.alphabet.size()) + " symbols, expected " +
                         std::to_string(k));
    check_dist(s.p0, "p0", k);
    check_dist(s.p1, "p1", k);
    if (s.p0_hat) check_dist(*s.p0_hat, "p0_hat", k);
    if (s.p1_hat) check_dist(*s.p1_hat, "p1_hat", k);
    if (!std::isfinite(s.gamma)) throw UsageError("field 'gamma' must be finite");
    try {
        (void)s.divergence_spec();
    } catch (const std::exception& e) {
        throw UsageError(std::string("field 'divergence': ") + e.what());
    }
    if (!(s.r0 >= 0.0) || !(s.r1 >= 0.0)) throw UsageError("fields 'radii.r0' and 'radii.r1' must be nonnegative");
    if (s.sweep.points < 1) throw UsageError("field 'sweep.points' must be at least 1");
    if (!(s.sweep.r_min >= 0.0) || !(s.sweep.r_min <= s.sweep.r_max))
        throw UsageError("fields 'sweep.r_min' and 'sweep.r_max' need 0 <= r_min <= r_max");
    if (s.sweep.log_spaced && !(s.sweep.r_min > 0.0))
        throw UsageError("field 'sweep.r_min' must be positive for a log-spaced sweep");
    if (s.sim.trials == 0) throw UsageError("field 'sim.trials' must be positive");
    for (double g : s.sim.gamma_grid)
        if (!(g > 0.0)) throw UsageError("field 'sim.gamma_grid' entries must be positive");
    if (s.display_units != "nats" && s.display_units != "bits")
        throw UsageError("field 'display_units' must be \"nats\" or \"bits\"");
}

Scenario parse_scenario(const std::string& text, const std::string& source) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        // Recover line and column from the byte offset.
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw UsageError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON (" +
                         e.what() + ")");
    }
    try {
        if (!j.is_object()) throw UsageError("top level must be an object");
        reject_unknown(j, "", {"alphabet", "p0", "p1", "p0_hat", "p1_hat", "gamma", "divergence", "radii", "sweep",
                               "sim", "display_units"});
        Scenario s;
        s.alphabet = field(j, "", "alphabet", s.alphabet);
        s.p0 = field(j, "", "p0", s.p0);
        s.p1 = field(j, "", "p1", s.p1);
        if (j.contains("p0_hat")) s.p0_hat = field(j, "", "p0_hat", Vec{});
        if (j.contains("p1_hat")) s.p1_hat = field(j, "", "p1_hat", Vec{});
        s.gamma = field(j, "", "gamma", s.gamma);
        if (j.contains("divergence")) {
            const json& d = j.at("divergence");
            if (d.is_string()) {
                s.divergence = d.get<std::string>();
            } else {
                if (!d.is_object()) throw UsageError("field 'divergence' must be a string or an object");
                reject_unknown(d, "divergence.", {"kind", "alpha"});
                s.divergence = field(d, "divergence.", "kind", s.divergence);
                s.divergence_alpha = field(d, "divergence.", "alpha", s.divergence_alpha);
            }
        }
        if (j.contains("radii")) {
            const json& r = j.at("radii");
            reject_unknown(r, "radii.", {"r0", "r1"});
            s.r0 = field(r, "radii.", "r0", s.r0);
            s.r1 = field(r, "radii.", "r1", s.r1);
        }
        if (j.contains("sweep")) {
            const json& w = j.at("sweep");
            reject_unknown(w, "sweep.", {"r_min", "r_max", "points", "log_spaced"});
            s.sweep.r_min = field(w, "sweep.", "r_min", s.sweep.r_min);
            s.sweep.r_max = field(w, "sweep.", "r_max", s.sweep.r_max);
            s.sweep.points = field(w, "sweep.", "points", s.sweep.points);
            s.sweep.log_spaced = field(w, "sweep.", "log_spaced", s.sweep.log_spaced);
        }
        if (j.contains("sim")) {
            const json& m = j.at("sim");
            reject_unknown(m, "sim.", {"trials", "seed", "gamma_grid", "step_cap"});
            s.sim.trials = field(m, "sim.", "trials", s.sim.trials);
            s.sim.seed = field(m, "sim.", "seed", s.sim.seed);
            s.sim.gamma_grid = field(m, "sim.", "gamma_grid", s.sim.gamma_grid);
            s.sim.step_cap = field(m, "sim.", "step_cap", s.sim.step_cap);
        }
        s.display_units = field(j, "", "display_units", s.display_units);
        validate_scenario(s);
        return s;
    } catch (const UsageError& e) {
        throw UsageError(source + ": " + e.what());
    }
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open scenario file '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return parse_scenario(os.str(), path);
}

std::string serialize_scenario(const Scenario& s) {
    json j;
    if (!s.alphabet.empty()) j["alphabet"] = s.alphabet;
    j["p0"] = s.p0;
    j["p1"] = s.p1;
    if (s.p0_hat) j["p0_hat"] = *s.p0_hat;
    if (s.p1_hat) j["p1_hat"] = *s.p1_hat;
    j["gamma"] = s.gamma;
    j["divergence"] = {{"kind", s.divergence}, {"alpha", s.divergence_alpha}};
    j["radii"] = {{"r0", s.r0}, {"r1", s.r1}};
    j["sweep"] = {{"r_min", s.sweep.r_min},
                  {"r_max", s.sweep.r_max},
                  {"points", s.sweep.points},
                  {"log_spaced", s.sweep.log_spaced}};
    j["sim"] = {{"trials", s.sim.trials},
                {"seed", s.sim.seed},
                {"gamma_grid", s.sim.gamma_grid},
                {"step_cap", s.sim.step_cap}};
    j["display_units"] = s.display_units;
    return j.dump(2) + "\n";
}

namespace {

// ---------------------------------------------------------------------------
// Output

enum class Unit { Exponent, Theta, Plain };

struct Column {
    std::string name;
    Unit unit;
};

struct Table {
    std::vector<Column> columns;
    std::vector<std::vector<double>> rows;
    json diagnostics = json::array();
};

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

double display_scale(Unit u, bool bits) {
    if (!bits) return 1.0;
    const double l2 = std::log(2.0);
    switch (u) {
        case Unit::Exponent: return 1.0 / l2;
        case Unit::Theta: return 1.0 / (l2 * l2);
        case Unit::Plain: return 1.0;
    }
    return 1.0;
}

void write_csv(const Table& t, std::ostream& os, bool bits) {
    for (std::size_t c = 0; c < t.columns.size(); ++c) os << (c ? "," : "") << t.columns[c].name;
    os << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t c = 0; c < row.size(); ++c)
            os << (c ? "," : "") << format_number(row[c] * display_scale(t.columns[c].unit, bits));
        os << '\n';
    }
}

json table_json(const Table& t, const std::string& command, const Scenario& s, bool bits) {
    json rows = json::array();
    for (const auto& row : t.rows) {
        json o = json::object();
        for (std::size_t c = 0; c < row.size(); ++c)
            o[t.columns[c].name] = num(row[c] * display_scale(t.columns[c].unit, bits));
        rows.push_back(o);
    }
    return {{"command", command},
            {"units", bits ? "bits" : "nats"},
            {"scenario", json::parse(serialize_scenario(s))},
            {"rows", rows},
            {"diagnostics", t.diagnostics}};
}

// Evaluates fn(0..n-1) on a small pool; results keep input order.
template <class R>
std::vector<R> parallel_map(std::size_t n, unsigned threads, const std::function<R(std::size_t)>& fn) {
    std::vector<R> out(n);
    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    out[i] = fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
    return out;
}

struct Options {
    std::string command;
    std::string variant;
    bool sweep = false;
    unsigned threads = 1;
    SolveOptions solve;
    std::vector<unsigned> sizes{20, 40, 60};
    std::string test = "lrt";
    double step = 0.0;
};

// ---------------------------------------------------------------------------
// Commands

Table exponents(const Scenario& s, const Options& o) {
    const Dist p0 = Dist::model(s.p0), p1 = Dist::model(s.p1);
    const Dist h0 = s.nominal0(), h1 = s.nominal1();
    Table t;
    if (o.variant == "lrt") {
        const ExponentReport r = mismatched_exponents(p0, p1, h0, h1, s.gamma, o.solve);
        t.columns = {{"e0_exact", Unit::Exponent}, {"e1_exact", Unit::Exponent}};
        t.rows.push_back({r.e0, r.e1});
        t.diagnostics.push_back({{"achiever0", dist_json(r.achiever0)},
                                 {"achiever1", dist_json(r.achiever1)},
                                 {"multiplier0", num(r.multiplier0)},
                                 {"multiplier1", num(r.multiplier1)},
                                 {"branch0", branch_name(r.branch0)},
                                 {"branch1", branch_name(r.branch1)},
                                 {"dual0", num(r.dual0)},
                                 {"dual1", num(r.dual1)}});
    } else if (o.variant == "glrt") {
        const GlrtSide e0 = glrt_e0(p0, h0, s.gamma, o.solve);
        const GlrtSide e1 = glrt_e1(h0, p1, s.gamma, o.solve);
        const QcqpReport q = glrt_e0_small_gamma(p0, h0, s.gamma);
        t.columns = {{"e0_exact", Unit::Exponent}, {"e0_approx", Unit::Exponent}, {"e1_exact", Unit::Exponent}};
        t.rows.push_back({e0.e, q.value, e1.e});
        t.diagnostics.push_back({{"achiever0", dist_json(e0.achiever)},
                                 {"achiever1", dist_json(e1.achiever)},
                                 {"branch0", branch_name(e0.branch)},
                                 {"branch1", branch_name(e1.branch)},
                                 {"multiplier1", num(e1.multiplier)},
                                 {"upper_bound0", num(glrt_e0_upper(p0, h0, s.gamma))},
                                 {"quadratic_multiplier", num(q.multiplier)},
                                 {"quadratic_in_window", q.in_window}});
    } else if (o.variant == "sprt") {
        const SprtAnalysis a = sprt_exponents(p0, p1, h0, h1);
        const SprtAnalysis b = sprt_exponents_practical(p0, p1, h0, h1);
        t.columns = {{"e0_exact", Unit::Exponent}, {"e1_exact", Unit::Exponent}};
        t.rows.push_back({a.e0, a.e1});
        t.diagnostics.push_back({{"drift0", num(a.drift0)},
                                 {"drift1", num(a.drift1)},
                                 {"practical_e0", num(b.e0)},
                                 {"practical_e1", num(b.e1)},
                                 {"eta", num(b.eta)},
                                 {"practical_tau0", num(b.expected_tau0)},
                                 {"practical_tau1", num(b.expected_tau1)}});
    } else {
        throw UsageError("exponents takes lrt, glrt or sprt");
    }
    return t;
}

std::vector<std::pair<double, double>> radii_pairs(const Scenario& s, const Options& o) {
    if (!o.sweep) return {{s.r0, s.r1}};
    std::vector<std::pair<double, double>> out;
    for (double r : s.sweep_radii()) out.emplace_back(r, r);
    return out;
}

// Prepends the r column when sweeping (r0 = r1 for every row then).
void finish_rows(Table& t, const std::vector<std::pair<double, double>>& radii, std::vector<std::vector<double>> rows,
                 bool sweep) {
    if (sweep) t.columns.insert(t.columns.begin(), Column{"r", Unit::Plain});
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (sweep) rows[i].insert(rows[i].begin(), radii[i].first);
        t.rows.push_back(std::move(rows[i]));
    }
}

Table worst_case(const Scenario& s, const Options& o) {
    const Dist h0 = s.nominal0(), h1 = s.nominal1();
    const DivergenceSpec spec = s.divergence_spec();
    const double alpha = spec.curvature();
    const auto radii = radii_pairs(s, o);
    Table t;
    std::vector<std::vector<double>> rows;
    if (o.variant == "lrt") {
        const SensitivityReport s0 = lrt_sensitivity(h0, h1, s.gamma, alpha, 0, o.solve);
        const SensitivityReport s1 = lrt_sensitivity(h0, h1, s.gamma, alpha, 1, o.solve);
        t.columns = {{"e0_exact", Unit::Exponent}, {"e0_approx", Unit::Exponent}, {"e1_exact", Unit::Exponent},
                     {"e1_approx", Unit::Exponent}, {"theta0", Unit::Theta},      {"theta1", Unit::Theta}};
        rows = parallel_map<std::vector<double>>(radii.size(), o.threads, [&](std::size_t i) {
            const auto [r0, r1] = radii[i];
            const WorstCaseReport w0 = worst_case_exponent(h0, h1, s.gamma, Ball(h0, spec, r0), 0, o.solve);
            const WorstCaseReport w1 = worst_case_exponent(h0, h1, s.gamma, Ball(h1, spec, r1), 1, o.solve);
            return std::vector<double>{w0.value, s0.approx(r0), w1.value, s1.approx(r1), s0.theta, s1.theta};
        });
        t.diagnostics.push_back({{"matched_e0", num(s0.matched_e)}, {"matched_e1", num(s1.matched_e)},
                                 {"alpha", alpha}, {"branch0", branch_name(s0.branch)}});
        if (!o.sweep) {
            const WorstCaseReport w0 = worst_case_exponent(h0, h1, s.gamma, Ball(h0, spec, s.r0), 0, o.solve);
            const WorstCaseReport w1 = worst_case_exponent(h0, h1, s.gamma, Ball(h1, spec, s.r1), 1, o.solve);
            t.diagnostics.push_back({{"r0", s.r0}, {"r1", s.r1},
                                     {"worst0", dist_json(w0.worst)}, {"achiever0", dist_json(w0.achiever)},
                                     {"worst1", dist_json(w1.worst)}, {"achiever1", dist_json(w1.achiever)},
                                     {"method0", w0.method}, {"method1", w1.method}});
        }
    } else if (o.variant == "glrt") {
        const SensitivityReport s0 = glrt_sensitivity(h0, s.gamma, alpha, o.solve);
        t.columns = {{"e0_exact", Unit::Exponent}, {"e0_approx", Unit::Exponent}, {"e1_exact", Unit::Exponent},
                     {"theta0", Unit::Theta}};
        rows = parallel_map<std::vector<double>>(radii.size(), o.threads, [&](std::size_t i) {
            const auto [r0, r1] = radii[i];
            const WorstCaseReport w0 = glrt_worst_case_e0(h0, s.gamma, Ball(h0, spec, r0), o.solve);
            const WorstCaseReport w1 = glrt_worst_case_e1(h0, s.gamma, Ball(h1, spec, r1), o.solve);
            return std::vector<double>{w0.value, s0.approx(r0), w1.value, s0.theta};
        });
        t.diagnostics.push_back({{"alpha", alpha}, {"matched_e0", num(s0.matched_e)}});
    } else if (o.variant == "sprt") {
        const SprtSensitivity s0 = sprt_sensitivity(h0, h1, alpha, 0);
        const SprtSensitivity s1 = sprt_sensitivity(h0, h1, alpha, 1);
        t.columns = {{"e0_exact", Unit::Exponent}, {"e0_approx", Unit::Exponent}, {"e1_exact", Unit::Exponent},
                     {"e1_approx", Unit::Exponent}, {"theta0", Unit::Theta},      {"theta1", Unit::Theta}};
        rows = parallel_map<std::vector<double>>(radii.size(), o.threads, [&](std::size_t i) {
            const auto [r0, r1] = radii[i];
            const Ball b0(h0, spec, r0), b1(h1, spec, r1);
            const SprtWorstCase w0 = sprt_worst_case_exact(h0, h1, b0, b1, 0, o.solve);
            const SprtWorstCase w1 = sprt_worst_case_exact(h0, h1, b0, b1, 1, o.solve);
            return std::vector<double>{w0.value,
                                       std::max(0.0, s0.e - s0.min_deduction(r0, r1)),
                                       w1.value,
                                       std::max(0.0, s1.e - s1.min_deduction(r1, r0)),
                                       s0.theta_joint,
                                       s1.theta_joint};
        });
        for (const SprtSensitivity* ss : {&s0, &s1})
            t.diagnostics.push_back({{"hyp", ss->hyp}, {"e", num(ss->e)}, {"rho", num(ss->rho)},
                                     {"theta_own", num(ss->theta_own)}, {"theta_other", num(ss->theta_other)},
                                     {"theta_joint", num(ss->theta_joint)}});
    } else {
        throw UsageError("worst-case takes lrt, glrt or sprt");
    }
    finish_rows(t, radii, std::move(rows), o.sweep);
    return t;
}

Table sensitivity(const Scenario& s, const Options& o) {
    const Dist h0 = s.nominal0(), h1 = s.nominal1();
    const double alpha = s.divergence_spec().curvature();
    Table t;
    if (o.variant == "lrt" || o.variant == "adv-lrt") {
        const bool adv = o.variant == "adv-lrt";
        SensitivityReport r[2];
        for (int i = 0; i < 2; ++i)
            r[i] = adv ? adv_lrt_sensitivity(h0, h1, s.gamma, alpha, i, o.solve)
                       : lrt_sensitivity(h0, h1, s.gamma, alpha, i, o.solve);
        t.columns = {{"e0_exact", Unit::Exponent}, {"e1_exact", Unit::Exponent}, {"theta0", Unit::Theta},
                     {"theta1", Unit::Theta}};
        t.rows.push_back({r[0].matched_e, r[1].matched_e, r[0].theta, r[1].theta});
        json d = {{"alpha", alpha}, {"branch", branch_name(r[0].branch)}};
        if (adv) {
            for (int i = 0; i < 2; ++i) {
                const SandwichReport b = adv_vs_dist_bounds(h0, h1, s.gamma, alpha, i, o.solve);
                d["sandwich" + std::to_string(i)] = {{"lower", num(b.lower)}, {"adversarial", num(b.theta_adv)},
                                                     {"distributional", num(b.theta_dist)}};
            }
        }
        t.diagnostics.push_back(d);
    } else if (o.variant == "glrt") {
        const SensitivityReport r = glrt_sensitivity(h0, s.gamma, alpha, o.solve);
        const RatioBounds b = glrt_sensitivity_ratio_bounds(h0, s.gamma);
        t.columns = {{"e0_exact", Unit::Exponent}, {"theta0", Unit::Theta}};
        t.rows.push_back({r.matched_e, r.theta});
        t.diagnostics.push_back({{"alpha", alpha},
                                 {"ratio_h", num(b.h)},
                                 {"ratio_lower", num(b.lower)},
                                 {"ratio_upper_tight", num(b.upper_tight)},
                                 {"ratio_upper_weak", num(b.upper_weak)}});
    } else if (o.variant == "adv-glrt") {
        const AdvGlrtSensitivity r = adv_glrt_sensitivity(h0, h1, s.gamma, alpha, o.solve);
        t.columns = {{"e0_exact", Unit::Exponent}, {"e1_exact", Unit::Exponent}, {"theta0", Unit::Theta},
                     {"theta1", Unit::Theta}};
        t.rows.push_back({r.e0, r.e1, r.theta0, r.theta1});
        t.diagnostics.push_back({{"alpha", alpha}});
    } else if (o.variant == "sprt") {
        const SprtSensitivity a = sprt_sensitivity(h0, h1, alpha, 0);
        const SprtSensitivity b = sprt_sensitivity(h0, h1, alpha, 1);
        t.columns = {{"e0_exact", Unit::Exponent}, {"e1_exact", Unit::Exponent}, {"theta0", Unit::Theta},
                     {"theta1", Unit::Theta}};
        t.rows.push_back({a.e, b.e, a.theta_joint, b.theta_joint});
        for (const SprtSensitivity* ss : {&a, &b})
            t.diagnostics.push_back({{"hyp", ss->hyp}, {"rho", num(ss->rho)}, {"theta_own", num(ss->theta_own)},
                                     {"theta_other", num(ss->theta_other)}, {"theta_joint", num(ss->theta_joint)}});
    } else {
        throw UsageError("sensitivity takes lrt, glrt, sprt, adv-lrt or adv-glrt");
    }
    return t;
}

Table adversarial(const Scenario& s, const Options& o) {
    const Dist h0 = s.nominal0(), h1 = s.nominal1();
    const DivergenceSpec spec = s.divergence_spec();
    require_adversarial_divergence(spec);
    const double alpha = spec.curvature();
    const auto radii = radii_pairs(s, o);
    Table t;
    std::vector<std::vector<double>> rows;
    t.columns = {{"e0_exact", Unit::Exponent}, {"e0_approx", Unit::Exponent}, {"e1_exact", Unit::Exponent},
                 {"e1_approx", Unit::Exponent}, {"theta0", Unit::Theta},      {"theta1", Unit::Theta}};
    auto approx = [](double e, double r, double theta) { return std::max(0.0, e - std::sqrt(r * theta)); };
    if (o.variant == "lrt") {
        const SensitivityReport s0 = adv_lrt_sensitivity(h0, h1, s.gamma, alpha, 0, o.solve);
        const SensitivityReport s1 = adv_lrt_sensitivity(h0, h1, s.gamma, alpha, 1, o.solve);
        std::vector<json> diag(radii.size());
        rows = parallel_map<std::vector<double>>(radii.size(), o.threads, [&](std::size_t i) {
            const auto [r0, r1] = radii[i];
            const AdvReport a0 = adv_lrt_worst_case(h0, h1, s.gamma, r0, spec, 0, o.solve);
            const AdvReport a1 = adv_lrt_worst_case(h0, h1, s.gamma, r1, spec, 1, o.solve);
            diag[i] = {{"r0", r0},
                       {"r1", r1},
                       {"true_type0", dist_json(a0.true_type)},
                       {"perturbed_type0", dist_json(a0.perturbed_type)},
                       {"residual0", num(a0.residual)},
                       {"true_type1", dist_json(a1.true_type)},
                       {"perturbed_type1", dist_json(a1.perturbed_type)},
                       {"residual1", num(a1.residual)}};
            return std::vector<double>{a0.value, approx(s0.matched_e, r0, s0.theta), a1.value,
                                       approx(s1.matched_e, r1, s1.theta), s0.theta, s1.theta};
        });
        for (auto& d : diag) t.diagnostics.push_back(std::move(d));
    } else if (o.variant == "glrt") {
        const AdvGlrtSensitivity ss = adv_glrt_sensitivity(h0, h1, s.gamma, alpha, o.solve);
        rows = parallel_map<std::vector<double>>(radii.size(), o.threads, [&](std::size_t i) {
            const auto [r0, r1] = radii[i];
            const AdvGlrtReport a0 = adv_glrt_worst_case(h0, h1, s.gamma, r0, spec, o.solve);
            const double e1 = r1 == r0 ? a0.e1 : adv_glrt_worst_case(h0, h1, s.gamma, r1, spec, o.solve).e1;
            return std::vector<double>{a0.e0, approx(ss.e0, r0, ss.theta0), e1, approx(ss.e1, r1, ss.theta1),
                                       ss.theta0, ss.theta1};
        });
    } else if (o.variant == "sprt") {
        if (!spec.is_kl()) throw UsageError("adversarial sprt bounds are stated for KL balls");
        t.columns = {{"e0_approx", Unit::Exponent}, {"e1_approx", Unit::Exponent}, {"theta0", Unit::Theta},
                     {"theta1", Unit::Theta}};
        std::vector<json> diag(radii.size());
        rows = parallel_map<std::vector<double>>(radii.size(), o.threads, [&](std::size_t i) {
            const double r = std::max(radii[i].first, radii[i].second);
            const AdvSprtBounds b = adv_sprt_bounds(h0, h1, r, alpha);
            diag[i] = {{"r", r},
                       {"product_bound", num(b.product_bound)},
                       {"vacuous", b.vacuous},
                       {"inflated_tau0", num(b.tau0)},
                       {"inflated_tau1", num(b.tau1)},
                       {"lower_bound", true}};
            return std::vector<double>{std::max(0.0, b.factor0), std::max(0.0, b.factor1), b.theta0, b.theta1};
        });
        for (auto& d : diag) t.diagnostics.push_back(std::move(d));
    } else {
        throw UsageError("adversarial takes lrt, glrt or sprt");
    }
    finish_rows(t, radii, std::move(rows), o.sweep);
    return t;
}

Table simulate(const Scenario& s, const Options& o) {
    if (o.variant != "sprt") throw UsageError("simulate takes sprt");
    const Dist p0 = Dist::model(s.p0), p1 = Dist::model(s.p1);
    const Dist h0 = s.nominal0(), h1 = s.nominal1();
    Table t;
    t.columns = {{"gamma", Unit::Exponent},    {"trials", Unit::Plain},    {"errors0", Unit::Plain},
                 {"errors1", Unit::Plain},      {"censored0", Unit::Plain}, {"censored1", Unit::Plain},
                 {"err0", Unit::Plain},         {"err1", Unit::Plain},      {"mean_tau0", Unit::Plain},
                 {"mean_tau1", Unit::Plain}};
    std::vector<std::pair<double, double>> pts0, pts1;
    for (double g : s.sim.gamma_grid) {
        const SprtConfig cfg{h0, h1, g, g};
        const SimResult a = simulate_sprt(p0, cfg, 0, s.sim.trials, s.sim.seed, o.threads, s.sim.step_cap);
        const SimResult b = simulate_sprt(p1, cfg, 1, s.sim.trials, s.sim.seed ^ 0x9e3779b97f4a7c15ULL, o.threads,
                                          s.sim.step_cap);
        t.rows.push_back({g, static_cast<double>(s.sim.trials), static_cast<double>(a.errors),
                          static_cast<double>(b.errors), static_cast<double>(a.censored),
                          static_cast<double>(b.censored), a.err_rate, b.err_rate, a.mean_tau, b.mean_tau});
        pts0.emplace_back(g, a.err_rate);
        pts1.emplace_back(g, b.err_rate);
    }
    json d = json::object();
    const Drifts d0 = drifts(p0, h0, h1), d1 = drifts(p1, h0, h1);
    d["drift0"] = num(d0.as_h0);
    d["drift1"] = num(d1.as_h1);
    if (d0.as_h0 > 0.0 && d1.as_h1 > 0.0) {
        // -log err0 rises at e0 / drift1 per nat of threshold, err1 at e1 / drift0.
        const SprtAnalysis a = sprt_exponents(p0, p1, h0, h1);
        d["predicted_slope0"] = num(a.e0 / a.drift1);
        d["predicted_slope1"] = num(a.e1 / a.drift0);
    }
    if (pts0.size() >= 3) {
        try {
            d["observed_slope0"] = num(estimate_exponent_slope(pts0));
            d["observed_slope1"] = num(estimate_exponent_slope(pts1));
        } catch (const DomainError& e) {
            d["slope_note"] = e.what();
        }
    }
    t.diagnostics.push_back(d);
    return t;
}

Table oracle(const Scenario& s, const Options& o) {
    const Dist p0 = Dist::model(s.p0), p1 = Dist::model(s.p1);
    const Dist h0 = s.nominal0(), h1 = s.nominal1();
    const std::size_t k = p0.size();
    Table t;
    if (o.variant == "types") {
        double e0 = 0.0, e1 = 0.0;
        std::function<bool(const Vec&)> reject;  // decide hypothesis 1
        if (o.test == "lrt") {
            const ExponentReport r = mismatched_exponents(p0, p1, h0, h1, s.gamma, o.solve);
            e0 = r.e0;
            e1 = r.e1;
            const Vec l = log_ratio(h0, h1);
            reject = [l, g = s.gamma](const Vec& q) { return expectation(q, l) >= g; };
        } else if (o.test == "hoeffding") {
            e0 = glrt_e0(p0, h0, s.gamma, o.solve).e;
            e1 = glrt_e1(h0, p1, s.gamma, o.solve).e;
            reject = [h = h0.values(), g = s.gamma](const Vec& q) { return kl(q, h) >= g; };
        } else {
            throw UsageError("--test takes lrt or hoeffding");
        }
        t.columns = {{"n", Unit::Plain},
                     {"e0_exact", Unit::Exponent},
                     {"e0_approx", Unit::Exponent},
                     {"e1_exact", Unit::Exponent},
                     {"e1_approx", Unit::Exponent}};
        for (unsigned n : o.sizes) {
            auto err0 = [&](const EmpiricalType& ty) { return reject(ty.as_dist()); };
            auto err1 = [&](const EmpiricalType& ty) { return !reject(ty.as_dist()); };
            const double l0 = sanov_log_probability(p0, n, err0);
            const double l1 = sanov_log_probability(p1, n, err1);
            t.rows.push_back({static_cast<double>(n), e0, -l0 / n, e1, -l1 / n});
        }
    } else if (o.variant == "grid") {
        const DivergenceSpec spec = s.divergence_spec();
        const double step = o.step > 0.0 ? o.step : (k == 2 ? 1e-4 : 1.0 / 200.0);
        const Ball b0(h0, spec, s.r0), b1(h1, spec, s.r1);
        const WorstCaseReport w0 = worst_case_exponent(h0, h1, s.gamma, b0, 0, o.solve);
        const WorstCaseReport w1 = worst_case_exponent(h0, h1, s.gamma, b1, 1, o.solve);
        auto exponent = [&](const Vec& p, int hyp) {
            const Dist d = Dist::model(p);
            const ExponentReport r = mismatched_exponents(d, d, h0, h1, s.gamma, o.solve);
            return hyp == 0 ? r.e0 : r.e1;
        };
        const GridResult g0 = grid_oracle([&](const Vec& p) { return exponent(p, 0); },
                                          [&](const Vec& p) { return b0.contains(p); }, k, step, Mode::Min);
        const GridResult g1 = grid_oracle([&](const Vec& p) { return exponent(p, 1); },
                                          [&](const Vec& p) { return b1.contains(p); }, k, step, Mode::Min);
        t.columns = {{"e0_exact", Unit::Exponent}, {"e0_approx", Unit::Exponent}, {"e1_exact", Unit::Exponent},
                     {"e1_approx", Unit::Exponent}};
        t.rows.push_back({w0.value, g0.value, w1.value, g1.value});
        t.diagnostics.push_back({{"step", step},
                                 {"feasible0", g0.feasible},
                                 {"feasible1", g1.feasible},
                                 {"grid_point0", dist_json(g0.point)},
                                 {"grid_point1", dist_json(g1.point)}});
    } else {
        throw UsageError("oracle takes grid or types");
    }
    return t;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw UsageError("cannot write '" + path + "'");
    f << content;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Error exponents of hypothesis tests under distribution mismatch", "errexp"};
    Options o;
    std::string scenario_path, out_path, json_path, units;
    std::optional<double> gamma, r0, r1, r;
    std::optional<std::uint64_t> trials, seed;
    std::optional<std::string> divergence;
    app.add_option("command", o.command, "exponents | worst-case | sensitivity | adversarial | simulate | oracle")
        ->required()
        ->check(CLI::IsMember({"exponents", "worst-case", "sensitivity", "adversarial", "simulate", "oracle"}));
    app.add_option("variant", o.variant, "lrt | glrt | sprt | adv-lrt | adv-glrt | grid | types")->required();
    app.add_option("-s,--scenario", scenario_path, "scenario JSON file")->required();
    app.add_option("-o,--out", out_path, "CSV output path (default: standard output)");
    app.add_option("--json", json_path, "JSON mirror with full diagnostics");
    app.add_flag("--sweep", o.sweep, "sweep the radius over the scenario's sweep range");
    app.add_option("--gamma", gamma, "threshold in nats");
    app.add_option("--r0", r0, "radius around the nominal null");
    app.add_option("--r1", r1, "radius around the nominal alternative");
    app.add_option("--r", r, "set both radii");
    app.add_option("--divergence", divergence, "kl | chi2 | hellinger | renyi:<order>");
    app.add_option("--trials", trials, "Monte Carlo trials");
    app.add_option("--seed", seed, "Monte Carlo seed");
    app.add_option("--threads", o.threads, "worker pool size")->check(CLI::PositiveNumber);
    app.add_option("--units", units, "display units")->check(CLI::IsMember({"nats", "bits"}));
    app.add_option("--n", o.sizes, "sample sizes for the type oracle");
    app.add_option("--test", o.test, "test for the type oracle: lrt | hoeffding");
    app.add_option("--step", o.step, "grid spacing for the grid oracle");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "errexp: " << e.what() << "\n" << "run with --help for usage\n";
        return 1;
    }

    try {
        Scenario s = load_scenario(scenario_path);
        if (gamma) s.gamma = *gamma;
        if (r) s.r0 = s.r1 = *r;
        if (r0) s.r0 = *r0;
        if (r1) s.r1 = *r1;
        if (divergence) {
            const DivergenceSpec d = parse_divergence(*divergence);
            s.divergence = d.kind == DivKind::Renyi ? "renyi" : *divergence;
            if (d.kind == DivKind::Renyi) s.divergence_alpha = d.order;
        }
        if (trials) s.sim.trials = *trials;
        if (seed) s.sim.seed = *seed;
        if (!units.empty()) s.display_units = units;
        validate_scenario(s);

        Table t;
        if (o.command == "exponents") t = exponents(s, o);
        else if (o.command == "worst-case") t = worst_case(s, o);
        else if (o.command == "sensitivity") t = sensitivity(s, o);
        else if (o.command == "adversarial") t = adversarial(s, o);
        else if (o.command == "simulate") t = simulate(s, o);
        else t = oracle(s, o);

        const bool bits = s.display_units == "bits";
        std::ostringstream csv;
        write_csv(t, csv, bits);
        if (out_path.empty()) out << csv.str();
        else write_file(out_path, csv.str());
        if (!json_path.empty())
            write_file(json_path, table_json(t, o.command + " " + o.variant, s, bits).dump(2) + "\n");
        return 0;
    } catch (const SolverError& e) {
        err << "errexp: solver failed: " << e.what() << " (residual " << e.residual() << ")\n";
        return 2;
    } catch (const DriftSignError& e) {
        err << "errexp: " << e.what() << " (hypothesis " << e.hypothesis() << ", drift " << e.drift() << ")\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        err << "errexp: " << e.what() << "\n";
        return 1;
    } catch (const std::domain_error& e) {
        err << "errexp: " << e.what() << "\n";
        return 1;
    } catch (const std::length_error& e) {
        err << "errexp: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "errexp: internal error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace errexp
