#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "errexp/adversarial.hpp"
#include "errexp/cli.hpp"
#include "errexp/errors.hpp"
#include "errexp/glrt.hpp"
#include "errexp/lrt.hpp"
#include "errexp/sprt.hpp"

namespace py = pybind11;
using namespace errexp;

namespace {

Dist dist(const Vec& v) { return Dist::model(v); }

py::dict exponents_dict(const ExponentReport& r) {
    py::dict d;
    d["e0"] = r.e0;
    d["e1"] = r.e1;
    d["achiever0"] = r.achiever0.values();
    d["achiever1"] = r.achiever1.values();
    d["multiplier0"] = r.multiplier0;
    d["multiplier1"] = r.multiplier1;
    d["branch0"] = branch_name(r.branch0);
    d["branch1"] = branch_name(r.branch1);
    d["dual0"] = r.dual0;
    d["dual1"] = r.dual1;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Error exponents of binary hypothesis tests under distribution mismatch";

    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
    py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

    m.def("kl", [](const Vec& p, const Vec& q) { return kl(p, q); }, py::arg("p"), py::arg("q"));
    m.def("renyi", [](const Vec& p, const Vec& q, double a) { return renyi(p, q, a); }, py::arg("p"), py::arg("q"),
          py::arg("order"));
    m.def("chi_squared", [](const Vec& p, const Vec& q) { return chi_squared(p, q); }, py::arg("p"), py::arg("q"));
    m.def("total_variation", [](const Vec& p, const Vec& q) { return total_variation(p, q); }, py::arg("p"),
          py::arg("q"));
    m.def("bhattacharyya", [](const Vec& p, const Vec& q) { return bhattacharyya(p, q); }, py::arg("p"),
          py::arg("q"));

    m.def(
        "matched_exponents",
        [](const Vec& p0, const Vec& p1, double gamma) { return exponents_dict(matched_exponents(dist(p0), dist(p1), gamma)); },
        py::arg("p0"), py::arg("p1"), py::arg("gamma"));
    m.def(
        "mismatched_exponents",
        [](const Vec& p0, const Vec& p1, const Vec& h0, const Vec& h1, double gamma) {
            return exponents_dict(mismatched_exponents(dist(p0), dist(p1), dist(h0), dist(h1), gamma));
        },
        py::arg("p0"), py::arg("p1"), py::arg("ph0"), py::arg("ph1"), py::arg("gamma"));
    m.def(
        "worst_case_exponent",
        [](const Vec& h0, const Vec& h1, double gamma, double r, const std::string& divergence, int hyp) {
            const Ball ball(dist(hyp == 0 ? h0 : h1), parse_divergence(divergence), r);
            return worst_case_exponent(dist(h0), dist(h1), gamma, ball, hyp).value;
        },
        py::arg("ph0"), py::arg("ph1"), py::arg("gamma"), py::arg("r"), py::arg("divergence") = "kl",
        py::arg("hyp") = 0);
    m.def(
        "lrt_sensitivity",
        [](const Vec& h0, const Vec& h1, double gamma, double alpha, int hyp) {
            return lrt_sensitivity(dist(h0), dist(h1), gamma, alpha, hyp).theta;
        },
        py::arg("ph0"), py::arg("ph1"), py::arg("gamma"), py::arg("alpha") = 1.0, py::arg("hyp") = 0);

    m.def(
        "hoeffding_exponents",
        [](const Vec& p0, const Vec& p1, const Vec& h0, double gamma) {
            py::dict d;
            d["e0"] = glrt_e0(dist(p0), dist(h0), gamma).e;
            d["e1"] = glrt_e1(dist(h0), dist(p1), gamma).e;
            d["e0_upper"] = glrt_e0_upper(dist(p0), dist(h0), gamma);
            return d;
        },
        py::arg("p0"), py::arg("p1"), py::arg("ph0"), py::arg("gamma"));

    m.def(
        "sprt_exponents",
        [](const Vec& p0, const Vec& p1, const Vec& h0, const Vec& h1) {
            const SprtAnalysis a = sprt_exponents(dist(p0), dist(p1), dist(h0), dist(h1));
            py::dict d;
            d["e0"] = a.e0;
            d["e1"] = a.e1;
            d["drift0"] = a.drift0;
            d["drift1"] = a.drift1;
            d["eta"] = a.eta;
            return d;
        },
        py::arg("p0"), py::arg("p1"), py::arg("ph0"), py::arg("ph1"));
    m.def(
        "sprt_worst_case",
        [](const Vec& h0, const Vec& h1, double r, int hyp) {
            const Ball b0(dist(h0), DivergenceSpec::kl(), r), b1(dist(h1), DivergenceSpec::kl(), r);
            return sprt_worst_case_exact(dist(h0), dist(h1), b0, b1, hyp).value;
        },
        py::arg("ph0"), py::arg("ph1"), py::arg("r"), py::arg("hyp") = 0);
    m.def(
        "simulate_sprt",
        [](const Vec& p_true, const Vec& h0, const Vec& h1, double g0, double g1, int hyp, std::uint64_t trials,
           std::uint64_t seed, unsigned threads) {
            const SimResult s = simulate_sprt(dist(p_true), SprtConfig{dist(h0), dist(h1), g0, g1}, hyp, trials, seed,
                                              threads);
            py::dict d;
            d["trials"] = s.trials;
            d["errors"] = s.errors;
            d["censored"] = s.censored;
            d["err_rate"] = s.err_rate;
            d["mean_tau"] = s.mean_tau;
            return d;
        },
        py::arg("p_true"), py::arg("ph0"), py::arg("ph1"), py::arg("gamma0"), py::arg("gamma1"), py::arg("hyp"),
        py::arg("trials"), py::arg("seed") = 1, py::arg("threads") = 1);

    m.def(
        "adversarial_lrt",
        [](const Vec& p0, const Vec& p1, double gamma, double r, const std::string& divergence, int hyp) {
            return adv_lrt_worst_case(dist(p0), dist(p1), gamma, r, parse_divergence(divergence), hyp).value;
        },
        py::arg("p0"), py::arg("p1"), py::arg("gamma"), py::arg("r"), py::arg("divergence") = "kl",
        py::arg("hyp") = 0);
    m.def(
        "adversarial_sandwich",
        [](const Vec& h0, const Vec& h1, double gamma, double alpha, int hyp) {
            const SandwichReport s = adv_vs_dist_bounds(dist(h0), dist(h1), gamma, alpha, hyp);
            py::dict d;
            d["lower"] = s.lower;
            d["theta_adv"] = s.theta_adv;
            d["theta_dist"] = s.theta_dist;
            d["matched_e"] = s.matched_e;
            return d;
        },
        py::arg("ph0"), py::arg("ph1"), py::arg("gamma"), py::arg("alpha") = 1.0, py::arg("hyp") = 0);

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            const int code = run_cli(args, out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Run one command line; returns (exit status, stdout, stderr).");
}
