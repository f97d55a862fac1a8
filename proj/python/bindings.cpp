#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "arcvol/averaging.hpp"
#include "arcvol/black_scholes.hpp"
#include "arcvol/calibration.hpp"
#include "arcvol/mc_oracle.hpp"
#include "arcvol/params.hpp"
#include "arcvol/pricer.hpp"
#include "arcvol/slow_factor.hpp"

namespace py = pybind11;
using namespace pybind11::literals;

namespace {

arcvol::ModelParams make_model(double epsilon, double m, double nu, double k, double m_prime, double eta,
                               double rho_xy, double rho_xz, double rho_yz, double z0, double r, double a) {
    return arcvol::build_model({epsilon, m, nu, k, m_prime, eta, rho_xy, rho_xz, rho_yz, z0, r, a});
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "First-order option pricing under a fast/slow stochastic volatility model";

    py::register_exception<arcvol::Error>(m, "ArcvolError", PyExc_ValueError);

    const arcvol::RawModelParams d;
    py::class_<arcvol::ModelParams>(m, "ModelParams")
        .def_property_readonly("epsilon", &arcvol::ModelParams::epsilon)
        .def_property_readonly("m", &arcvol::ModelParams::m)
        .def_property_readonly("nu", &arcvol::ModelParams::nu)
        .def_property_readonly("k", &arcvol::ModelParams::k)
        .def_property_readonly("m_prime", &arcvol::ModelParams::m_prime)
        .def_property_readonly("eta", &arcvol::ModelParams::eta)
        .def_property_readonly("rho_xy", &arcvol::ModelParams::rho_xy)
        .def_property_readonly("rho_xz", &arcvol::ModelParams::rho_xz)
        .def_property_readonly("rho_yz", &arcvol::ModelParams::rho_yz)
        .def_property_readonly("z0", &arcvol::ModelParams::z0)
        .def_property_readonly("r", &arcvol::ModelParams::r)
        .def_property_readonly("a", &arcvol::ModelParams::a);

    m.def("build_model", &make_model, "epsilon"_a = d.epsilon, "m"_a = d.m, "nu"_a = d.nu, "k"_a = d.k,
          "m_prime"_a = d.m_prime, "eta"_a = d.eta, "rho_xy"_a = d.rho_xy, "rho_xz"_a = d.rho_xz,
          "rho_yz"_a = d.rho_yz, "z0"_a = d.z0, "r"_a = d.r, "a"_a = d.a,
          "Validated model parameters; raises ArcvolError listing every violation.");
    m.def("validate_correlations", &arcvol::validate_correlations, "rho_xy"_a, "rho_xz"_a, "rho_yz"_a);

    py::class_<arcvol::OptionSpec>(m, "OptionSpec")
        .def(py::init([](double spot, double strike, double t, double maturity) {
                 arcvol::OptionSpec s{spot, strike, t, maturity};
                 arcvol::validate_option(s);
                 return s;
             }),
             "spot"_a, "strike"_a, "t"_a, "T"_a)
        .def_readonly("spot", &arcvol::OptionSpec::spot)
        .def_readonly("strike", &arcvol::OptionSpec::strike)
        .def_readonly("t", &arcvol::OptionSpec::t)
        .def_readonly("T", &arcvol::OptionSpec::maturity);

    py::class_<arcvol::VolFunction>(m, "VolFunction")
        .def_static("y_constant", &arcvol::VolFunction::y_constant)
        .def_static("separable_exponential", &arcvol::VolFunction::separable_exponential)
        .def_static("tabulated", &arcvol::VolFunction::tabulated, "ys"_a, "fs"_a)
        .def("__call__", &arcvol::VolFunction::operator(), "y"_a, "z"_a)
        .def_property_readonly("kind", [](const arcvol::VolFunction& f) { return std::string(arcvol::to_string(f.kind())); });

    m.def("parabolic_coefficients", [](const arcvol::ModelParams& model) {
        const auto p = arcvol::parabolic_coefficients(model);
        return py::make_tuple(p.a_coef, p.b_coef, p.c_coef);
    });
    m.def("gamma_coefficient", [](double k, double t) { return arcvol::gamma_coefficient(k, t); }, "k"_a, "t"_a);

    m.def("bs_call_price", [](double spot, double strike, double rate, double sigma, double tau) {
        return arcvol::bs_call_price({spot, strike, rate, sigma, tau});
    }, "spot"_a, "strike"_a, "rate"_a, "sigma"_a, "tau"_a);
    m.def("d1d2_call", [](double spot, double strike, double rate, double sigma, double tau) {
        return arcvol::d1d2_call({spot, strike, rate, sigma, tau});
    }, "spot"_a, "strike"_a, "rate"_a, "sigma"_a, "tau"_a);

    m.def("sigma_bar", [](const arcvol::VolFunction& f, double z, double mean, double nu) {
        return arcvol::sigma_bar(f, z, mean, nu);
    }, "f"_a, "z"_a, "m"_a, "nu"_a);
    m.def("effective_v", &arcvol::effective_v, "f"_a, "z"_a, "m"_a, "nu"_a, "rho_xy"_a);

    m.def("modification_factor", &arcvol::modification_factor, "t"_a, "a"_a, "r"_a, "k"_a);
    m.def("p1_time_factor", &arcvol::p1_time_factor, "t"_a, "T"_a, "k"_a);

    py::class_<arcvol::PriceBreakdown>(m, "PriceBreakdown")
        .def_readonly("q0", &arcvol::PriceBreakdown::q0)
        .def_readonly("mod_factor", &arcvol::PriceBreakdown::mod_factor)
        .def_readonly("p0", &arcvol::PriceBreakdown::p0)
        .def_readonly("time_factor", &arcvol::PriceBreakdown::time_factor)
        .def_readonly("sigma_bar", &arcvol::PriceBreakdown::sigma_bar)
        .def_readonly("v", &arcvol::PriceBreakdown::v)
        .def_readonly("d1d2", &arcvol::PriceBreakdown::d1d2)
        .def_readonly("correction", &arcvol::PriceBreakdown::correction)
        .def_readonly("total", &arcvol::PriceBreakdown::total);
    m.def("price_first_order", [](const arcvol::OptionSpec& spec, const arcvol::ModelParams& model,
                                  const arcvol::VolFunction& f) { return arcvol::price_first_order(spec, model, f); },
          "spec"_a, "model"_a, "f"_a);

    py::class_<arcvol::McEstimate>(m, "McEstimate")
        .def_readonly("price", &arcvol::McEstimate::price)
        .def_readonly("std_error", &arcvol::McEstimate::std_error)
        .def_readonly("n_effective", &arcvol::McEstimate::n_effective);
    m.def("mc_price",
          [](const arcvol::ModelParams& model, const arcvol::OptionSpec& spec, const arcvol::VolFunction& f,
             std::size_t n_paths, std::size_t steps_per_year, std::uint64_t seed, bool antithetic, bool stochastic_z) {
              arcvol::SimConfig cfg;
              cfg.n_paths = n_paths;
              cfg.steps_per_year = steps_per_year;
              cfg.seed = seed;
              cfg.antithetic = antithetic;
              cfg.slow_factor = stochastic_z ? arcvol::SlowFactorScheme::StochasticOu
                                             : arcvol::SlowFactorScheme::FrozenParabolic;
              py::gil_scoped_release release;
              return arcvol::mc_price(model, spec, f, cfg);
          },
          "model"_a, "spec"_a, "f"_a, "n_paths"_a = 100000, "steps_per_year"_a = 2000, "seed"_a = 20160104,
          "antithetic"_a = false, "stochastic_z"_a = false);

    py::class_<arcvol::OptionQuote>(m, "OptionQuote")
        .def(py::init([](double t, double maturity, double strike, double mid, double spot, double rate) {
                 return arcvol::OptionQuote{t, maturity, strike, mid, spot, rate};
             }),
             "t"_a, "T"_a, "K"_a, "mid"_a, "x"_a, "r"_a)
        .def_readonly("t", &arcvol::OptionQuote::t)
        .def_readonly("T", &arcvol::OptionQuote::maturity)
        .def_readonly("K", &arcvol::OptionQuote::strike)
        .def_readonly("mid", &arcvol::OptionQuote::mid)
        .def_readonly("x", &arcvol::OptionQuote::spot)
        .def_readonly("r", &arcvol::OptionQuote::rate);
    m.def("calibration_model_price", &arcvol::calibration_model_price, "quote"_a, "a"_a, "k"_a, "v_eff"_a, "sigma_bar"_a);

    py::class_<arcvol::CalibResult>(m, "CalibResult")
        .def_readonly("a_hat", &arcvol::CalibResult::a_hat)
        .def_readonly("k_hat", &arcvol::CalibResult::k_hat)
        .def_readonly("v_eff_hat", &arcvol::CalibResult::v_eff_hat)
        .def_readonly("sigma_bar_hat", &arcvol::CalibResult::sigma_bar_hat)
        .def_readonly("objective", &arcvol::CalibResult::objective)
        .def_readonly("iterations", &arcvol::CalibResult::iterations)
        .def_readonly("converged", &arcvol::CalibResult::converged);
    m.def("calibrate_effective",
          [](const std::vector<arcvol::OptionQuote>& quotes, std::uint64_t seed, std::optional<double> fixed_k) {
              arcvol::CalibOptions opts;
              opts.seed = seed;
              opts.fixed_k = fixed_k;
              return arcvol::calibrate_effective(quotes, opts);
          },
          "quotes"_a, "seed"_a = 7, "fixed_k"_a = py::none());
    m.def("estimate_a", [](const std::vector<arcvol::OptionQuote>& quotes, double k, double r, double sigma_bar) {
        return arcvol::estimate_a(quotes, k, r, sigma_bar).a_hat;
    }, "quotes"_a, "k"_a, "r"_a, "sigma_bar"_a);
}
