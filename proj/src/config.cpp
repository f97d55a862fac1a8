#include "arcvol/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace arcvol {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
    throw Error(ErrorCode::ParseError, "key '" + key + "': '" + value + "' is not " + expected);
}

double to_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) bad_value(key, v, "a number");
    return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) bad_value(key, v, "a non-negative integer");
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    bad_value(key, v, "a boolean");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::istringstream in(v);
    std::string cell;
    while (std::getline(in, cell, ',')) out.push_back(to_double(key, trim(cell)));
    if (out.empty()) bad_value(key, v, "a comma-separated list of numbers");
    return out;
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value,
                                  const std::filesystem::path& base)>;

template <class Field>
Setter number(Field field) {
    return [field](RunConfig& c, const std::string& k, const std::string& v, const auto&) {
        std::invoke(field, c) = to_double(k, v);
    };
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& v) {
    std::filesystem::path p(v);
    return p.is_relative() && !base.empty() ? base / p : p;
}

const std::vector<std::pair<std::string, Setter>>& setters() {
    static const std::vector<std::pair<std::string, Setter>> table = {
        {"epsilon", number([](RunConfig& c) -> double& { return c.model.epsilon; })},
        {"m", number([](RunConfig& c) -> double& { return c.model.m; })},
        {"nu", number([](RunConfig& c) -> double& { return c.model.nu; })},
        {"k", number([](RunConfig& c) -> double& { return c.model.k; })},
        {"m_prime", number([](RunConfig& c) -> double& { return c.model.m_prime; })},
        {"eta", number([](RunConfig& c) -> double& { return c.model.eta; })},
        {"rho_xy", number([](RunConfig& c) -> double& { return c.model.rho_xy; })},
        {"rho_xz", number([](RunConfig& c) -> double& { return c.model.rho_xz; })},
        {"rho_yz", number([](RunConfig& c) -> double& { return c.model.rho_yz; })},
        {"z0", number([](RunConfig& c) -> double& { return c.model.z0; })},
        {"r", number([](RunConfig& c) -> double& { return c.model.r; })},
        {"a", number([](RunConfig& c) -> double& { return c.model.a; })},
        {"spot", number([](RunConfig& c) -> double& { return c.option.spot; })},
        {"strike", number([](RunConfig& c) -> double& { return c.option.strike; })},
        {"t", number([](RunConfig& c) -> double& { return c.option.t; })},
        {"T", number([](RunConfig& c) -> double& { return c.option.maturity; })},
        {"vol_function",
         [](RunConfig& c, const std::string& k, const std::string& v, const auto&) {
             if (v == "y_constant") c.vol_kind = VolFunction::Kind::YConstant;
             else if (v == "separable_exponential") c.vol_kind = VolFunction::Kind::SeparableExponential;
             else if (v == "tabulated") c.vol_kind = VolFunction::Kind::Tabulated;
             else bad_value(k, v, "one of y_constant, separable_exponential, tabulated");
         }},
        {"vol_table",
         [](RunConfig& c, const std::string&, const std::string& v, const auto& base) { c.vol_table = resolve(base, v); }},
        {"sigma_bar_definition",
         [](RunConfig& c, const std::string& k, const std::string& v, const auto&) {
             if (v == "rms") c.pricer.sigma_bar_definition = SigmaBarDefinition::RootMeanSquare;
             else if (v == "mean") c.pricer.sigma_bar_definition = SigmaBarDefinition::Mean;
             else bad_value(k, v, "rms or mean");
         }},
        {"vol_freeze",
         [](RunConfig& c, const std::string& k, const std::string& v, const auto&) {
             if (v == "pointwise") c.pricer.vol_freeze = VolFreeze::Pointwise;
             else if (v == "integrated") c.pricer.vol_freeze = VolFreeze::MaturityIntegrated;
             else bad_value(k, v, "pointwise or integrated");
         }},
        {"correction_form",
         [](RunConfig& c, const std::string& k, const std::string& v, const auto&) {
             if (v == "black_scholes") c.pricer.correction_form = CorrectionForm::OnBlackScholes;
             else if (v == "modified") c.pricer.correction_form = CorrectionForm::OnModified;
             else bad_value(k, v, "black_scholes or modified");
         }},
        {"n_paths", [](RunConfig& c, const std::string& k, const std::string& v, const auto&) { c.sim.n_paths = to_uint(k, v); }},
        {"steps_per_year",
         [](RunConfig& c, const std::string& k, const std::string& v, const auto&) { c.sim.steps_per_year = to_uint(k, v); }},
        {"seed", [](RunConfig& c, const std::string& k, const std::string& v, const auto&) { c.sim.seed = to_uint(k, v); }},
        {"slow_factor",
         [](RunConfig& c, const std::string& k, const std::string& v, const auto&) {
             if (v == "frozen_parabolic") c.sim.slow_factor = SlowFactorScheme::FrozenParabolic;
             else if (v == "stochastic_ou") c.sim.slow_factor = SlowFactorScheme::StochasticOu;
             else bad_value(k, v, "frozen_parabolic or stochastic_ou");
         }},
        {"antithetic", [](RunConfig& c, const std::string& k, const std::string& v, const auto&) { c.sim.antithetic = to_bool(k, v); }},
        {"y0", [](RunConfig& c, const std::string& k, const std::string& v, const auto&) { c.sim.y0 = to_double(k, v); }},
        {"workers", [](RunConfig& c, const std::string& k, const std::string& v, const auto&) { c.sim.workers = to_uint(k, v); }},
        {"sweep_epsilons",
         [](RunConfig& c, const std::string& k, const std::string& v, const auto&) { c.sweep_epsilons = to_list(k, v); }},
        {"chain", [](RunConfig& c, const std::string&, const std::string& v, const auto& base) { c.chain = resolve(base, v); }},
        {"calib_seed", [](RunConfig& c, const std::string& k, const std::string& v, const auto&) { c.calib.seed = to_uint(k, v); }},
        {"calib_restarts",
         [](RunConfig& c, const std::string& k, const std::string& v, const auto&) { c.calib.restarts = to_uint(k, v); }},
        {"calib_max_iterations",
         [](RunConfig& c, const std::string& k, const std::string& v, const auto&) { c.calib.max_iterations = to_uint(k, v); }},
        {"calib_weighting",
         [](RunConfig& c, const std::string& k, const std::string& v, const auto&) {
             if (v == "uniform") c.calib.weighting = QuoteWeighting::Uniform;
             else if (v == "vega") c.calib.weighting = QuoteWeighting::Vega;
             else bad_value(k, v, "uniform or vega");
         }},
        {"calib_fix_a", [](RunConfig& c, const std::string& k, const std::string& v, const auto&) { c.calib.fixed_a = to_double(k, v); }},
        {"calib_fix_k", [](RunConfig& c, const std::string& k, const std::string& v, const auto&) { c.calib.fixed_k = to_double(k, v); }},
        {"calib_fix_v_eff",
         [](RunConfig& c, const std::string& k, const std::string& v, const auto&) { c.calib.fixed_v_eff = to_double(k, v); }},
        {"calib_fix_sigma_bar",
         [](RunConfig& c, const std::string& k, const std::string& v, const auto&) { c.calib.fixed_sigma_bar = to_double(k, v); }},
        {"a_lo", number([](RunConfig& c) -> double& { return c.calib.bounds.a.lo; })},
        {"a_hi", number([](RunConfig& c) -> double& { return c.calib.bounds.a.hi; })},
        {"k_lo", number([](RunConfig& c) -> double& { return c.calib.bounds.k_lo; })},
        {"k_hi", number([](RunConfig& c) -> double& { return c.calib.bounds.k_hi; })},
        {"v_lo", number([](RunConfig& c) -> double& { return c.calib.bounds.v_lo; })},
        {"v_hi", number([](RunConfig& c) -> double& { return c.calib.bounds.v_hi; })},
        {"sigma_lo", number([](RunConfig& c) -> double& { return c.calib.bounds.sigma_lo; })},
        {"sigma_hi", number([](RunConfig& c) -> double& { return c.calib.bounds.sigma_hi; })},
    };
    return table;
}

}  // namespace

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> out;
        for (const auto& [k, _] : setters()) out.push_back(k);
        return out;
    }();
    return keys;
}

VolFunction RunConfig::vol_function() const {
    switch (vol_kind) {
        case VolFunction::Kind::YConstant: return VolFunction::y_constant();
        case VolFunction::Kind::SeparableExponential: return VolFunction::separable_exponential();
        case VolFunction::Kind::Tabulated: return VolFunction::load_table(vol_table);
    }
    throw Error(ErrorCode::ConfigError, "unknown vol function");
}

RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
    std::map<std::string, const Setter*> lookup;
    for (const auto& [k, s] : setters()) lookup.emplace(k, &s);

    RunConfig cfg;
    std::set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorCode::ParseError, "config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        auto it = lookup.find(key);
        if (it == lookup.end())
            throw Error(ErrorCode::ConfigError, "config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        if (!seen.insert(key).second)
            throw Error(ErrorCode::ConfigError, "config line " + std::to_string(lineno) + ": key '" + key + "' repeated");
        try {
            (*it->second)(cfg, key, value, base_dir);
        } catch (const Error& e) {
            throw Error(e.code(), "config line " + std::to_string(lineno) + ": " + e.what());
        }
    }

    if (cfg.vol_kind == VolFunction::Kind::Tabulated) {
        if (cfg.vol_table.empty()) throw Error(ErrorCode::ConfigError, "vol_function = tabulated needs vol_table");
        if (!std::filesystem::exists(cfg.vol_table))
            throw Error(ErrorCode::ConfigError, "vol_table not found: " + cfg.vol_table.string());
    }
    if (!cfg.chain.empty() && !std::filesystem::exists(cfg.chain))
        throw Error(ErrorCode::ConfigError, "chain file not found: " + cfg.chain.string());
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot open config " + path.string());
    return parse_config(in, path.parent_path());
}

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::SingularTime:
        case ErrorCode::LogDomain:
        case ErrorCode::QuadratureFailure:
        case ErrorCode::CenteringFailure:
            return 3;
        case ErrorCode::EmptyChain:
        case ErrorCode::InsufficientData:
        case ErrorCode::NoInteriorMinimum:
            return 4;
        case ErrorCode::NonConvergence:
            return 0;
        default:
            return 2;
    }
}

}  // namespace arcvol
