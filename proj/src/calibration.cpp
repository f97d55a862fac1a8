#include "arcvol/calibration.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <array>
#include <limits>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "arcvol/black_scholes.hpp"
#include "arcvol/errors.hpp"
#include "arcvol/pricer.hpp"

namespace arcvol {

// ---------------------------------------------------------------------------
// Chain I/O

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream row(line);
    while (std::getline(row, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        cells.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

double parse_number(const std::string& cell, std::size_t line) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(cell, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != cell.size() || !std::isfinite(v))
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": '" + cell + "' is not a number");
    return v;
}

std::string quote_problem(const OptionQuote& q, double tol) {
    if (!(q.spot > 0.0)) return "spot must be > 0";
    if (!(q.strike > 0.0)) return "strike must be > 0";
    if (!(q.t >= 0.0)) return "quote time must be >= 0";
    if (!(q.maturity > q.t)) return "expiry must be after the quote time";
    const double intrinsic = std::max(q.spot - q.strike * std::exp(-q.rate * (q.maturity - q.t)), 0.0);
    if (!(q.mid > intrinsic - tol)) return "mid below intrinsic lower bound " + std::to_string(intrinsic);
    return {};
}

}  // namespace

ChainLoad parse_chain(std::istream& in, double intrinsic_tolerance) {
    static const std::vector<std::string> kHeader{"t", "T", "K", "mid", "x", "r"};
    ChainLoad out;
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        auto cells = split_csv(line);
        if (!have_header) {
            if (cells != kHeader)
                throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": header must be t,T,K,mid,x,r");
            have_header = true;
            continue;
        }
        if (cells.size() != kHeader.size())
            throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": expected 6 columns, got " +
                                                   std::to_string(cells.size()));
        OptionQuote q;
        q.t = parse_number(cells[0], lineno);
        q.maturity = parse_number(cells[1], lineno);
        q.strike = parse_number(cells[2], lineno);
        q.mid = parse_number(cells[3], lineno);
        q.spot = parse_number(cells[4], lineno);
        q.rate = parse_number(cells[5], lineno);
        if (auto why = quote_problem(q, intrinsic_tolerance); !why.empty()) {
            out.rejected.push_back({lineno, why});
            continue;
        }
        out.quotes.push_back(q);
    }
    if (out.quotes.empty()) throw Error(ErrorCode::EmptyChain, "option chain has no usable quotes");
    return out;
}

ChainLoad load_chain(const std::filesystem::path& path, double intrinsic_tolerance) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot open chain file " + path.string());
    return parse_chain(in, intrinsic_tolerance);
}

void write_chain(std::ostream& out, const std::vector<OptionQuote>& quotes) {
    const auto old = out.precision(17);
    out << "t,T,K,mid,x,r\n";
    for (const auto& q : quotes)
        out << q.t << ',' << q.maturity << ',' << q.strike << ',' << q.mid << ',' << q.spot << ',' << q.rate << '\n';
    out.precision(old);
}

// ---------------------------------------------------------------------------
// Model price and objective

double calibration_model_price(const OptionQuote& q, double a, double k, double v_eff, double sigma_bar) {
    const BsInputs bs{q.spot, q.strike, q.rate, sigma_bar, q.maturity - q.t};
    const double q0 = bs_call_price(bs);
    const double g = modification_factor(q.t, a, q.rate, k);
    if (v_eff == 0.0) return g * q0;
    return g * (q0 + v_eff * p1_time_factor(q.t, q.maturity, k) * d1d2_call(bs));
}

namespace {

std::vector<double> quote_weights(const std::vector<OptionQuote>& quotes, QuoteWeighting weighting) {
    std::vector<double> w(quotes.size(), 1.0);
    if (weighting == QuoteWeighting::Uniform) return w;
    // Residuals scaled by 1/vega, normalized to mean weight 1.
    for (std::size_t i = 0; i < quotes.size(); ++i) {
        const auto& q = quotes[i];
        const double tau = q.maturity - q.t;
        double vol = 0.2;
        try {
            vol = implied_vol(q.mid, q.spot, q.strike, q.rate, tau);
        } catch (const Error&) {
        }
        const double vega = bs_greeks({q.spot, q.strike, q.rate, vol, tau}).vega;
        w[i] = vega > 1e-8 ? 1.0 / (vega * vega) : 1.0;
    }
    const double mean = std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(w.size());
    for (auto& x : w) x /= mean;
    return w;
}

double weighted_rmse(const std::vector<OptionQuote>& quotes, const std::vector<double>& w, double a, double k,
                     double v_eff, double sigma_bar) {
    double acc = 0.0;
    for (std::size_t i = 0; i < quotes.size(); ++i) {
        const double diff = calibration_model_price(quotes[i], a, k, v_eff, sigma_bar) - quotes[i].mid;
        acc += w[i] * diff * diff;
    }
    return std::sqrt(acc / static_cast<double>(quotes.size()));
}

std::size_t distinct(const std::vector<OptionQuote>& quotes, double OptionQuote::*field) {
    std::set<double> s;
    for (const auto& q : quotes) s.insert(q.*field);
    return s.size();
}

}  // namespace

double calibration_objective(const std::vector<OptionQuote>& quotes, double a, double k, double v_eff,
                             double sigma_bar, QuoteWeighting weighting) {
    return weighted_rmse(quotes, quote_weights(quotes, weighting), a, k, v_eff, sigma_bar);
}

// ---------------------------------------------------------------------------
// Implied volatility

double implied_vol(double price, double spot, double strike, double rate, double tau) {
    if (!(tau > 0.0)) throw Error(ErrorCode::DomainError, "implied vol needs tau > 0");
    const double lo_price = bs_call_price({spot, strike, rate, 0.0, tau});
    if (!(price > lo_price) || !(price < spot))
        throw Error(ErrorCode::DomainError, "price outside the no-arbitrage range for implied vol");
    auto f = [&](double vol) { return bs_call_price({spot, strike, rate, vol, tau}) - price; };
    double lo = 1e-6;
    double hi = 1.0;
    while (f(hi) < 0.0 && hi < 64.0) hi *= 2.0;
    if (f(hi) < 0.0 || f(lo) > 0.0) throw Error(ErrorCode::DomainError, "implied vol not bracketed");
    boost::uintmax_t iters = 200;
    const auto root = boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(50), iters);
    return 0.5 * (root.first + root.second);
}

double near_money_implied_vol(const std::vector<OptionQuote>& quotes) {
    if (quotes.empty()) throw Error(ErrorCode::InsufficientData, "no quotes for implied vol");
    const auto it = std::min_element(quotes.begin(), quotes.end(), [](const auto& l, const auto& r) {
        return std::abs(std::log(l.strike / l.spot)) < std::abs(std::log(r.strike / r.spot));
    });
    return implied_vol(it->mid, it->spot, it->strike, it->rate, it->maturity - it->t);
}

// ---------------------------------------------------------------------------
// estimate_a

namespace {

template <class F>
double golden_section(F&& f, double lo, double hi, double tol) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo;
    double b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    // Compare against the endpoints so a pinned optimum is reported as such.
    const double mid = 0.5 * (a + b);
    double best = mid;
    double fbest = f(mid);
    for (double x : {lo, hi}) {
        const double fx = f(x);
        if (fx < fbest) {
            best = x;
            fbest = fx;
        }
    }
    return best;
}

struct AFit {
    double a;
    double objective;
    bool pinned;
};

AFit fit_a(const std::vector<OptionQuote>& quotes, double k, double r, double sigma_bar, const ABounds& bounds) {
    std::vector<OptionQuote> qs = quotes;
    for (auto& q : qs) q.rate = r;
    const std::vector<double> w(qs.size(), 1.0);
    auto objective = [&](double a) { return weighted_rmse(qs, w, a, k, 0.0, sigma_bar); };

    const double tol = 1e-10;
    const double centre = 2.0 * r;
    std::vector<std::pair<double, double>> sides;
    if (bounds.lo < centre - bounds.gap) sides.emplace_back(bounds.lo, std::min(bounds.hi, centre - bounds.gap));
    if (bounds.hi > centre + bounds.gap) sides.emplace_back(std::max(bounds.lo, centre + bounds.gap), bounds.hi);
    if (sides.empty()) throw Error(ErrorCode::InvalidParameter, "a bounds leave no admissible interval");

    AFit best{0.0, std::numeric_limits<double>::infinity(), true};
    for (const auto& [lo, hi] : sides) {
        const double a = golden_section(objective, lo, hi, tol);
        const double obj = objective(a);
        if (obj < best.objective) {
            const bool pinned = std::abs(a - lo) <= 10 * tol || std::abs(a - hi) <= 10 * tol;
            best = {a, obj, pinned};
        }
    }
    return best;
}

}  // namespace

AEstimate estimate_a(const std::vector<OptionQuote>& quotes, double k, double r, double sigma_bar,
                     const ABounds& bounds) {
    if (quotes.size() < 2 || distinct(quotes, &OptionQuote::maturity) < 2)
        throw Error(ErrorCode::InsufficientData, "estimate_a needs >= 2 quotes spanning >= 2 maturities");
    if (!(k > 0.0) || !(sigma_bar > 0.0))
        throw Error(ErrorCode::InvalidParameter, "estimate_a needs k > 0 and sigma_bar > 0");

    const AFit fit = fit_a(quotes, k, r, sigma_bar, bounds);
    if (fit.pinned)
        throw Error(ErrorCode::NoInteriorMinimum,
                    "least-squares a pinned to a search bound at a=" + std::to_string(fit.a));

    AEstimate out;
    out.a_hat = fit.a;
    out.objective = fit.objective;

    std::map<double, std::vector<OptionQuote>> by_strike;
    for (const auto& q : quotes) by_strike[q.strike].push_back(q);
    for (const auto& [strike, subset] : by_strike) {
        const AFit s = fit_a(subset, k, r, sigma_bar, bounds);
        out.per_strike.push_back({strike, s.a, subset.size()});
    }
    return out;
}

// ---------------------------------------------------------------------------
// calibrate_effective

namespace {

enum Param { kA = 0, kK, kV, kSigma, kParamCount };

struct Box {
    double lo;
    double hi;

    double to_param(double u) const { return lo + (hi - lo) / (1.0 + std::exp(-u)); }
    double to_free(double x) const {
        const double s = std::clamp((x - lo) / (hi - lo), 1e-12, 1.0 - 1e-12);
        return std::log(s / (1.0 - s));
    }
};

struct Problem {
    const std::vector<OptionQuote>* quotes;
    std::vector<double> weights;
    std::array<Box, kParamCount> boxes;
    std::array<std::optional<double>, kParamCount> fixed;
    std::vector<int> free;  // indices of free parameters

    std::array<double, kParamCount> unpack(const gsl_vector* u) const {
        std::array<double, kParamCount> p{};
        for (int i = 0; i < kParamCount; ++i) p[i] = fixed[i].value_or(0.0);
        for (std::size_t j = 0; j < free.size(); ++j)
            p[free[j]] = boxes[free[j]].to_param(gsl_vector_get(u, j));
        return p;
    }

    double objective(const std::array<double, kParamCount>& p) const {
        try {
            const double v = weighted_rmse(*quotes, weights, p[kA], p[kK], p[kV], p[kSigma]);
            return std::isfinite(v) ? v : 1e100;
        } catch (const Error&) {
            return 1e100;
        }
    }
};

double gsl_objective(const gsl_vector* u, void* data) {
    const auto* prob = static_cast<const Problem*>(data);
    return prob->objective(prob->unpack(u));
}

struct MinimizerDeleter {
    void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};
struct VectorDeleter {
    void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};

struct RunResult {
    std::vector<double> u;
    double objective;
    std::size_t iterations;
    bool converged;
};

RunResult nelder_mead(Problem& prob, std::vector<double> start, std::size_t max_iter, double tol) {
    const std::size_t n = prob.free.size();
    std::unique_ptr<gsl_vector, VectorDeleter> x(gsl_vector_alloc(n));
    std::unique_ptr<gsl_vector, VectorDeleter> step(gsl_vector_alloc(n));
    for (std::size_t j = 0; j < n; ++j) gsl_vector_set(x.get(), j, start[j]);
    gsl_vector_set_all(step.get(), 0.5);

    gsl_multimin_function fn{&gsl_objective, n, &prob};
    std::unique_ptr<gsl_multimin_fminimizer, MinimizerDeleter> s(
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n));
    gsl_multimin_fminimizer_set(s.get(), &fn, x.get(), step.get());

    std::size_t iter = 0;
    bool converged = false;
    while (iter < max_iter) {
        ++iter;
        if (gsl_multimin_fminimizer_iterate(s.get()) != GSL_SUCCESS) break;
        if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s.get()), tol) == GSL_SUCCESS) {
            converged = true;
            break;
        }
    }
    RunResult out;
    out.u.resize(n);
    for (std::size_t j = 0; j < n; ++j) out.u[j] = gsl_vector_get(s->x, j);
    out.objective = s->fval;
    out.iterations = iter;
    out.converged = converged;
    return out;
}

}  // namespace

CalibResult calibrate_effective(const std::vector<OptionQuote>& quotes, const CalibOptions& opts) {
    if (quotes.size() < 4 || distinct(quotes, &OptionQuote::maturity) < 2 ||
        distinct(quotes, &OptionQuote::strike) < 2) {
        throw Error(ErrorCode::InsufficientData,
                    "calibration needs >= 4 quotes spanning >= 2 maturities and >= 2 strikes");
    }
    gsl_set_error_handler_off();

    const auto& b = opts.bounds;
    Problem prob;
    prob.quotes = &quotes;
    prob.weights = quote_weights(quotes, opts.weighting);
    prob.boxes = {Box{b.a.lo, b.a.hi}, Box{b.k_lo, b.k_hi}, Box{b.v_lo, b.v_hi}, Box{b.sigma_lo, b.sigma_hi}};
    prob.fixed = {opts.fixed_a, opts.fixed_k, opts.fixed_v_eff, opts.fixed_sigma_bar};
    for (int i = 0; i < kParamCount; ++i)
        if (!prob.fixed[i]) prob.free.push_back(i);

    CalibResult best;
    best.objective = std::numeric_limits<double>::infinity();
    std::array<double, kParamCount> best_p{};

    if (prob.free.empty()) {
        gsl_vector* none = nullptr;
        best_p = prob.unpack(none);
        best.objective = prob.objective(best_p);
        best.converged = true;
    }

    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t restarts = prob.free.empty() ? 0 : std::max<std::size_t>(1, opts.restarts);
    std::size_t total_iter = 0;

    for (std::size_t rs = 0; rs < restarts; ++rs) {
        std::vector<double> u(prob.free.size());
        for (std::size_t j = 0; j < u.size(); ++j) {
            const Box& box = prob.boxes[prob.free[j]];
            u[j] = box.to_free(box.lo + (box.hi - box.lo) * (0.02 + 0.96 * unit(rng)));
        }
        {
            std::unique_ptr<gsl_vector, VectorDeleter> v(gsl_vector_alloc(u.size()));
            for (std::size_t j = 0; j < u.size(); ++j) gsl_vector_set(v.get(), j, u[j]);
            best.restart_start_objectives.push_back(prob.objective(prob.unpack(v.get())));
        }

        // Re-seed the simplex at the converged point until it stops improving;
        // a collapsed simplex can otherwise stall in long narrow valleys.
        RunResult run = nelder_mead(prob, u, opts.max_iterations, opts.simplex_tolerance);
        total_iter += run.iterations;
        for (int polish = 0; polish < 20 && total_iter < opts.max_iterations * restarts; ++polish) {
            RunResult again = nelder_mead(prob, run.u, opts.max_iterations, opts.simplex_tolerance);
            total_iter += again.iterations;
            const bool improved = again.objective < run.objective * (1.0 - 1e-6) && again.objective < run.objective - 1e-15;
            if (again.objective <= run.objective) run = again;
            if (!improved) break;
        }
        best.restart_objectives.push_back(run.objective);

        if (run.objective < best.objective) {
            std::unique_ptr<gsl_vector, VectorDeleter> v(gsl_vector_alloc(run.u.size()));
            for (std::size_t j = 0; j < run.u.size(); ++j) gsl_vector_set(v.get(), j, run.u[j]);
            best_p = prob.unpack(v.get());
            best.objective = run.objective;
            best.converged = run.converged;
        }
    }

    // a = 2r is inadmissible; move off the excluded band if the fit landed in it.
    const double r0 = quotes.front().rate;
    if (!prob.fixed[kA] && std::abs(best_p[kA] - 2.0 * r0) < b.a.gap) {
        const double lo = 2.0 * r0 - b.a.gap;
        const double hi = 2.0 * r0 + b.a.gap;
        auto p_lo = best_p;
        auto p_hi = best_p;
        p_lo[kA] = lo;
        p_hi[kA] = hi;
        const double o_lo = prob.objective(p_lo);
        const double o_hi = prob.objective(p_hi);
        best_p = o_lo <= o_hi ? p_lo : p_hi;
        best.objective = std::min(o_lo, o_hi);
    }

    best.a_hat = best_p[kA];
    best.k_hat = best_p[kK];
    best.v_eff_hat = best_p[kV];
    best.sigma_bar_hat = best_p[kSigma];
    best.iterations = total_iter;
    return best;
}

void write_calib_report(std::ostream& out, const CalibResult& res) {
    const auto old = out.precision(10);
    out << "a_hat=" << res.a_hat << '\n'
        << "k_hat=" << res.k_hat << '\n'
        << "v_eff_hat=" << res.v_eff_hat << '\n'
        << "sigma_bar_hat=" << res.sigma_bar_hat << '\n'
        << "objective=" << res.objective << '\n'
        << "iterations=" << res.iterations << '\n'
        << "converged=" << (res.converged ? "true" : "false") << '\n';
    out.precision(old);
}

}  // namespace arcvol
