#include "arcvol/mc_oracle.hpp"

#include <algorithm>
#include <boost/random/normal_distribution.hpp>
#include <cmath>
#include <ostream>
#include <random>
#include <thread>

#include "arcvol/slow_factor.hpp"
#include "quadrature.hpp"

namespace arcvol {

CorrelatedGaussian::CorrelatedGaussian(const ModelParams& model) {
    const double xy = model.rho_xy();
    const double xz = model.rho_xz();
    const double yz = model.rho_yz();
    l_[0][0] = 1.0;
    l_[1][0] = xy;
    l_[1][1] = std::sqrt(1.0 - xy * xy);
    l_[2][0] = xz;
    l_[2][1] = (yz - xz * xy) / l_[1][1];
    const double rest = 1.0 - l_[2][0] * l_[2][0] - l_[2][1] * l_[2][1];
    if (!(rest > 0.0)) throw Error(ErrorCode::NonPositiveDefinite, "correlation matrix has no Cholesky factor");
    l_[2][2] = std::sqrt(rest);
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    // splitmix64 finalizer over (seed, stream)
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(mix(seed) ^ (stream * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL));
}

namespace {

std::size_t step_count(const OptionSpec& spec, const SimConfig& cfg) {
    const double n = std::ceil(spec.tau() * static_cast<double>(cfg.steps_per_year) - 1e-9);
    return std::max<std::size_t>(1, static_cast<std::size_t>(n));
}

// Everything a path needs that does not change from path to path.
struct PathEngine {
    const VolFunction& f;
    CorrelatedGaussian corr;
    ParabolicSlowFactor arc;
    bool frozen_z;
    bool draw_z;
    std::size_t steps;
    double t0;
    double dt;
    double sqrt_dt;
    double r;
    double m;
    double decay_y;
    double sd_y;
    double m_prime;
    double decay_z;
    double sd_z;
    double x0;
    double y0;
    double z_start;

    PathEngine(const ModelParams& model, const OptionSpec& spec, const VolFunction& vol, const SimConfig& cfg)
        : f(vol), corr(model), arc(parabolic_coefficients(model)) {
        frozen_z = cfg.slow_factor == SlowFactorScheme::FrozenParabolic;
        draw_z = !frozen_z && model.eta() > 0.0;
        steps = step_count(spec, cfg);
        t0 = spec.t;
        dt = spec.tau() / static_cast<double>(steps);
        sqrt_dt = std::sqrt(dt);
        r = model.r();
        m = model.m();
        // Y is stationary N(m, nu^2): exact transition over dt.
        decay_y = std::exp(-dt / model.epsilon());
        sd_y = model.nu() * std::sqrt(-std::expm1(-2.0 * dt / model.epsilon()));
        m_prime = model.m_prime();
        decay_z = std::exp(-model.k() * dt);
        sd_z = model.eta() * std::sqrt(-std::expm1(-2.0 * model.k() * dt) / (2.0 * model.k()));
        x0 = spec.spot;
        y0 = cfg.y0.value_or(model.m());
        z_start = frozen_z ? arc.value(t0) : m_prime + (model.z0() - m_prime) * std::exp(-model.k() * t0);
    }

    double z_at(std::size_t step, double z_prev, double xi_z) const {
        if (frozen_z) return arc.value(t0 + dt * static_cast<double>(step));
        return m_prime + (z_prev - m_prime) * decay_z + sd_z * xi_z;
    }
};

struct PathEnd {
    double x;
    double y;
    double z;
};

// Simulates the paths of one stream: a single path, or an antithetic pair
// sharing normals with opposite signs.
template <class Recorder>
void run_stream(const PathEngine& eng, std::uint64_t seed, std::size_t members, PathEnd* out,
                Recorder&& record) {
    std::mt19937_64 gen(seed);
    boost::random::normal_distribution<double> normal;

    double logx[2] = {std::log(eng.x0), std::log(eng.x0)};
    double y[2] = {eng.y0, eng.y0};
    double z[2] = {eng.z_start, eng.z_start};
    for (std::size_t j = 0; j < members; ++j) record(j, 0, eng.x0, y[j], z[j]);

    for (std::size_t s = 1; s <= eng.steps; ++s) {
        const double g0 = normal(gen);
        const double g1 = normal(gen);
        const double g2 = eng.draw_z ? normal(gen) : 0.0;
        for (std::size_t j = 0; j < members; ++j) {
            const double sign = j == 0 ? 1.0 : -1.0;
            const auto w = eng.corr(sign * g0, sign * g1, sign * g2);
            // Volatility is frozen at its left-point value over the step.
            const double sigma = std::abs(eng.f(y[j], z[j]));
            logx[j] += (eng.r - 0.5 * sigma * sigma) * eng.dt + sigma * eng.sqrt_dt * w[0];
            y[j] = eng.m + (y[j] - eng.m) * eng.decay_y + eng.sd_y * w[1];
            z[j] = eng.z_at(s, z[j], w[2]);
            record(j, s, std::exp(logx[j]), y[j], z[j]);
        }
    }
    for (std::size_t j = 0; j < members; ++j) out[j] = {std::exp(logx[j]), y[j], z[j]};
}

template <class Body>
void parallel_for(std::size_t count, std::size_t workers, Body&& body) {
    workers = std::max<std::size_t>(1, std::min(workers, count));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(count, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&body, begin, end] {
            for (std::size_t i = begin; i < end; ++i) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace

void validate_sim_config(const ModelParams& model, const OptionSpec& spec, const SimConfig& cfg) {
    validate_option(spec);
    if (cfg.n_paths < 2) throw Error(ErrorCode::ConfigError, "n_paths must be >= 2");
    if (cfg.antithetic && cfg.n_paths % 2 != 0)
        throw Error(ErrorCode::ConfigError, "n_paths must be even with antithetic sampling");
    if (cfg.steps_per_year < 1) throw Error(ErrorCode::ConfigError, "steps_per_year must be >= 1");
    if (cfg.workers < 1) throw Error(ErrorCode::ConfigError, "workers must be >= 1");
    if (cfg.y0 && !std::isfinite(*cfg.y0)) throw Error(ErrorCode::ConfigError, "y0 must be finite");
    if (spec.tau() > 0.0) {
        const double dt = spec.tau() / static_cast<double>(step_count(spec, cfg));
        if (dt > model.epsilon() / 10.0 * (1.0 + 1e-12)) {
            throw Error(ErrorCode::ConfigError,
                        "time step " + std::to_string(dt) + " exceeds epsilon/10 = " +
                            std::to_string(model.epsilon() / 10.0) + "; raise steps_per_year");
        }
        if (cfg.record_paths &&
            static_cast<double>(cfg.n_paths) * static_cast<double>(step_count(spec, cfg) + 1) > 5e7) {
            throw Error(ErrorCode::ConfigError, "path recording limited to 5e7 samples");
        }
    }
}

SimulationResult simulate_terminal(const ModelParams& model, const OptionSpec& spec, const VolFunction& f,
                                   const SimConfig& cfg) {
    validate_sim_config(model, spec, cfg);
    SimulationResult res;
    const std::size_t n = cfg.n_paths;
    res.x_terminal.resize(n);
    res.y_terminal.resize(n);
    res.z_terminal.resize(n);

    if (spec.tau() == 0.0) {
        const double z = parabolic_coefficients(model).value(spec.t);
        std::fill(res.x_terminal.begin(), res.x_terminal.end(), spec.spot);
        std::fill(res.y_terminal.begin(), res.y_terminal.end(), cfg.y0.value_or(model.m()));
        std::fill(res.z_terminal.begin(), res.z_terminal.end(), z);
        return res;
    }

    const PathEngine eng(model, spec, f, cfg);
    res.steps = eng.steps;
    res.dt = eng.dt;
    const std::size_t members = cfg.antithetic ? 2 : 1;
    const std::size_t streams = n / members;
    if (cfg.record_paths) res.paths.resize(n * (eng.steps + 1));

    parallel_for(streams, cfg.workers, [&](std::size_t s) {
        PathEnd ends[2];
        const std::size_t first = s * members;
        auto record = [&](std::size_t j, std::size_t step, double x, double y, double z) {
            if (!cfg.record_paths) return;
            const std::size_t path = first + j;
            res.paths[path * (eng.steps + 1) + step] = {path, eng.t0 + eng.dt * static_cast<double>(step), x, y, z};
        };
        run_stream(eng, substream_seed(cfg.seed, s), members, ends, record);
        for (std::size_t j = 0; j < members; ++j) {
            res.x_terminal[first + j] = ends[j].x;
            res.y_terminal[first + j] = ends[j].y;
            res.z_terminal[first + j] = ends[j].z;
        }
    });
    return res;
}

McEstimate mc_price(const ModelParams& model, const OptionSpec& spec, const VolFunction& f,
                    const SimConfig& cfg) {
    validate_sim_config(model, spec, cfg);
    McEstimate est;
    est.n_effective = cfg.n_paths;
    if (spec.tau() == 0.0) {
        est.price = std::max(spec.spot - spec.strike, 0.0);
        return est;
    }

    SimConfig run = cfg;
    run.record_paths = false;
    const PathEngine eng(model, spec, f, run);
    const std::size_t members = cfg.antithetic ? 2 : 1;
    const std::size_t streams = cfg.n_paths / members;
    const double discount = std::exp(-model.r() * spec.tau());

    std::vector<double> samples(streams);
    parallel_for(streams, cfg.workers, [&](std::size_t s) {
        PathEnd ends[2];
        run_stream(eng, substream_seed(cfg.seed, s), members, ends, [](auto&&...) {});
        double acc = 0.0;
        for (std::size_t j = 0; j < members; ++j) acc += std::max(ends[j].x - spec.strike, 0.0);
        samples[s] = discount * acc / static_cast<double>(members);
    });

    // Fixed-order compensated reduction.
    detail::CompensatedSum sum;
    for (double v : samples) sum.add(v);
    const double mean = sum.value() / static_cast<double>(streams);
    detail::CompensatedSum sq;
    for (double v : samples) sq.add((v - mean) * (v - mean));
    const double var = sq.value() / static_cast<double>(streams - 1);
    est.price = mean;
    est.std_error = std::sqrt(var / static_cast<double>(streams));
    return est;
}

void write_path_dump(std::ostream& out, const SimulationResult& sim) {
    const auto old = out.precision(10);
    out << "path,time,x,y,z\n";
    for (const auto& p : sim.paths) out << p.path << ',' << p.time << ',' << p.x << ',' << p.y << ',' << p.z << '\n';
    out.precision(old);
}

SweepResult epsilon_sweep(const ModelParams& model, const OptionSpec& spec, const VolFunction& f,
                          const SimConfig& cfg, const std::vector<double>& eps_list, const PricerOptions& opts) {
    if (eps_list.empty()) throw Error(ErrorCode::ConfigError, "epsilon sweep needs at least one value");
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        if (!(eps_list[i] > 0.0)) throw Error(ErrorCode::ConfigError, "sweep epsilons must be > 0");
        if (i > 0 && !(eps_list[i] < eps_list[i - 1]))
            throw Error(ErrorCode::ConfigError, "sweep epsilons must be strictly descending");
    }

    SweepResult out;
    for (double eps : eps_list) {
        RawModelParams raw = model.raw();
        raw.epsilon = eps;
        const ModelParams scaled = build_model(raw);

        SimConfig run = cfg;
        run.record_paths = false;
        run.steps_per_year = std::max(cfg.steps_per_year, static_cast<std::size_t>(std::ceil(20.0 / eps)));

        SweepRow row;
        row.epsilon = eps;
        row.steps_per_year = run.steps_per_year;
        row.asymptotic = price_first_order(spec, scaled, f, opts).total;
        row.mc = mc_price(scaled, spec, f, run);
        row.abs_error = std::abs(row.asymptotic - row.mc.price);
        out.rows.push_back(row);
    }
    for (std::size_t i = 1; i < out.rows.size(); ++i) {
        const auto& prev = out.rows[i - 1];
        const auto& cur = out.rows[i];
        const double band = 3.0 * std::hypot(prev.mc.std_error, cur.mc.std_error);
        if (cur.abs_error > prev.abs_error + band) out.non_increasing = false;
    }
    return out;
}

}  // namespace arcvol
