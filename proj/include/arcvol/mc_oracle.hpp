#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "arcvol/averaging.hpp"
#include "arcvol/params.hpp"
#include "arcvol/pricer.hpp"

namespace arcvol {

enum class SlowFactorScheme {
    FrozenParabolic,  // Z(s) = A s^2 + B s + C
    StochasticOu,     // exact OU transition with vol-of-vol eta
};

struct SimConfig {
    std::size_t n_paths = 100000;
    std::size_t steps_per_year = 2000;
    std::uint64_t seed = 20160104;
    SlowFactorScheme slow_factor = SlowFactorScheme::FrozenParabolic;
    bool antithetic = false;
    std::optional<double> y0;  // initial fast factor, defaults to m
    std::size_t workers = 1;
    bool record_paths = false;
};

struct McEstimate {
    double price = 0.0;
    double std_error = 0.0;
    std::size_t n_effective = 0;
};

/// Maps an independent standard normal triple to (W^x, W^y, W^z) increments
/// with the model's correlation, through the lower Cholesky factor.
class CorrelatedGaussian {
public:
    explicit CorrelatedGaussian(const ModelParams& model);

    std::array<double, 3> operator()(double g0, double g1, double g2) const noexcept {
        return {l_[0][0] * g0,
                l_[1][0] * g0 + l_[1][1] * g1,
                l_[2][0] * g0 + l_[2][1] * g1 + l_[2][2] * g2};
    }

    const std::array<std::array<double, 3>, 3>& factor() const noexcept { return l_; }

private:
    std::array<std::array<double, 3>, 3> l_{};
};

/// Seed of the independent random stream owned by one path (or antithetic pair).
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

struct PathSample {
    std::size_t path = 0;
    double time = 0.0;
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

struct SimulationResult {
    std::size_t steps = 0;
    double dt = 0.0;
    std::vector<double> x_terminal;
    std::vector<double> y_terminal;
    std::vector<double> z_terminal;
    std::vector<PathSample> paths;  // only when record_paths is set
};

/// Throws Error(ConfigError) describing the first violated constraint.
void validate_sim_config(const ModelParams& model, const OptionSpec& spec, const SimConfig& cfg);

SimulationResult simulate_terminal(const ModelParams& model, const OptionSpec& spec,
                                   const VolFunction& f, const SimConfig& cfg);

/// Discounted call payoff mean and standard error. With antithetics the error
/// is computed from pair averages.
McEstimate mc_price(const ModelParams& model, const OptionSpec& spec, const VolFunction& f,
                    const SimConfig& cfg);

/// One row per (path, time): path,time,x,y,z
void write_path_dump(std::ostream& out, const SimulationResult& sim);

struct SweepRow {
    double epsilon = 0.0;
    std::size_t steps_per_year = 0;
    double asymptotic = 0.0;
    McEstimate mc;
    double abs_error = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    /// Each error is no larger than the previous one plus three combined
    /// standard errors.
    bool non_increasing = true;
};

/// Prices with each epsilon in `eps_list` (positive, strictly descending).
/// The step count per year is raised to at least 20 / epsilon for each row.
SweepResult epsilon_sweep(const ModelParams& model, const OptionSpec& spec, const VolFunction& f,
                          const SimConfig& cfg, const std::vector<double>& eps_list,
                          const PricerOptions& opts = {});

}  // namespace arcvol
