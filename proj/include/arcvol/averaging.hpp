#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <memory>
#include <shared_mutex>
#include <span>
#include <string>
#include <tuple>
#include <vector>

namespace arcvol {

/// Volatility surface sigma = f(y, z), positive on the domain of interest.
class VolFunction {
public:
    enum class Kind { YConstant, SeparableExponential, Tabulated };

    /// f(y, z) = z
    static VolFunction y_constant();
    /// f(y, z) = z e^y
    static VolFunction separable_exponential();
    /// Piecewise-linear f(y) through (y_i, f_i) at a fixed z; flat beyond the
    /// end nodes. Nodes must be strictly increasing and f_i > 0.
    static VolFunction tabulated(std::vector<double> ys, std::vector<double> fs);
    /// Two whitespace- or comma-separated columns (y, f); '#' starts a comment.
    static VolFunction load_table(const std::filesystem::path& path);

    double operator()(double y, double z) const;

    Kind kind() const noexcept { return kind_; }
    bool depends_on_y() const noexcept { return kind_ != Kind::YConstant; }
    /// Interior kinks of f in y (table nodes); empty for the smooth kinds.
    std::span<const double> knots() const noexcept;
    /// Identity used as a memo key.
    const std::string& key() const noexcept { return key_; }

private:
    struct Table {
        std::vector<double> ys;
        std::vector<double> fs;
    };

    VolFunction(Kind kind, std::shared_ptr<const Table> table, std::string key)
        : kind_(kind), table_(std::move(table)), key_(std::move(key)) {}

    Kind kind_;
    std::shared_ptr<const Table> table_;
    std::string key_;
};

std::string_view to_string(VolFunction::Kind kind);

enum class SigmaBarDefinition {
    RootMeanSquare,  // sigma_bar^2 = E_y[f^2]; centers the Poisson right-hand side
    Mean,            // sigma_bar = E_y[f]
};

struct Average {
    double value = 0.0;
    std::size_t nodes = 0;      // quadrature nodes at convergence
    double last_change = 0.0;   // relative change of the final refinement
};

/// E[g(Y)] for Y ~ N(m, nu^2). Gauss-Hermite with node doubling 16..512 when
/// `knots` is empty, composite Gauss-Legendre split at the knots otherwise.
/// Throws QuadratureFailure if refinement does not settle to `rel_tol`.
Average gaussian_average(const std::function<double(double)>& g, double m, double nu, std::span<const double> knots = {},
                         double rel_tol = 1e-10);

Average sigma_bar_detail(const VolFunction& f, double z, double m, double nu,
                         SigmaBarDefinition def = SigmaBarDefinition::RootMeanSquare);

double sigma_bar(const VolFunction& f, double z, double m, double nu,
                 SigmaBarDefinition def = SigmaBarDefinition::RootMeanSquare);

/// phi'(y) on a uniform grid over [m - 8 nu, m + 8 nu], solving
/// (m - y) phi' + nu^2 phi'' = f^2 - sigma_bar^2 with sigma_bar^2 = E_y[f^2].
struct PhiDerivative {
    std::vector<double> y;
    std::vector<double> dphi;
    double sigma_bar = 0.0;
    double m = 0.0;
    double nu = 0.0;
    double centering = 0.0;     // relative mass of f^2 - sigma_bar^2 over the grid
    /// E_y[f phi'], Richardson-extrapolated over the last two grids.
    double mean_f_dphi = 0.0;
    std::size_t cells = 0;
    std::size_t quadrature_nodes = 0;
    double last_change = 0.0;
};

PhiDerivative solve_phi_derivative(const VolFunction& f, double z, double m, double nu);

/// Applies L0 = (m - y) d/dy + nu^2 d^2/dy^2 to the reconstructed phi by central
/// differences of phi' and returns max |L0 phi - (f^2 - sigma_bar^2)| over the
/// nodes with |y - m| <= 6 nu, relative to the largest |f^2 - sigma_bar^2| there.
double phi_residual(const PhiDerivative& phi, const VolFunction& f, double z);

/// V = nu rho_xy / sqrt(2) * E_y[f phi'].
double effective_v(const VolFunction& f, double z, double m, double nu, double rho_xy);

struct EffectiveParams {
    double sigma_bar = 0.0;
    double v = 0.0;
    double z = 0.0;
    std::size_t quadrature_nodes = 0;
    std::size_t grid_cells = 0;
    double quadrature_change = 0.0;
};

EffectiveParams effective_params(const VolFunction& f, double z, double m, double nu, double rho_xy,
                                 SigmaBarDefinition def = SigmaBarDefinition::RootMeanSquare);

/// Memo table for effective_params. Concurrent lookups share a reader lock;
/// inserts take the writer lock.
class EffectiveParamsCache {
public:
    EffectiveParams get(const VolFunction& f, double z, double m, double nu, double rho_xy,
                        SigmaBarDefinition def = SigmaBarDefinition::RootMeanSquare);
    std::size_t size() const;

private:
    using Key = std::tuple<std::string, double, double, double, double, int>;
    mutable std::shared_mutex mu_;
    std::map<Key, EffectiveParams> table_;
};

}  // namespace arcvol
