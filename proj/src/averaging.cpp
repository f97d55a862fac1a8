#include "arcvol/averaging.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "arcvol/errors.hpp"
#include "quadrature.hpp"

namespace arcvol {

// ---------------------------------------------------------------------------
// VolFunction

VolFunction VolFunction::y_constant() { return {Kind::YConstant, nullptr, "y_constant"}; }

VolFunction VolFunction::separable_exponential() {
    return {Kind::SeparableExponential, nullptr, "separable_exponential"};
}

VolFunction VolFunction::tabulated(std::vector<double> ys, std::vector<double> fs) {
    if (ys.size() != fs.size() || ys.size() < 2)
        throw Error(ErrorCode::InvalidParameter, "vol table needs at least two (y, f) rows");
    for (std::size_t i = 0; i < ys.size(); ++i) {
        if (!std::isfinite(ys[i]) || !std::isfinite(fs[i]))
            throw Error(ErrorCode::InvalidParameter, "vol table entries must be finite");
        if (!(fs[i] > 0.0))
            throw Error(ErrorCode::InvalidParameter, "vol table values must be > 0");
        if (i > 0 && !(ys[i] > ys[i - 1]))
            throw Error(ErrorCode::InvalidParameter, "vol table y nodes must be strictly increasing");
    }
    std::ostringstream key;
    key.precision(17);
    key << "tabulated";
    for (std::size_t i = 0; i < ys.size(); ++i) key << ';' << ys[i] << ',' << fs[i];
    auto table = std::make_shared<const Table>(Table{std::move(ys), std::move(fs)});
    return {Kind::Tabulated, std::move(table), key.str()};
}

VolFunction VolFunction::load_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot open vol table " + path.string());
    std::vector<double> ys;
    std::vector<double> fs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::replace(line.begin(), line.end(), ',', ' ');
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream row(line);
        double y = 0.0;
        double f = 0.0;
        std::string extra;
        if (!(row >> y) || !(row >> f) || (row >> extra)) {
            throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(lineno) +
                                                   ": expected two numeric columns (y, f)");
        }
        ys.push_back(y);
        fs.push_back(f);
    }
    return tabulated(std::move(ys), std::move(fs));
}

double VolFunction::operator()(double y, double z) const {
    switch (kind_) {
        case Kind::YConstant: return z;
        case Kind::SeparableExponential: return z * std::exp(y);
        case Kind::Tabulated: {
            const auto& ys = table_->ys;
            const auto& fs = table_->fs;
            if (y <= ys.front()) return fs.front();
            if (y >= ys.back()) return fs.back();
            const auto hi = static_cast<std::size_t>(std::upper_bound(ys.begin(), ys.end(), y) - ys.begin());
            const std::size_t lo = hi - 1;
            const double w = (y - ys[lo]) / (ys[hi] - ys[lo]);
            return fs[lo] + w * (fs[hi] - fs[lo]);
        }
    }
    return 0.0;
}

std::span<const double> VolFunction::knots() const noexcept {
    if (kind_ != Kind::Tabulated) return {};
    return table_->ys;
}

std::string_view to_string(VolFunction::Kind kind) {
    switch (kind) {
        case VolFunction::Kind::YConstant: return "y_constant";
        case VolFunction::Kind::SeparableExponential: return "separable_exponential";
        case VolFunction::Kind::Tabulated: return "tabulated";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// Gaussian averages

namespace {

constexpr std::size_t kMinHermite = 16;
constexpr std::size_t kMaxHermite = 512;
constexpr std::size_t kMinLegendre = 8;
constexpr std::size_t kMaxLegendre = 256;
constexpr double kGridHalfWidth = 8.0;   // phi' grid spans m +- 8 nu
constexpr double kSegmentHalfWidth = 12.0;

double gaussian_pdf(double y, double m, double nu) {
    const double u = (y - m) / nu;
    return std::exp(-0.5 * u * u) / (nu * std::sqrt(2.0 * std::numbers::pi));
}

double hermite_average(const std::function<double(double)>& g, double m, double nu, std::size_t n) {
    const auto& rule = detail::gauss_hermite(n);
    detail::CompensatedSum sum;
    const double scale = std::numbers::sqrt2 * nu;
    for (std::size_t i = 0; i < n; ++i) sum.add(rule.weights[i] * g(m + scale * rule.nodes[i]));
    return sum.value() * std::numbers::inv_sqrtpi;
}

std::vector<double> segment_edges(double m, double nu, std::span<const double> knots) {
    const double lo = m - kSegmentHalfWidth * nu;
    const double hi = m + kSegmentHalfWidth * nu;
    std::vector<double> cuts{lo, hi};
    for (double k : knots)
        if (k > lo && k < hi) cuts.push_back(k);
    std::sort(cuts.begin(), cuts.end());
    // Keep each panel at most nu/2 wide.
    std::vector<double> edges{cuts.front()};
    for (std::size_t i = 1; i < cuts.size(); ++i) {
        const double a = cuts[i - 1];
        const double b = cuts[i];
        const auto pieces = static_cast<std::size_t>(std::ceil((b - a) / (0.5 * nu)));
        for (std::size_t j = 1; j <= pieces; ++j)
            edges.push_back(j == pieces ? b : a + (b - a) * static_cast<double>(j) / static_cast<double>(pieces));
    }
    return edges;
}

double legendre_average(const std::function<double(double)>& g, double m, double nu,
                        const std::vector<double>& edges, std::size_t n) {
    const auto& rule = detail::gauss_legendre(n);
    detail::CompensatedSum sum;
    for (std::size_t s = 1; s < edges.size(); ++s) {
        const double half = 0.5 * (edges[s] - edges[s - 1]);
        const double mid = 0.5 * (edges[s] + edges[s - 1]);
        for (std::size_t i = 0; i < n; ++i) {
            const double y = mid + half * rule.nodes[i];
            sum.add(half * rule.weights[i] * g(y) * gaussian_pdf(y, m, nu));
        }
    }
    return sum.value();
}

void check_average_inputs(double m, double nu) {
    if (!std::isfinite(m) || !std::isfinite(nu) || !(nu > 0.0))
        throw Error(ErrorCode::DomainError, "Gaussian average needs finite m and nu > 0");
}

void check_vol_inputs(const VolFunction& f, double z) {
    if (!std::isfinite(z)) throw Error(ErrorCode::DomainError, "slow factor value must be finite");
    if (f.kind() != VolFunction::Kind::Tabulated && !(z > 0.0))
        throw Error(ErrorCode::DomainError, "f(y, z) must be positive: need z > 0, got " + std::to_string(z));
}

bool settled(double prev, double next, double rel_tol, double* change) {
    const double diff = std::abs(next - prev);
    const double scale = std::max(std::abs(next), std::abs(prev));
    *change = scale == 0.0 ? 0.0 : diff / scale;
    return diff <= rel_tol * scale || diff < 1e-300;
}

}  // namespace

Average gaussian_average(const std::function<double(double)>& g, double m, double nu,
                         std::span<const double> knots, double rel_tol) {
    check_average_inputs(m, nu);
    Average out;
    if (knots.empty()) {
        double prev = hermite_average(g, m, nu, kMinHermite);
        for (std::size_t n = 2 * kMinHermite; n <= kMaxHermite; n *= 2) {
            const double next = hermite_average(g, m, nu, n);
            if (settled(prev, next, rel_tol, &out.last_change)) {
                out.value = next;
                out.nodes = n;
                return out;
            }
            prev = next;
        }
    } else {
        const auto edges = segment_edges(m, nu, knots);
        const std::size_t panels = edges.size() - 1;
        double prev = legendre_average(g, m, nu, edges, kMinLegendre);
        for (std::size_t n = 2 * kMinLegendre; n <= kMaxLegendre; n *= 2) {
            const double next = legendre_average(g, m, nu, edges, n);
            if (settled(prev, next, rel_tol, &out.last_change)) {
                out.value = next;
                out.nodes = n * panels;
                return out;
            }
            prev = next;
        }
    }
    throw Error(ErrorCode::QuadratureFailure,
                "Gaussian average did not settle to " + std::to_string(rel_tol) +
                    " relative (last change " + std::to_string(out.last_change) + ")");
}

Average sigma_bar_detail(const VolFunction& f, double z, double m, double nu, SigmaBarDefinition def) {
    check_average_inputs(m, nu);
    check_vol_inputs(f, z);
    if (!f.depends_on_y()) return {z, 1, 0.0};

    Average avg;
    if (def == SigmaBarDefinition::RootMeanSquare) {
        avg = gaussian_average([&](double y) { const double v = f(y, z); return v * v; }, m, nu, f.knots());
        avg.value = std::sqrt(avg.value);
    } else {
        avg = gaussian_average([&](double y) { return f(y, z); }, m, nu, f.knots());
    }
    if (!(avg.value > 0.0) || !std::isfinite(avg.value))
        throw Error(ErrorCode::DomainError, "effective volatility is not positive");
    return avg;
}

double sigma_bar(const VolFunction& f, double z, double m, double nu, SigmaBarDefinition def) {
    return sigma_bar_detail(f, z, m, nu, def).value;
}

// ---------------------------------------------------------------------------
// Poisson equation in y

namespace {

constexpr std::size_t kMinCells = std::size_t{1} << 10;
constexpr std::size_t kMaxCells = std::size_t{1} << 20;
// Finest grid is at least this fine so that phi' supports finite-difference checks.
constexpr std::size_t kMinFinalCells = std::size_t{1} << 15;
constexpr double kCenteringTol = 1e-8;

struct GridSolution {
    std::vector<double> y;
    std::vector<double> dphi;
    double mean_f_dphi = 0.0;
    double centering = 0.0;
};

// Integrating factor: (nu^2 p phi')' = p L0 phi, so
// phi'(y) = (1 / (nu^2 p(y))) int_{-inf}^{y} (f^2 - s2) p du.
// The cumulative integral is taken from the left below m and from the right
// above m so that tail values of phi' do not suffer cancellation.
GridSolution solve_on_grid(const VolFunction& f, double z, double m, double nu, double s2,
                           std::size_t cells) {
    const double lo = m - kGridHalfWidth * nu;
    const double h = 2.0 * kGridHalfWidth * nu / static_cast<double>(cells);
    const std::size_t n = cells + 1;

    GridSolution sol;
    sol.y.resize(n);
    sol.dphi.resize(n);
    std::vector<double> fv(n), p(n), rhs(n);
    detail::CompensatedSum abs_mass;
    for (std::size_t i = 0; i < n; ++i) {
        const double y = (i == cells) ? m + kGridHalfWidth * nu : lo + h * static_cast<double>(i);
        sol.y[i] = y;
        fv[i] = f(y, z);
        if (!(fv[i] > 0.0) || !std::isfinite(fv[i]))
            throw Error(ErrorCode::DomainError, "f(y, z) must be positive and finite on the grid");
        p[i] = gaussian_pdf(y, m, nu);
        rhs[i] = (fv[i] * fv[i] - s2) * p[i];
        abs_mass.add(std::abs(rhs[i]) * h);
    }

    // Knots of f inside each cell; those cells are integrated piecewise so the
    // kink does not spoil the h^2 error expansion used for extrapolation.
    std::vector<std::vector<double>> cell_knots(n);
    for (double kn : f.knots()) {
        if (kn <= lo || kn >= sol.y[cells]) continue;
        const auto i = static_cast<std::size_t>(std::floor((kn - lo) / h)) + 1;
        if (i <= cells && kn > sol.y[i - 1] && kn < sol.y[i]) cell_knots[i].push_back(kn);
    }
    auto rhs_at = [&](double y) {
        const double v = f(y, z);
        return (v * v - s2) * gaussian_pdf(y, m, nu);
    };
    // Integral of rhs over cell i, split at its knots.
    auto cell_integral = [&](std::size_t i) {
        if (cell_knots[i].empty()) return 0.5 * h * (rhs[i - 1] + rhs[i]);
        double acc = 0.0, ya = sol.y[i - 1], ra = rhs[i - 1];
        for (double kn : cell_knots[i]) {
            const double rk = rhs_at(kn);
            acc += 0.5 * (kn - ya) * (ra + rk);
            ya = kn;
            ra = rk;
        }
        return acc + 0.5 * (sol.y[i] - ya) * (ra + rhs[i]);
    };

    std::vector<double> left(n, 0.0), right(n, 0.0);
    {
        detail::CompensatedSum acc;
        for (std::size_t i = 1; i < n; ++i) {
            acc.add(cell_integral(i));
            left[i] = acc.value();
        }
    }
    {
        detail::CompensatedSum acc;
        for (std::size_t i = n - 1; i-- > 0;) {
            acc.add(-cell_integral(i + 1));
            right[i] = acc.value();
        }
    }
    const double total = left[n - 1];
    const double mass = abs_mass.value();
    sol.centering = mass > 0.0 ? std::abs(total) / mass : 0.0;

    const double nu2 = nu * nu;
    std::vector<double> c(n);
    for (std::size_t i = 0; i < n; ++i) {
        c[i] = sol.y[i] <= m ? left[i] : right[i];
        sol.dphi[i] = c[i] / (nu2 * p[i]);
    }
    detail::CompensatedSum fc;
    for (std::size_t i = 1; i < n; ++i) {
        if (cell_knots[i].empty()) {
            fc.add(0.5 * h * (fv[i - 1] * c[i - 1] + fv[i] * c[i]));
            continue;
        }
        // Carry C from the left end of the cell through each knot.
        double ya = sol.y[i - 1], ra = rhs[i - 1], ca = c[i - 1], ga = fv[i - 1] * c[i - 1];
        for (double kn : cell_knots[i]) {
            const double rk = rhs_at(kn);
            const double ck = ca + 0.5 * (kn - ya) * (ra + rk);
            const double gk = f(kn, z) * ck;
            fc.add(0.5 * (kn - ya) * (ga + gk));
            ya = kn;
            ra = rk;
            ca = ck;
            ga = gk;
        }
        fc.add(0.5 * (sol.y[i] - ya) * (ga + fv[i] * c[i]));
    }
    sol.mean_f_dphi = fc.value() / nu2;
    return sol;
}

}  // namespace

PhiDerivative solve_phi_derivative(const VolFunction& f, double z, double m, double nu) {
    check_average_inputs(m, nu);
    check_vol_inputs(f, z);

    PhiDerivative out;
    out.m = m;
    out.nu = nu;

    if (!f.depends_on_y()) {
        out.sigma_bar = z;
        out.cells = kMinCells;
        out.quadrature_nodes = 1;
        out.y.resize(kMinCells + 1);
        const double h = 2.0 * kGridHalfWidth * nu / static_cast<double>(kMinCells);
        for (std::size_t i = 0; i <= kMinCells; ++i) out.y[i] = m - kGridHalfWidth * nu + h * static_cast<double>(i);
        out.dphi.assign(kMinCells + 1, 0.0);
        return out;
    }

    const auto sb = sigma_bar_detail(f, z, m, nu, SigmaBarDefinition::RootMeanSquare);
    out.sigma_bar = sb.value;
    out.quadrature_nodes = sb.nodes;
    const double s2 = sb.value * sb.value;

    GridSolution coarse = solve_on_grid(f, z, m, nu, s2, kMinCells);

    double prev_extrap = 0.0;
    bool have_prev = false;
    for (std::size_t cells = 2 * kMinCells; cells <= kMaxCells; cells *= 2) {
        GridSolution fine = solve_on_grid(f, z, m, nu, s2, cells);
        const double extrap = (4.0 * fine.mean_f_dphi - coarse.mean_f_dphi) / 3.0;
        double change = 0.0;
        const bool done = have_prev && settled(prev_extrap, extrap, 1e-10, &change) && cells >= kMinFinalCells;
        out.last_change = change;
        if (done || cells == kMaxCells) {
            if (!done && change > 1e-8) {
                throw Error(ErrorCode::QuadratureFailure,
                            "E[f phi'] did not settle on the y grid (last change " + std::to_string(change) + ")");
            }
            if (fine.centering > kCenteringTol) {
                throw Error(ErrorCode::CenteringFailure,
                            "f^2 - sigma_bar^2 does not average to zero (relative " +
                                std::to_string(fine.centering) + ")");
            }
            out.y = std::move(fine.y);
            out.dphi = std::move(fine.dphi);
            out.centering = fine.centering;
            out.mean_f_dphi = extrap;
            out.cells = cells;
            return out;
        }
        prev_extrap = extrap;
        have_prev = true;
        coarse = std::move(fine);
    }
    throw Error(ErrorCode::QuadratureFailure, "unreachable grid refinement state");
}

double phi_residual(const PhiDerivative& phi, const VolFunction& f, double z) {
    if (!f.depends_on_y()) return 0.0;
    const std::size_t n = phi.y.size();
    if (n < 5) return 0.0;
    const double h = phi.y[1] - phi.y[0];
    const double nu2 = phi.nu * phi.nu;
    const double s2 = phi.sigma_bar * phi.sigma_bar;

    double max_err = 0.0;
    double max_rhs = 0.0;
    // Fourth-order central difference for phi''.
    for (std::size_t i = 2; i + 2 < n; ++i) {
        if (std::abs(phi.y[i] - phi.m) > 6.0 * phi.nu) continue;
        // phi'' jumps where f has a kink; the stencil must not straddle one.
        const bool straddles = std::any_of(f.knots().begin(), f.knots().end(), [&](double kn) {
            return kn > phi.y[i - 2] && kn < phi.y[i + 2];
        });
        if (straddles) continue;
        const double d2 = (-phi.dphi[i + 2] + 8.0 * phi.dphi[i + 1] - 8.0 * phi.dphi[i - 1] + phi.dphi[i - 2]) / (12.0 * h);
        const double lhs = (phi.m - phi.y[i]) * phi.dphi[i] + nu2 * d2;
        const double fv = f(phi.y[i], z);
        const double rhs = fv * fv - s2;
        max_err = std::max(max_err, std::abs(lhs - rhs));
        max_rhs = std::max(max_rhs, std::abs(rhs));
    }
    return max_rhs > 1e-10 ? max_err / max_rhs : max_err;
}

double effective_v(const VolFunction& f, double z, double m, double nu, double rho_xy) {
    if (rho_xy == 0.0 || !f.depends_on_y()) {
        check_average_inputs(m, nu);
        check_vol_inputs(f, z);
        return 0.0;
    }
    const auto phi = solve_phi_derivative(f, z, m, nu);
    return nu * rho_xy / std::numbers::sqrt2 * phi.mean_f_dphi;
}

EffectiveParams effective_params(const VolFunction& f, double z, double m, double nu, double rho_xy,
                                 SigmaBarDefinition def) {
    EffectiveParams eff;
    eff.z = z;
    const auto sb = sigma_bar_detail(f, z, m, nu, def);
    eff.sigma_bar = sb.value;
    eff.quadrature_nodes = sb.nodes;
    eff.quadrature_change = sb.last_change;
    if (rho_xy != 0.0 && f.depends_on_y()) {
        const auto phi = solve_phi_derivative(f, z, m, nu);
        eff.v = nu * rho_xy / std::numbers::sqrt2 * phi.mean_f_dphi;
        eff.grid_cells = phi.cells;
    }
    return eff;
}

EffectiveParams EffectiveParamsCache::get(const VolFunction& f, double z, double m, double nu,
                                          double rho_xy, SigmaBarDefinition def) {
    Key key{f.key(), z, m, nu, rho_xy, static_cast<int>(def)};
    {
        std::shared_lock lock(mu_);
        if (auto it = table_.find(key); it != table_.end()) return it->second;
    }
    auto eff = effective_params(f, z, m, nu, rho_xy, def);
    std::unique_lock lock(mu_);
    return table_.emplace(std::move(key), eff).first->second;
}

std::size_t EffectiveParamsCache::size() const {
    std::shared_lock lock(mu_);
    return table_.size();
}

}  // namespace arcvol
