#include <catch_amalgamated.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <thread>
#include <vector>

#include "arcvol/averaging.hpp"
#include "arcvol/errors.hpp"

using namespace arcvol;
using Catch::Approx;

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 61>;

double gauss_pdf(double y, double m, double nu) {
    const double u = (y - m) / nu;
    return std::exp(-0.5 * u * u) / (nu * std::sqrt(2.0 * M_PI));
}

// Piecewise-linear table with flat ends, and its antiderivative.
struct Table {
    std::vector<double> ys, fs;

    double f(double y) const {
        if (y <= ys.front()) return fs.front();
        if (y >= ys.back()) return fs.back();
        const auto i = std::upper_bound(ys.begin(), ys.end(), y) - ys.begin() - 1;
        const double w = (y - ys[i]) / (ys[i + 1] - ys[i]);
        return fs[i] + w * (fs[i + 1] - fs[i]);
    }
    double antiderivative(double y) const {
        if (y <= ys.front()) return fs.front() * (y - ys.front());
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < ys.size(); ++i) {
            const double hi = std::min(y, ys[i + 1]);
            acc += 0.5 * (fs[i] + f(hi)) * (hi - ys[i]);
            if (y <= ys[i + 1]) return acc;
        }
        return acc + fs.back() * (y - ys.back());
    }
};

// Integral of g over the real line against N(m, nu^2), split at the breakpoints.
template <class G>
double expect(G g, double m, double nu, std::vector<double> cuts) {
    cuts.push_back(m - 14 * nu);
    cuts.push_back(m + 14 * nu);
    std::sort(cuts.begin(), cuts.end());
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        acc += GK::integrate([&](double y) { return g(y) * gauss_pdf(y, m, nu); }, cuts[i], cuts[i + 1], 12, 1e-15);
    return acc;
}

// E[f phi'] by parts: phi' = (1/(nu^2 p)) int_{-inf}^y (f^2 - s^2) p, so
// E[f phi'] = (1/nu^2) int f(y) int_{-inf}^y g p du dy = -(1/nu^2) E[F g]
// for any antiderivative F of f, because E[g] = 0.
template <class F, class Fint>
double brute_mean_f_dphi(F f, Fint big_f, double m, double nu, const std::vector<double>& cuts) {
    const double s2 = expect([&](double y) { return f(y) * f(y); }, m, nu, cuts);
    return -expect([&](double y) { return big_f(y) * (f(y) * f(y) - s2); }, m, nu, cuts) / (nu * nu);
}

}  // namespace

TEST_CASE("gaussian average of simple moments", "[averaging]") {
    CHECK(gaussian_average([](double y) { return y * y; }, 0.3, 0.5).value == Approx(0.34).epsilon(1e-13));
    CHECK(gaussian_average([](double y) { return std::cos(y); }, 0.2, 0.7).value ==
          Approx(std::cos(0.2) * std::exp(-0.245)).epsilon(1e-12));
    const std::vector<double> knots{0.0};
    CHECK(gaussian_average([](double y) { return std::abs(y); }, 0.0, 1.0, knots).value ==
          Approx(std::sqrt(2.0 / M_PI)).epsilon(1e-11));
}

TEST_CASE("sigma_bar closed forms", "[averaging]") {
    const auto f = VolFunction::separable_exponential();
    for (double m : {-0.5, 0.0, 0.4})
        for (double nu : {0.1, 0.3, 0.8}) {
            const double z = 0.2;
            CHECK(sigma_bar(f, z, m, nu) == Approx(z * std::exp(m + nu * nu)).epsilon(1e-10));
            CHECK(sigma_bar(f, z, m, nu, SigmaBarDefinition::Mean) ==
                  Approx(z * std::exp(m + 0.5 * nu * nu)).epsilon(1e-10));
        }
    CHECK(sigma_bar(VolFunction::y_constant(), 0.17, 0.0, 0.3) == 0.17);
    CHECK_THROWS_AS(sigma_bar(f, -0.2, 0.0, 0.3), Error);
}

TEST_CASE("tabulated sigma_bar against dense trapezoid", "[averaging]") {
    const Table tab{{-0.5, -0.1, 0.2, 0.6}, {0.12, 0.18, 0.22, 0.35}};
    const auto f = VolFunction::tabulated(tab.ys, tab.fs);
    const double m = 0.05, nu = 0.3;
    const std::size_t n = 400000;
    const double lo = m - 12 * nu, hi = m + 12 * nu, h = (hi - lo) / n;
    double acc = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
        const double y = lo + i * h;
        const double w = (i == 0 || i == n) ? 0.5 : 1.0;
        acc += w * tab.f(y) * tab.f(y) * gauss_pdf(y, m, nu);
    }
    CHECK(sigma_bar(f, 1.0, m, nu) == Approx(std::sqrt(acc * h)).epsilon(1e-8));
}

TEST_CASE("V for separable exponential matches closed form", "[averaging]") {
    const auto f = VolFunction::separable_exponential();
    for (double m : {0.0, 0.3})
        for (double nu : {0.2, 0.5}) {
            const double z = 0.2, rho = -0.5;
            const double e = -(std::pow(z, 3) * std::exp(3 * m) / (nu * nu)) *
                             (std::exp(4.5 * nu * nu) - std::exp(2.5 * nu * nu));
            const double v_closed = nu * rho / std::sqrt(2.0) * e;
            CHECK(effective_v(f, z, m, nu, rho) == Approx(v_closed).epsilon(1e-6));
            const double brute = brute_mean_f_dphi([&](double y) { return z * std::exp(y); },
                                                   [&](double y) { return z * std::exp(y); }, m, nu, {});
            CHECK(brute == Approx(e).epsilon(1e-12));
        }
    CHECK(effective_v(f, 0.2, 0.0, 0.3, -0.5) == Approx(0.0023286).epsilon(1e-4));
}

TEST_CASE("V for tabulated f matches brute-force pipeline", "[averaging]") {
    const Table tab{{-0.5, -0.1, 0.2, 0.6}, {0.12, 0.18, 0.22, 0.35}};
    const auto f = VolFunction::tabulated(tab.ys, tab.fs);
    const double m = 0.05, nu = 0.3, rho = -0.6;
    const double e = brute_mean_f_dphi([&](double y) { return tab.f(y); },
                                       [&](double y) { return tab.antiderivative(y); }, m, nu, tab.ys);
    CHECK(effective_v(f, 1.0, m, nu, rho) == Approx(nu * rho / std::sqrt(2.0) * e).epsilon(1e-6));
}

TEST_CASE("V vanishes in the degenerate cases", "[averaging]") {
    CHECK(effective_v(VolFunction::separable_exponential(), 0.2, 0.0, 0.3, 0.0) == 0.0);
    CHECK(effective_v(VolFunction::y_constant(), 0.2, 0.0, 0.3, -0.5) == 0.0);
    const auto flat = VolFunction::tabulated({-1.0, 1.0}, {0.2, 0.2});
    CHECK(std::abs(effective_v(flat, 1.0, 0.0, 0.3, -0.5)) <= 1e-12);
}

TEST_CASE("homogeneity in the level of f", "[averaging][property]") {
    const Table tab{{-0.4, 0.0, 0.5}, {0.15, 0.2, 0.3}};
    const double m = 0.0, nu = 0.35, rho = -0.4;
    const auto f1 = VolFunction::tabulated(tab.ys, tab.fs);
    const double s1 = sigma_bar(f1, 1.0, m, nu);
    const double v1 = effective_v(f1, 1.0, m, nu, rho);
    for (double c : {0.5, 2.0, 3.0}) {
        std::vector<double> fs = tab.fs;
        for (auto& x : fs) x *= c;
        const auto fc = VolFunction::tabulated(tab.ys, fs);
        CHECK(sigma_bar(fc, 1.0, m, nu) == Approx(c * s1).epsilon(1e-10));
        CHECK(effective_v(fc, 1.0, m, nu, rho) == Approx(c * c * c * v1).epsilon(1e-8));
    }
    // z enters the separable form as a level.
    const auto se = VolFunction::separable_exponential();
    CHECK(effective_v(se, 0.4, m, nu, rho) == Approx(8.0 * effective_v(se, 0.2, m, nu, rho)).epsilon(1e-8));
    CHECK(effective_v(se, 0.2, m, nu, 2 * rho) == Approx(2.0 * effective_v(se, 0.2, m, nu, rho)).epsilon(1e-12));
}

TEST_CASE("phi solves the Poisson equation", "[averaging]") {
    const auto f = VolFunction::separable_exponential();
    const auto phi = solve_phi_derivative(f, 0.2, 0.0, 0.3);
    CHECK(phi.centering < 1e-8);
    CHECK(phi_residual(phi, f, 0.2) <= 1e-6);

    const auto tab = VolFunction::tabulated({-0.5, -0.1, 0.2, 0.6}, {0.12, 0.18, 0.22, 0.35});
    const auto pt = solve_phi_derivative(tab, 1.0, 0.05, 0.3);
    CHECK(pt.centering < 1e-8);
    // Stencils next to a kink are skipped; the neighbours still see the jump in phi.
    CHECK(phi_residual(pt, tab, 1.0) <= 1e-5);
}

TEST_CASE("tabulated volatility parsing and lookup", "[averaging]") {
    const auto dir = std::filesystem::temp_directory_path() / "arcvol_test_tab";
    std::filesystem::create_directories(dir);
    {
        std::ofstream o(dir / "ok.txt");
        o << "# y f\n-1.0, 0.1\n0.0 0.2\n\n1.0,0.4  # top\n";
    }
    const auto f = VolFunction::load_table(dir / "ok.txt");
    CHECK(f.kind() == VolFunction::Kind::Tabulated);
    CHECK(f(0.5, 123.0) == Approx(0.3).epsilon(1e-15));
    CHECK(f(-5.0, 0.0) == 0.1);
    CHECK(f(5.0, 0.0) == 0.4);
    CHECK(f.knots().size() == 3);
    {
        std::ofstream o(dir / "bad.txt");
        o << "0.0 0.2\nfoo 0.3\n";
    }
    try {
        VolFunction::load_table(dir / "bad.txt");
        FAIL("expected ParseError");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ParseError);
        CHECK(std::string(e.what()).find('2') != std::string::npos);
    }
    CHECK_THROWS_AS(VolFunction::tabulated({0.0, 0.0}, {0.1, 0.2}), Error);
    CHECK_THROWS_AS(VolFunction::tabulated({0.0, 1.0}, {0.1, -0.2}), Error);
    std::filesystem::remove_all(dir);
}

TEST_CASE("effective params cache", "[averaging]") {
    EffectiveParamsCache cache;
    const auto f = VolFunction::separable_exponential();
    const auto a = cache.get(f, 0.2, 0.0, 0.3, -0.5);
    const auto b = cache.get(f, 0.2, 0.0, 0.3, -0.5);
    CHECK(cache.size() == 1);
    CHECK(a.v == b.v);
    CHECK(a.v == effective_params(f, 0.2, 0.0, 0.3, -0.5).v);

    std::vector<std::thread> pool;
    for (int i = 0; i < 4; ++i)
        pool.emplace_back([&, i] { cache.get(f, 0.2 + 0.01 * (i % 2), 0.0, 0.3, -0.5); });
    for (auto& t : pool) t.join();
    CHECK(cache.size() == 2);
}
