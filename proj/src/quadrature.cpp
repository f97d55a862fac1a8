#include "quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace arcvol::detail {

namespace {

// Golub-Welsch: nodes are the eigenvalues of the symmetric Jacobi matrix,
// weights mu0 * (first eigenvector component)^2.
QuadratureRule golub_welsch(std::size_t n, double mu0, double (*offdiag)(std::size_t)) {
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    Eigen::VectorXd sub(static_cast<Eigen::Index>(n > 0 ? n - 1 : 0));
    for (std::size_t i = 1; i < n; ++i) sub[static_cast<Eigen::Index>(i - 1)] = offdiag(i);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);

    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto idx = static_cast<Eigen::Index>(i);
        rule.nodes[i] = solver.eigenvalues()[idx];
        const double v0 = solver.eigenvectors()(0, idx);
        rule.weights[i] = mu0 * v0 * v0;
    }
    // Symmetrize to remove eigen-solver asymmetry.
    for (std::size_t i = 0; i < n / 2; ++i) {
        const std::size_t j = n - 1 - i;
        const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
        const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
        rule.nodes[i] = -x;
        rule.nodes[j] = x;
        rule.weights[i] = rule.weights[j] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

double hermite_offdiag(std::size_t i) { return std::sqrt(0.5 * static_cast<double>(i)); }

double legendre_offdiag(std::size_t i) {
    const double k = static_cast<double>(i);
    return k / std::sqrt(4.0 * k * k - 1.0);
}

const QuadratureRule& cached(std::map<std::size_t, QuadratureRule>& cache, std::mutex& mu,
                             std::size_t n, double mu0, double (*offdiag)(std::size_t)) {
    std::lock_guard lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, golub_welsch(n, mu0, offdiag)).first;
    return it->second;
}

}  // namespace

const QuadratureRule& gauss_hermite(std::size_t n) {
    static std::map<std::size_t, QuadratureRule> cache;
    static std::mutex mu;
    return cached(cache, mu, n, std::sqrt(std::numbers::pi), hermite_offdiag);
}

const QuadratureRule& gauss_legendre(std::size_t n) {
    static std::map<std::size_t, QuadratureRule> cache;
    static std::mutex mu;
    return cached(cache, mu, n, 2.0, legendre_offdiag);
}

}  // namespace arcvol::detail
