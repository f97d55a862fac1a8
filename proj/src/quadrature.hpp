#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace arcvol::detail {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Physicists' Gauss-Hermite rule for weight exp(-x^2). Cached per n.
const QuadratureRule& gauss_hermite(std::size_t n);

/// Gauss-Legendre rule on [-1, 1]. Cached per n.
const QuadratureRule& gauss_legendre(std::size_t n);

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double v) noexcept {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

}  // namespace arcvol::detail
