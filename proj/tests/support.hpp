#pragma once

// Generators and comparison helpers shared by the unit tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hamreg/nn/mlp.hpp"

namespace hamreg::check {

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    std::uint64_t seed() { return rng_(); }
    std::mt19937_64& engine() { return rng_; }

    Eigen::VectorXd vector(Eigen::Index n, double lo = -1.0, double hi = 1.0) {
        Eigen::VectorXd v(n);
        for (Eigen::Index i = 0; i < n; ++i) v(i) = uniform(lo, hi);
        return v;
    }

    Eigen::MatrixXd matrix(Eigen::Index r, Eigen::Index c, double lo = -1.0, double hi = 1.0) {
        Eigen::MatrixXd m(r, c);
        for (Eigen::Index j = 0; j < c; ++j) m.col(j) = vector(r, lo, hi);
        return m;
    }

    /// Glorot weights plus nonzero biases so every term of the chain rule is exercised.
    nn::MLPParams mlp(std::span<const int> sizes, double bias = 0.3) {
        nn::MLPParams p = nn::init_params(sizes, seed());
        for (auto& b : p.biases) b = vector(b.size(), -bias, bias);
        return p;
    }

private:
    std::mt19937_64 rng_;
};

inline double rel_err(const Eigen::VectorXd& got, const Eigen::VectorXd& want) {
    const double scale = std::max(want.norm(), 1e-300);
    return (got - want).norm() / scale;
}

inline double rel_err(std::span<const double> got, std::span<const double> want) {
    return rel_err(Eigen::Map<const Eigen::VectorXd>(got.data(), static_cast<Eigen::Index>(got.size())),
                   Eigen::Map<const Eigen::VectorXd>(want.data(), static_cast<Eigen::Index>(want.size())));
}

inline Eigen::VectorXd to_vector(std::span<const double> v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

/// Central difference of a scalar function along `dir`.
template <class F>
double directional_fd(F&& f, const Eigen::VectorXd& x, const Eigen::VectorXd& dir, double h) {
    return (f(Eigen::VectorXd(x + h * dir)) - f(Eigen::VectorXd(x - h * dir))) / (2.0 * h);
}

/// Central-difference gradient, step h·max(1, |xᵢ|).
template <class F>
Eigen::VectorXd fd_gradient(F&& f, const Eigen::VectorXd& x, double h) {
    Eigen::VectorXd g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double hi = h * std::max(1.0, std::abs(x(i)));
        Eigen::VectorXd a = x, b = x;
        a(i) += hi;
        b(i) -= hi;
        g(i) = (f(a) - f(b)) / (2.0 * hi);
    }
    return g;
}

}  // namespace hamreg::check
