#pragma once

#include <stdexcept>
#include <string>

namespace hamreg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent configuration (sizes, keys, flags).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Operand dimensions do not line up.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// A primitive produced a non-finite value or partial derivative.
class DifferentiationError : public Error {
public:
    explicit DifferentiationError(std::string primitive)
        : Error("non-finite intermediate in primitive '" + primitive + "'"),
          primitive_(std::move(primitive)) {}

    const std::string& primitive() const noexcept { return primitive_; }

private:
    std::string primitive_;
};

/// An RK4 stage evaluated to a non-finite vector.
class IntegrationError : public Error {
public:
    IntegrationError(double t, int stage)
        : Error("non-finite RK4 stage k" + std::to_string(stage) + " at t=" + std::to_string(t)),
          t_(t), stage_(stage) {}

    double time() const noexcept { return t_; }
    int stage() const noexcept { return stage_; }

private:
    double t_;
    int stage_;
};

/// Cartesian state is too far from the constraint manifold.
class ManifoldViolation : public Error {
public:
    using Error::Error;
};

/// The constrained-flow multiplier system is singular.
class ConstraintDegeneracy : public Error {
public:
    ConstraintDegeneracy(double condition)
        : Error("constraint system is degenerate (condition estimate " + std::to_string(condition) + ")"),
          condition_(condition) {}

    double condition() const noexcept { return condition_; }

private:
    double condition_;
};

/// The learned Lagrangian has a singular velocity Hessian.
class DegenerateLagrangian : public Error {
public:
    DegenerateLagrangian(double condition)
        : Error("velocity Hessian of the Lagrangian is degenerate (condition estimate " +
                std::to_string(condition) + ")"),
          condition_(condition) {}

    double condition() const noexcept { return condition_; }

private:
    double condition_;
};

/// Operation requested on a model family that does not provide it.
class UnsupportedFamily : public Error {
public:
    using Error::Error;
};

/// Dataset generation could not meet its contract.
class GenerationError : public Error {
public:
    using Error::Error;
};

/// Every grid point of a lambda sweep diverged.
class CrossValidationError : public Error {
public:
    using Error::Error;
};

/// File I/O or parse failure.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace hamreg
