#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hamreg/errors.hpp"

namespace hamreg::integrator {

using Vector = Eigen::VectorXd;

/// ż = f(t, z)
using VectorField = std::function<Vector(double, const Vector&)>;

/// Uniformly sampled solution. `failure` is set when integration stopped early.
struct Trajectory {
    std::vector<double> times;
    std::vector<Vector> states;
    std::string system;
    int ic_id = -1;
    std::optional<std::string> failure;

    bool complete() const noexcept { return !failure.has_value(); }
};

/// Classical RK4 step. Throws IntegrationError on a non-finite stage.
Vector rk4_step(const VectorField& f, const Vector& z, double t, double dt);

/// n_steps RK4 steps from z0 at t = 0; returns n_steps + 1 states. A stage
/// failure, or `stop(state)` returning true, ends the trajectory early with
/// `failure` describing why.
Trajectory integrate(const VectorField& f, const Vector& z0, double dt, long n_steps,
                     const std::function<bool(const Vector&)>& stop = {});

}  // namespace hamreg::integrator
