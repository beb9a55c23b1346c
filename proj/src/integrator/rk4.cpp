#include "hamreg/integrator/rk4.hpp"

namespace hamreg::integrator {

namespace {

Vector stage(const VectorField& f, double t, const Vector& z, int index) {
    Vector k = f(t, z);
    if (k.size() != z.size()) throw ShapeError("vector field changed the state dimension");
    if (!k.allFinite()) throw IntegrationError(t, index);
    return k;
}

}  // namespace

Vector rk4_step(const VectorField& f, const Vector& z, double t, double dt) {
    if (!(dt > 0.0)) throw ConfigError("rk4_step requires dt > 0");
    const double h2 = 0.5 * dt;
    const Vector k1 = stage(f, t, z, 1);
    const Vector k2 = stage(f, t + h2, z + h2 * k1, 2);
    const Vector k3 = stage(f, t + h2, z + h2 * k2, 3);
    const Vector k4 = stage(f, t + dt, z + dt * k3, 4);
    return z + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Trajectory integrate(const VectorField& f, const Vector& z0, double dt, long n_steps,
                     const std::function<bool(const Vector&)>& stop) {
    if (n_steps < 0) throw ConfigError("integrate requires n_steps >= 0");
    if (!(dt > 0.0)) throw ConfigError("integrate requires dt > 0");
    Trajectory traj;
    traj.times.reserve(static_cast<std::size_t>(n_steps) + 1);
    traj.states.reserve(static_cast<std::size_t>(n_steps) + 1);
    traj.times.push_back(0.0);
    traj.states.push_back(z0);
    Vector z = z0;
    for (long i = 0; i < n_steps; ++i) {
        const double t = static_cast<double>(i) * dt;
        try {
            z = rk4_step(f, z, t, dt);
        } catch (const IntegrationError& e) {
            traj.failure = e.what();
            return traj;
        }
        traj.times.push_back(static_cast<double>(i + 1) * dt);
        traj.states.push_back(z);
        if (stop && stop(z)) {
            traj.failure = "stopped at t=" + std::to_string(traj.times.back());
            return traj;
        }
    }
    return traj;
}

}  // namespace hamreg::integrator
