#pragma once

// Ground-truth single and double pendulum.
//
// Conventions: pivot at the origin, y axis up, angles measured from the
// downward vertical. Potential energy is zero at the hanging equilibrium.
// Generalized states are z = (q, p) with canonical momenta; angular states
// are (θ, ω) with ω = θ̇. Cartesian states stack bob positions
// x = (x₁, y₁[, x₂, y₂]) and momenta pᵢ = mᵢ ẋᵢ.

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "hamreg/errors.hpp"

namespace hamreg::physics {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class SystemId { Single, Double };

std::string to_string(SystemId id);
SystemId parse_system(std::string_view name);

/// Degrees of freedom: 1 or 2.
int dof(SystemId id);

/// Point masses [kg], rod lengths [m], gravity [m/s²]. The single pendulum
/// uses m1 and l1 only.
struct SystemParams {
    double m1 = 1.0;
    double m2 = 1.0;
    double l1 = 1.0;
    double l2 = 1.0;
    double g = 9.81;

    void validate() const;
};

struct State {
    Vector q;
    Vector p;

    Vector stacked() const;
    static State from_stacked(const Vector& z);
};

struct CartesianState {
    Vector x;
    Vector p;

    Vector stacked() const;
    static CartesianState from_stacked(const Vector& z);
};

// --- energies, generic over the scalar type so autodiff can trace them ----

template <class T>
T single_hamiltonian(const T& q, const T& p, const SystemParams& s) {
    using std::cos;
    return p * p / (2.0 * s.m1 * s.l1 * s.l1) + s.m1 * s.g * s.l1 * (1.0 - cos(q));
}

template <class T>
T single_lagrangian(const T& q, const T& qdot, const SystemParams& s) {
    using std::cos;
    return 0.5 * s.m1 * s.l1 * s.l1 * qdot * qdot - s.m1 * s.g * s.l1 * (1.0 - cos(q));
}

template <class T>
T double_potential(const T& q1, const T& q2, const SystemParams& s) {
    using std::cos;
    return s.g * (s.m1 * s.l1 * (1.0 - cos(q1)) + s.m2 * (s.l1 * (1.0 - cos(q1)) + s.l2 * (1.0 - cos(q2))));
}

template <class T>
T double_hamiltonian(const T& q1, const T& q2, const T& p1, const T& p2, const SystemParams& s) {
    using std::cos;
    const T c = cos(q1 - q2);
    const T a = (s.m1 + s.m2) * s.l1 * s.l1;
    const T b = s.m2 * s.l1 * s.l2 * c;
    const T d = s.m2 * s.l2 * s.l2;
    const T det = a * d - b * b;
    return (d * p1 * p1 - 2.0 * b * p1 * p2 + a * p2 * p2) / (2.0 * det) + double_potential(q1, q2, s);
}

template <class T>
T double_lagrangian(const T& q1, const T& q2, const T& w1, const T& w2, const SystemParams& s) {
    using std::cos;
    const T kinetic = 0.5 * (s.m1 + s.m2) * s.l1 * s.l1 * w1 * w1 + 0.5 * s.m2 * s.l2 * s.l2 * w2 * w2 +
                      s.m2 * s.l1 * s.l2 * w1 * w2 * cos(q1 - q2);
    return kinetic - double_potential(q1, q2, s);
}

/// Offset making Cartesian potential zero at the hanging equilibrium.
double cartesian_potential_offset(SystemId id, const SystemParams& s);

/// H(x, p) = Σ|pᵢ|²/(2mᵢ) + g Σ mᵢ yᵢ + offset; `x` and `p` are indexable.
template <class T, class Xs, class Ps>
T cartesian_hamiltonian(SystemId id, const Xs& x, const Ps& p, const SystemParams& s) {
    const int bobs = id == SystemId::Single ? 1 : 2;
    T h = T(cartesian_potential_offset(id, s));
    for (int i = 0; i < bobs; ++i) {
        const double m = i == 0 ? s.m1 : s.m2;
        const T px = p[2 * i];
        const T py = p[2 * i + 1];
        const T y = x[2 * i + 1];
        h = h + (px * px + py * py) / (2.0 * m) + m * s.g * y;
    }
    return h;
}

// --- dynamics --------------------------------------------------------------

/// (q̇, ṗ) = (p/(m l²), −m g l sin q).
State single_pendulum_deriv(const State& z, const SystemParams& s);

/// (θ̈₁, θ̈₂) from the coupled equations of motion, solved as a 2×2 system.
Eigen::Vector2d double_pendulum_deriv(const Eigen::Vector2d& theta, const Eigen::Vector2d& omega,
                                      const SystemParams& s);

/// Canonical momenta from angular velocities (Legendre transform).
Eigen::Vector2d double_pendulum_momenta(const Eigen::Vector2d& theta, const Eigen::Vector2d& omega,
                                        const SystemParams& s);

/// Angular velocities from canonical momenta (inverse of the above).
Eigen::Vector2d double_pendulum_velocities(const Eigen::Vector2d& theta, const Eigen::Vector2d& p,
                                           const SystemParams& s);

/// Angular accelerations for either system.
Vector angular_acceleration(SystemId id, const Vector& theta, const Vector& omega, const SystemParams& s);

/// ω from canonical p and back, for either system.
Vector velocities_from_momenta(SystemId id, const Vector& q, const Vector& p, const SystemParams& s);
Vector momenta_from_velocities(SystemId id, const Vector& q, const Vector& omega, const SystemParams& s);

/// ż = (q̇, ṗ) in canonical coordinates; z stacked as (q, p).
Vector hamiltonian_field(SystemId id, const Vector& z, const SystemParams& s);

/// d/dt (θ, ω) = (ω, θ̈); state stacked as (θ, ω).
Vector angular_field(SystemId id, const Vector& y, const SystemParams& s);

// --- energy ----------------------------------------------------------------

double true_energy(SystemId id, const State& z, const SystemParams& s);
double true_energy(SystemId id, const CartesianState& c, const SystemParams& s);

/// Potential energy of the inverted configuration: 2mgl or 2g(m₁l₁ + m₂(l₁+l₂)).
double max_potential_energy(SystemId id, const SystemParams& s);

// --- Cartesian embedding ---------------------------------------------------

CartesianState to_cartesian(SystemId id, const State& z, const SystemParams& s);

/// Angles come back wrapped to (−π, π]. Throws ManifoldViolation when a
/// rod-length residual exceeds `tolerance`.
State from_cartesian(SystemId id, const CartesianState& c, const SystemParams& s, double tolerance = 1e-6);

/// Time derivative of the Cartesian state along the exact dynamics.
CartesianState cartesian_derivative(SystemId id, const State& z, const SystemParams& s);

/// Holonomic rod constraints φₖ(x) = ½(|rₖ|² − lₖ²), rₖ the k-th rod vector.
class ConstraintSet {
public:
    ConstraintSet(SystemId id, const SystemParams& s);

    int count() const noexcept { return count_; }
    int position_dim() const noexcept { return 2 * count_; }

    Vector values(const Vector& x) const;
    /// count × position_dim
    Matrix jacobian(const Vector& x) const;
    /// Constant Hessian of constraint k (position_dim × position_dim).
    const Matrix& hessian(int k) const { return hessians_[static_cast<std::size_t>(k)]; }

private:
    SystemId id_;
    int count_;
    double l1_, l2_;
    std::vector<Matrix> hessians_;
};

}  // namespace hamreg::physics
