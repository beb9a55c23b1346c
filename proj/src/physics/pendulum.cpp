#include "hamreg/physics/pendulum.hpp"

#include <cmath>

namespace hamreg::physics {

std::string to_string(SystemId id) { return id == SystemId::Single ? "single" : "double"; }

SystemId parse_system(std::string_view name) {
    if (name == "single") return SystemId::Single;
    if (name == "double") return SystemId::Double;
    throw ConfigError("unknown system '" + std::string(name) + "' (expected single|double)");
}

int dof(SystemId id) { return id == SystemId::Single ? 1 : 2; }

void SystemParams::validate() const {
    if (!(m1 > 0 && m2 > 0 && l1 > 0 && l2 > 0 && g > 0)) {
        throw ConfigError("masses, lengths and gravity must be strictly positive");
    }
}

Vector State::stacked() const {
    Vector z(q.size() + p.size());
    z << q, p;
    return z;
}

State State::from_stacked(const Vector& z) {
    const Eigen::Index n = z.size() / 2;
    return {z.head(n), z.tail(n)};
}

Vector CartesianState::stacked() const {
    Vector z(x.size() + p.size());
    z << x, p;
    return z;
}

CartesianState CartesianState::from_stacked(const Vector& z) {
    const Eigen::Index n = z.size() / 2;
    return {z.head(n), z.tail(n)};
}

namespace {

void require_dim(SystemId id, const Vector& v, const char* what) {
    if (v.size() != dof(id)) {
        throw ShapeError(std::string(what) + " has dimension " + std::to_string(v.size()) + ", expected " +
                         std::to_string(dof(id)));
    }
}

}  // namespace

double cartesian_potential_offset(SystemId id, const SystemParams& s) {
    return id == SystemId::Single ? s.m1 * s.g * s.l1 : s.g * (s.m1 * s.l1 + s.m2 * (s.l1 + s.l2));
}

State single_pendulum_deriv(const State& z, const SystemParams& s) {
    require_dim(SystemId::Single, z.q, "q");
    require_dim(SystemId::Single, z.p, "p");
    Vector qdot(1), pdot(1);
    qdot(0) = z.p(0) / (s.m1 * s.l1 * s.l1);
    pdot(0) = -s.m1 * s.g * s.l1 * std::sin(z.q(0));
    return {qdot, pdot};
}

Eigen::Vector2d double_pendulum_deriv(const Eigen::Vector2d& theta, const Eigen::Vector2d& omega,
                                      const SystemParams& s) {
    const double delta = theta(0) - theta(1);
    const double c = std::cos(delta);
    const double sn = std::sin(delta);
    const double mu = s.m2 / (s.m1 + s.m2);
    const double a12 = (s.l2 / s.l1) * mu * c;
    const double a21 = (s.l1 / s.l2) * c;
    const double r1 = -(s.l2 / s.l1) * mu * omega(1) * omega(1) * sn - (s.g / s.l1) * std::sin(theta(0));
    const double r2 = (s.l1 / s.l2) * omega(0) * omega(0) * sn - (s.g / s.l2) * std::sin(theta(1));
    const double det = 1.0 - a12 * a21;
    if (!(det > 0.0)) throw Error("double pendulum coupling matrix is singular");
    return {(r1 - a12 * r2) / det, (r2 - a21 * r1) / det};
}

namespace {

Eigen::Matrix2d double_mass_matrix(const Eigen::Vector2d& theta, const SystemParams& s) {
    const double b = s.m2 * s.l1 * s.l2 * std::cos(theta(0) - theta(1));
    Eigen::Matrix2d m;
    m << (s.m1 + s.m2) * s.l1 * s.l1, b, b, s.m2 * s.l2 * s.l2;
    return m;
}

}  // namespace

Eigen::Vector2d double_pendulum_momenta(const Eigen::Vector2d& theta, const Eigen::Vector2d& omega,
                                        const SystemParams& s) {
    return double_mass_matrix(theta, s) * omega;
}

Eigen::Vector2d double_pendulum_velocities(const Eigen::Vector2d& theta, const Eigen::Vector2d& p,
                                           const SystemParams& s) {
    const Eigen::Matrix2d m = double_mass_matrix(theta, s);
    const double det = m.determinant();
    if (!(det > 0.0)) throw Error("double pendulum mass matrix is singular");
    return {(m(1, 1) * p(0) - m(0, 1) * p(1)) / det, (m(0, 0) * p(1) - m(1, 0) * p(0)) / det};
}

Vector angular_acceleration(SystemId id, const Vector& theta, const Vector& omega, const SystemParams& s) {
    require_dim(id, theta, "theta");
    require_dim(id, omega, "omega");
    if (id == SystemId::Single) {
        Vector a(1);
        a(0) = -(s.g / s.l1) * std::sin(theta(0));
        return a;
    }
    return double_pendulum_deriv(theta, omega, s);
}

Vector velocities_from_momenta(SystemId id, const Vector& q, const Vector& p, const SystemParams& s) {
    require_dim(id, q, "q");
    require_dim(id, p, "p");
    if (id == SystemId::Single) return p / (s.m1 * s.l1 * s.l1);
    return double_pendulum_velocities(q, p, s);
}

Vector momenta_from_velocities(SystemId id, const Vector& q, const Vector& omega, const SystemParams& s) {
    require_dim(id, q, "q");
    require_dim(id, omega, "omega");
    if (id == SystemId::Single) return omega * (s.m1 * s.l1 * s.l1);
    return double_pendulum_momenta(q, omega, s);
}

Vector hamiltonian_field(SystemId id, const Vector& z, const SystemParams& s) {
    const State st = State::from_stacked(z);
    if (id == SystemId::Single) return single_pendulum_deriv(st, s).stacked();
    const Eigen::Vector2d w = double_pendulum_velocities(st.q, st.p, s);
    const double sn = std::sin(st.q(0) - st.q(1));
    const double coupling = s.m2 * s.l1 * s.l2 * w(0) * w(1) * sn;
    Vector zdot(4);
    zdot << w(0), w(1), -coupling - (s.m1 + s.m2) * s.g * s.l1 * std::sin(st.q(0)),
        coupling - s.m2 * s.g * s.l2 * std::sin(st.q(1));
    return zdot;
}

Vector angular_field(SystemId id, const Vector& y, const SystemParams& s) {
    const Eigen::Index n = y.size() / 2;
    const Vector theta = y.head(n);
    const Vector omega = y.tail(n);
    Vector out(y.size());
    out << omega, angular_acceleration(id, theta, omega, s);
    return out;
}

double true_energy(SystemId id, const State& z, const SystemParams& s) {
    require_dim(id, z.q, "q");
    require_dim(id, z.p, "p");
    if (id == SystemId::Single) return single_hamiltonian(z.q(0), z.p(0), s);
    return double_hamiltonian(z.q(0), z.q(1), z.p(0), z.p(1), s);
}

double true_energy(SystemId id, const CartesianState& c, const SystemParams& s) {
    if (c.x.size() != 2 * dof(id) || c.p.size() != 2 * dof(id)) throw ShapeError("Cartesian state has wrong dimension");
    return cartesian_hamiltonian<double>(id, c.x, c.p, s);
}

double max_potential_energy(SystemId id, const SystemParams& s) { return 2.0 * cartesian_potential_offset(id, s); }

CartesianState to_cartesian(SystemId id, const State& z, const SystemParams& s) {
    const Vector w = velocities_from_momenta(id, z.q, z.p, s);
    const int n = dof(id);
    CartesianState c{Vector::Zero(2 * n), Vector::Zero(2 * n)};
    const double s1 = std::sin(z.q(0)), c1 = std::cos(z.q(0));
    c.x(0) = s.l1 * s1;
    c.x(1) = -s.l1 * c1;
    const double vx1 = s.l1 * c1 * w(0);
    const double vy1 = s.l1 * s1 * w(0);
    c.p(0) = s.m1 * vx1;
    c.p(1) = s.m1 * vy1;
    if (id == SystemId::Double) {
        const double s2 = std::sin(z.q(1)), c2 = std::cos(z.q(1));
        c.x(2) = c.x(0) + s.l2 * s2;
        c.x(3) = c.x(1) - s.l2 * c2;
        c.p(2) = s.m2 * (vx1 + s.l2 * c2 * w(1));
        c.p(3) = s.m2 * (vy1 + s.l2 * s2 * w(1));
    }
    return c;
}

State from_cartesian(SystemId id, const CartesianState& c, const SystemParams& s, double tolerance) {
    const int n = dof(id);
    if (c.x.size() != 2 * n || c.p.size() != 2 * n) throw ShapeError("Cartesian state has wrong dimension");
    const ConstraintSet cs(id, s);
    const Vector res = cs.values(c.x);
    if (res.cwiseAbs().maxCoeff() > tolerance) {
        throw ManifoldViolation("Cartesian state is off the constraint manifold (residual " +
                                std::to_string(res.cwiseAbs().maxCoeff()) + ")");
    }
    Vector q(n), w(n);
    const double x1 = c.x(0), y1 = c.x(1);
    const double vx1 = c.p(0) / s.m1, vy1 = c.p(1) / s.m1;
    q(0) = std::atan2(x1, -y1);
    w(0) = (vx1 * std::cos(q(0)) + vy1 * std::sin(q(0))) / s.l1;
    if (id == SystemId::Double) {
        const double dx = c.x(2) - x1, dy = c.x(3) - y1;
        const double dvx = c.p(2) / s.m2 - vx1, dvy = c.p(3) / s.m2 - vy1;
        q(1) = std::atan2(dx, -dy);
        w(1) = (dvx * std::cos(q(1)) + dvy * std::sin(q(1))) / s.l2;
    }
    return {q, momenta_from_velocities(id, q, w, s)};
}

CartesianState cartesian_derivative(SystemId id, const State& z, const SystemParams& s) {
    const Vector w = velocities_from_momenta(id, z.q, z.p, s);
    const Vector a = angular_acceleration(id, z.q, w, s);
    const int n = dof(id);
    CartesianState d{Vector::Zero(2 * n), Vector::Zero(2 * n)};
    const double s1 = std::sin(z.q(0)), c1 = std::cos(z.q(0));
    const double vx1 = s.l1 * c1 * w(0), vy1 = s.l1 * s1 * w(0);
    const double ax1 = -s.l1 * s1 * w(0) * w(0) + s.l1 * c1 * a(0);
    const double ay1 = s.l1 * c1 * w(0) * w(0) + s.l1 * s1 * a(0);
    d.x(0) = vx1;
    d.x(1) = vy1;
    d.p(0) = s.m1 * ax1;
    d.p(1) = s.m1 * ay1;
    if (id == SystemId::Double) {
        const double s2 = std::sin(z.q(1)), c2 = std::cos(z.q(1));
        d.x(2) = vx1 + s.l2 * c2 * w(1);
        d.x(3) = vy1 + s.l2 * s2 * w(1);
        d.p(2) = s.m2 * (ax1 - s.l2 * s2 * w(1) * w(1) + s.l2 * c2 * a(1));
        d.p(3) = s.m2 * (ay1 + s.l2 * c2 * w(1) * w(1) + s.l2 * s2 * a(1));
    }
    return d;
}

ConstraintSet::ConstraintSet(SystemId id, const SystemParams& s)
    : id_(id), count_(dof(id)), l1_(s.l1), l2_(s.l2) {
    const int n = position_dim();
    if (id == SystemId::Single) {
        hessians_.push_back(Matrix::Identity(n, n));
    } else {
        Matrix h1 = Matrix::Zero(n, n);
        h1.topLeftCorner(2, 2).setIdentity();
        Matrix h2 = Matrix::Zero(n, n);
        h2.topLeftCorner(2, 2).setIdentity();
        h2.bottomRightCorner(2, 2).setIdentity();
        h2.topRightCorner(2, 2) = -Matrix::Identity(2, 2);
        h2.bottomLeftCorner(2, 2) = -Matrix::Identity(2, 2);
        hessians_.push_back(h1);
        hessians_.push_back(h2);
    }
}

Vector ConstraintSet::values(const Vector& x) const {
    if (x.size() != position_dim()) throw ShapeError("constraint input has wrong dimension");
    Vector v(count_);
    v(0) = 0.5 * (x.head<2>().squaredNorm() - l1_ * l1_);
    if (id_ == SystemId::Double) v(1) = 0.5 * ((x.segment<2>(2) - x.head<2>()).squaredNorm() - l2_ * l2_);
    return v;
}

Matrix ConstraintSet::jacobian(const Vector& x) const {
    if (x.size() != position_dim()) throw ShapeError("constraint input has wrong dimension");
    Matrix j = Matrix::Zero(count_, position_dim());
    j.block<1, 2>(0, 0) = x.head<2>().transpose();
    if (id_ == SystemId::Double) {
        const Eigen::Vector2d r = x.segment<2>(2) - x.head<2>();
        j.block<1, 2>(1, 0) = -r.transpose();
        j.block<1, 2>(1, 2) = r.transpose();
    }
    return j;
}

}  // namespace hamreg::physics
