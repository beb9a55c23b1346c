#include "hamreg/models/constrained_flow.hpp"

#include <cmath>
#include <limits>

namespace hamreg::models {

Matrix constraint_directions(const physics::ConstraintSet& cs, const Vector& z) {
    const Eigen::Index nx = cs.position_dim();
    if (z.size() != 2 * nx) throw ShapeError("Cartesian state has wrong dimension");
    const Matrix jac = cs.jacobian(z.head(nx));
    Matrix u = Matrix::Zero(2 * nx, cs.count());
    u.bottomRows(nx) = jac.transpose();
    return u;
}

Matrix symplectic_matrix(Eigen::Index n) {
    const Eigen::Index h = n / 2;
    Matrix j = Matrix::Zero(n, n);
    j.topRightCorner(h, h).setIdentity();
    j.bottomLeftCorner(h, h) = -Matrix::Identity(h, h);
    return j;
}

ConstrainedFlow constrained_flow(const physics::ConstraintSet& cs, const Vector& z, const Vector& grad,
                                 const Matrix& hvp, double max_condition) {
    const Eigen::Index nx = cs.position_dim();
    const Eigen::Index n = 2 * nx;
    const Eigen::Index k = cs.count();
    if (z.size() != n || grad.size() != n) throw ShapeError("constrained_flow: state/gradient dimension mismatch");
    if (hvp.rows() != n || hvp.cols() != k) throw ShapeError("constrained_flow: need one Hessian product per constraint");

    const Matrix jac = cs.jacobian(z.head(nx));
    const Vector grad_p = grad.tail(nx);

    ConstrainedFlow f;
    f.grad = grad;
    f.dc = Matrix::Zero(2 * k, n);
    f.dc.topLeftCorner(k, nx) = jac;
    for (Eigen::Index j = 0; j < k; ++j) {
        f.dc.row(k + j) = hvp.col(j).transpose();
        f.dc.row(k + j).head(nx) += (cs.hessian(static_cast<int>(j)) * grad_p).transpose();
    }

    const Matrix J = symplectic_matrix(n);
    f.system = f.dc * J * f.dc.transpose();
    const Eigen::PartialPivLU<Matrix> lu(f.system);
    const double rcond = lu.rcond();
    f.condition = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
    if (!(f.condition <= max_condition)) throw ConstraintDegeneracy(f.condition);

    f.lambda = lu.solve(f.dc * (J * grad));
    f.zdot = J * (grad - f.dc.transpose() * f.lambda);
    return f;
}

ConstrainedFlowAdjoint constrained_flow_vjp(const physics::ConstraintSet& cs, const ConstrainedFlow& f,
                                            const Vector& zdot_bar) {
    const Eigen::Index nx = cs.position_dim();
    const Eigen::Index n = 2 * nx;
    const Eigen::Index k = cs.count();
    const Matrix J = symplectic_matrix(n);

    // ż = J∇H − J DCᵀ λ
    const Vector w = J.transpose() * zdot_bar;
    Vector grad_bar = w;
    const Vector lambda_bar = -(f.dc * w);
    Matrix dc_bar = -f.lambda * w.transpose();

    // λ = A⁻¹ b
    const Vector b_bar = f.system.transpose().partialPivLu().solve(lambda_bar);
    const Matrix a_bar = -b_bar * f.lambda.transpose();

    // b = DC J ∇H
    grad_bar += J.transpose() * (f.dc.transpose() * b_bar);
    dc_bar += b_bar * (J * f.grad).transpose();

    // A = DC J DCᵀ
    dc_bar += a_bar * f.dc * J.transpose() + a_bar.transpose() * f.dc * J;

    ConstrainedFlowAdjoint adj;
    adj.hvp = Matrix::Zero(n, k);
    for (Eigen::Index j = 0; j < k; ++j) {
        const Vector row = dc_bar.row(k + j).transpose();
        adj.hvp.col(j) = row;
        grad_bar.tail(nx) += cs.hessian(static_cast<int>(j)).transpose() * row.head(nx);
    }
    adj.grad = std::move(grad_bar);
    return adj;
}

}  // namespace hamreg::models
