#pragma once

// Constrained Hamiltonian flow in Cartesian coordinates.
//
// With z = (x, p), rod constraints Φ(x) and the extended constraint stack
// C(z) = (Φ(x), DΦ(x)·∂H/∂p), the flow is
//
//     λ = (DC J DCᵀ)⁻¹ DC J ∇H,     ż = J (∇H − DCᵀ λ),
//
// J = [[0, I], [−I, 0]]. The velocity rows of DC need the Hessian of H only
// along u_k = (0, DΦ_kᵀ), so a network supplies k Hessian-vector products
// instead of a full Hessian.

#include <Eigen/Dense>

#include "hamreg/physics/pendulum.hpp"

namespace hamreg::models {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Columns u_k = (0, DΦ_k(x)ᵀ) for a stacked Cartesian state z = (x, p).
Matrix constraint_directions(const physics::ConstraintSet& cs, const Vector& z);

/// Canonical symplectic matrix of size n (n even).
Matrix symplectic_matrix(Eigen::Index n);

struct ConstrainedFlow {
    Vector zdot;
    Vector lambda;
    Matrix dc;        // 2k × n
    Matrix system;    // DC J DCᵀ
    Vector grad;      // ∇H
    double condition = 0.0;
};

/// `grad` = ∇H(z); `hvp` column k = ∇²H(z)·u_k with u_k from
/// constraint_directions(). Throws ConstraintDegeneracy when the multiplier
/// system's condition estimate exceeds `max_condition`.
ConstrainedFlow constrained_flow(const physics::ConstraintSet& cs, const Vector& z, const Vector& grad,
                                 const Matrix& hvp, double max_condition = 1e12);

struct ConstrainedFlowAdjoint {
    Vector grad;  // ∂ℓ/∂(∇H)
    Matrix hvp;   // ∂ℓ/∂(∇²H·u_k), one column per constraint
};

/// Reverse-mode pullback of ż through the flow for a cotangent ∂ℓ/∂ż.
ConstrainedFlowAdjoint constrained_flow_vjp(const physics::ConstraintSet& cs, const ConstrainedFlow& flow,
                                            const Vector& zdot_bar);

}  // namespace hamreg::models
