#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hamreg/autodiff/tape.hpp"
#include "hamreg/integrator/rk4.hpp"
#include "hamreg/models/constrained_flow.hpp"
#include "hamreg/nn/checkpoint.hpp"
#include "hamreg/nn/mlp.hpp"
#include "hamreg/physics/pendulum.hpp"

namespace hamreg::models {

enum class Family { Baseline, Hnn, Chnn, Lnn };
enum class Coords { Generalized, Cartesian };

std::string to_string(Family f);
std::string to_string(Coords c);
Family parse_family(std::string_view name);
Coords parse_coords(std::string_view name);

/// Coordinates each family works in: CHNN is Cartesian, the rest generalized.
Coords native_coords(Family f);

/// Length of the network input: 2·dof (generalized) or 4·dof (Cartesian).
int state_dim(physics::SystemId system, Coords coords);

/// (in, h, h, out) with h = 32 (single) or 128 (double); out = 1 except for
/// the baseline, whose output is the full state derivative.
std::vector<int> default_layer_sizes(Family family, physics::SystemId system);

/// A learnable dynamics model. Immutable once trained.
struct ModelSpec {
    Family family = Family::Hnn;
    Coords coords = Coords::Generalized;
    physics::SystemId system = physics::SystemId::Single;
    physics::SystemParams sys{};
    nn::MLPParams params;

    /// Throws ConfigError/ShapeError when the family, coordinates and
    /// network dimensions are inconsistent.
    void validate() const;

    physics::ConstraintSet constraints() const { return {system, sys}; }

    nn::Checkpoint to_checkpoint() const;
    static ModelSpec from_checkpoint(const nn::Checkpoint& ck, const physics::SystemParams& sys = {});
};

/// A scalar function with its gradient and Hessian-vector products.
struct Jet {
    double value = 0.0;
    Vector gradient;
    Matrix hvp;
};

using JetFunction = std::function<Jet(const Vector& z, const Matrix& directions)>;

JetFunction mlp_jet_function(const nn::MLPParams& params);

/// Jet of a scalar function written against ad::Var; `f` must accept
/// std::span<const ad::Var<T>> for T = double and T = ad::Dual<double>.
template <class F>
JetFunction jet_from_function(F f) {
    return [f](const Vector& z, const Matrix& directions) {
        const std::span<const double> zs(z.data(), static_cast<std::size_t>(z.size()));
        auto [value, grad] = ad::value_and_grad(f, zs);
        Jet jet;
        jet.value = value;
        jet.gradient = Eigen::Map<const Vector>(grad.data(), z.size());
        jet.hvp = Matrix(z.size(), directions.cols());
        for (Eigen::Index k = 0; k < directions.cols(); ++k) {
            const Vector dir = directions.col(k);
            const auto h = ad::hvp(f, zs, std::span<const double>(dir.data(), static_cast<std::size_t>(dir.size())));
            jet.hvp.col(k) = Eigen::Map<const Vector>(h.data(), z.size());
        }
        return jet;
    };
}

/// (∂H/∂p, −∂H/∂q) for a gradient stacked as (∂H/∂q, ∂H/∂p).
Vector symplectic_gradient(const Vector& grad);

/// Euler–Lagrange accelerations q̈ = (∂²L/∂q̇²)⁻¹(∂L/∂q − ∂²L/∂q̇∂q · q̇).
/// Throws DegenerateLagrangian when the velocity Hessian's condition
/// estimate exceeds `max_condition`.
Vector euler_lagrange_acceleration(const JetFunction& lagrangian, const Vector& q, const Vector& qdot,
                                   double max_condition = 1e12);

Vector baseline_vector_field(const ModelSpec& spec, const Vector& z);
Vector hnn_vector_field(const ModelSpec& spec, const Vector& z);
Vector chnn_vector_field(const ModelSpec& spec, const physics::CartesianState& c);
Vector lnn_acceleration(const ModelSpec& spec, const Vector& q, const Vector& qdot);

/// H_φ(z): the raw network output. Only for HNN and CHNN.
double model_energy(const ModelSpec& spec, const Vector& z);

/// Rollout field in the model's own state: (q, p) for baseline/HNN,
/// (x, p) for CHNN and (q, q̇) for LNN.
integrator::VectorField vector_field(const ModelSpec& spec);

}  // namespace hamreg::models
