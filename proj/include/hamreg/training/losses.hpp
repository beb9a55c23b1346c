#pragma once

#include <optional>

#include "hamreg/models/models.hpp"
#include "hamreg/nn/mlp.hpp"
#include "hamreg/training/dataset.hpp"

namespace hamreg::training {

/// Column-per-sample view of a dataset, prepared once per training run.
struct Batch {
    models::Family family = models::Family::Hnn;
    physics::SystemId system = physics::SystemId::Single;
    physics::SystemParams sys{};
    Matrix inputs;   // network inputs, n × N
    Matrix targets;  // ż (baseline, HNN, CHNN) or q̈ (LNN)
    Matrix h_hat;    // 1 × N
    std::vector<Matrix> directions;  // tangent directions, n × N each

    Eigen::Index size() const noexcept { return inputs.cols(); }
};

/// Builds the batch a family trains on. LNN inputs are (q, q̇) with the
/// exact q̈ as target; CHNN needs a Cartesian dataset, the others a
/// generalized one.
Batch make_batch(models::Family family, const Dataset& ds);

struct LossGrad {
    double loss = 0.0;
    nn::MLPParams grad;
};

/// Full-batch mean loss and its parameter gradient.
///
/// Baseline: mean |MLP(z) − ż|². HNN: mean |∂H/∂p − q̇|² + |∂H/∂q + ṗ|².
/// CHNN: mean |ż_constrained − ż|². LNN: mean |q̈_EL − q̈|². When `lambda_h`
/// is set (HNN/CHNN only) each sample adds λ_H (H_φ(z) − Ĥ)².
LossGrad loss_and_gradient(const nn::MLPParams& params, const Batch& batch, std::optional<double> lambda_h);

/// Loss value only, by the same code path.
double loss_value(const nn::MLPParams& params, const Batch& batch, std::optional<double> lambda_h);

double hnn_loss(const models::ModelSpec& spec, const Dataset& ds);
double regularized_loss(const models::ModelSpec& spec, const Dataset& ds, double lambda_h);
double lnn_loss(const models::ModelSpec& spec, const Dataset& ds);
double baseline_loss(const models::ModelSpec& spec, const Dataset& ds);

}  // namespace hamreg::training
