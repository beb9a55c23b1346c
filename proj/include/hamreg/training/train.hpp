#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hamreg/models/models.hpp"
#include "hamreg/nn/adam.hpp"
#include "hamreg/training/dataset.hpp"

namespace hamreg::training {

struct HistoryEntry {
    long epoch = 0;
    double loss = 0.0;
    double lr = 0.0;
};

struct TrainConfig {
    models::Family family = models::Family::Hnn;
    std::vector<int> layer_sizes;  // empty: default_layer_sizes(family, system)
    long epochs = 150000;
    nn::LRSchedule schedule = nn::LRSchedule::standard();
    std::optional<double> lambda_h;  // unset: plain loss
    std::uint64_t seed = 0;
    long history_stride = 1;
    /// Called after every recorded history entry; may be empty.
    std::function<void(const HistoryEntry&)> progress;

    void validate() const;
};

struct TrainResult {
    models::ModelSpec model;
    std::vector<HistoryEntry> history;
    bool diverged = false;
    long divergence_epoch = -1;
    std::string message;
    double final_loss = 0.0;  // loss at the returned parameters
};

/// Full-batch Adam on the family's loss. Deterministic in `config.seed`.
///
/// Divergence (non-finite loss, a loss above 1e8 for 100 consecutive
/// epochs, or a numeric failure inside the loss) stops the run and is
/// reported in the result rather than thrown; the returned model then
/// holds the last parameters with a finite loss.
TrainResult train(const TrainConfig& config, const Dataset& dataset);

struct LambdaScore {
    double lambda_h = 0.0;
    bool diverged = false;
    double mean_abs_de = 0.0;  // validation mean |ΔE| in %
};

struct CrossValidationResult {
    double best_lambda = 0.0;
    std::vector<LambdaScore> scores;
};

/// The λ grid searched when none is given; contains the values used for
/// both pendulum systems.
std::vector<double> default_lambda_grid();

/// Trains one model per grid value and picks the λ with the lowest mean
/// |ΔE| over rollouts from `validation_ics`; ties go to the smaller λ.
/// The grid must contain 0. Throws CrossValidationError when every grid
/// point diverges.
CrossValidationResult cross_validate_lambda(const TrainConfig& config, const Dataset& dataset,
                                            std::span<const double> grid,
                                            std::span<const physics::State> validation_ics, double horizon = 100.0);

}  // namespace hamreg::training
