#pragma once

#include <cstdint>
#include <vector>

#include "hamreg/nn/mlp.hpp"

namespace hamreg::nn {

/// Piecewise-constant learning rate: rates[i] applies from boundaries[i]
/// (inclusive) until the next boundary. boundaries[0] is always 0.
class LRSchedule {
public:
    LRSchedule(std::vector<long> boundaries, std::vector<double> rates);

    /// 1e-2 → 1e-3 at epoch 50000 → 1e-4 at epoch 100000.
    static LRSchedule standard();

    /// Same three rates with boundaries at 1/3 and 2/3 of `total_epochs`.
    static LRSchedule scaled(long total_epochs);

    double rate(long epoch) const;

    const std::vector<long>& boundaries() const noexcept { return boundaries_; }
    const std::vector<double>& rates() const noexcept { return rates_; }

private:
    std::vector<long> boundaries_;
    std::vector<double> rates_;
};

struct AdamState {
    MLPParams m;
    MLPParams v;
    long step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    static AdamState zeros_like(const MLPParams& params);
};

/// One bias-corrected Adam update in place. Throws ConfigError if the epoch
/// runs backwards, ShapeError on mismatched shapes and DifferentiationError
/// naming the parameter block when a gradient entry is not finite.
void adam_step(MLPParams& params, const MLPParams& grads, AdamState& state, const LRSchedule& schedule, long epoch);

}  // namespace hamreg::nn
