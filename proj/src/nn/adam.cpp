#include "hamreg/nn/adam.hpp"

#include <algorithm>
#include <cmath>

namespace hamreg::nn {

LRSchedule::LRSchedule(std::vector<long> boundaries, std::vector<double> rates)
    : boundaries_(std::move(boundaries)), rates_(std::move(rates)) {
    if (boundaries_.empty() || boundaries_.size() != rates_.size()) {
        throw ConfigError("learning-rate schedule needs one rate per boundary");
    }
    if (boundaries_.front() != 0) throw ConfigError("learning-rate schedule must start at epoch 0");
    for (std::size_t i = 0; i < rates_.size(); ++i) {
        if (!(rates_[i] > 0.0) || !std::isfinite(rates_[i])) throw ConfigError("learning rates must be positive");
        if (i > 0 && !(boundaries_[i] > boundaries_[i - 1])) {
            throw ConfigError("learning-rate boundaries must be strictly increasing");
        }
        if (i > 0 && !(rates_[i] < rates_[i - 1])) {
            throw ConfigError("learning rates must be strictly decreasing");
        }
    }
}

LRSchedule LRSchedule::standard() { return LRSchedule({0, 50000, 100000}, {1e-2, 1e-3, 1e-4}); }

LRSchedule LRSchedule::scaled(long total_epochs) {
    if (total_epochs < 3) return LRSchedule({0}, {1e-2});
    return LRSchedule({0, total_epochs / 3, 2 * total_epochs / 3}, {1e-2, 1e-3, 1e-4});
}

double LRSchedule::rate(long epoch) const {
    const auto it = std::upper_bound(boundaries_.begin(), boundaries_.end(), epoch);
    const auto idx = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - boundaries_.begin()) - 1));
    return rates_[idx];
}

AdamState AdamState::zeros_like(const MLPParams& params) {
    AdamState s;
    s.m = params.zeros_like();
    s.v = params.zeros_like();
    return s;
}

namespace {

template <class Block>
void update_block(Block& p, const Block& g, Block& m, Block& v, double lr, double b1, double b2, double c1, double c2,
                  double eps) {
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
    p.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
}

}  // namespace

void adam_step(MLPParams& params, const MLPParams& grads, AdamState& state, const LRSchedule& schedule, long epoch) {
    if (epoch < state.step) throw ConfigError("adam_step: epoch precedes the optimizer's step count");
    const std::size_t L = params.num_layers();
    if (grads.num_layers() != L || state.m.num_layers() != L || state.v.num_layers() != L) {
        throw ShapeError("adam_step: layer counts differ");
    }
    for (std::size_t l = 0; l < L; ++l) {
        if (grads.weights[l].rows() != params.weights[l].rows() || grads.weights[l].cols() != params.weights[l].cols() ||
            grads.biases[l].size() != params.biases[l].size() || state.m.weights[l].size() != params.weights[l].size() ||
            state.v.biases[l].size() != params.biases[l].size()) {
            throw ShapeError("adam_step: shape mismatch in layer " + std::to_string(l));
        }
        if (!grads.weights[l].allFinite()) throw DifferentiationError("gradient of layer " + std::to_string(l) + " weights");
        if (!grads.biases[l].allFinite()) throw DifferentiationError("gradient of layer " + std::to_string(l) + " bias");
    }

    state.step += 1;
    const double lr = schedule.rate(epoch);
    const double t = static_cast<double>(state.step);
    const double c1 = 1.0 - std::pow(state.beta1, t);
    const double c2 = 1.0 - std::pow(state.beta2, t);
    for (std::size_t l = 0; l < L; ++l) {
        update_block(params.weights[l], grads.weights[l], state.m.weights[l], state.v.weights[l], lr, state.beta1,
                     state.beta2, c1, c2, state.eps);
        update_block(params.biases[l], grads.biases[l], state.m.biases[l], state.v.biases[l], lr, state.beta1,
                     state.beta2, c1, c2, state.eps);
    }
}

}  // namespace hamreg::nn
