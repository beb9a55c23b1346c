#include "hamreg/training/train.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "hamreg/evaluation/evaluation.hpp"
#include "hamreg/parallel.hpp"
#include "hamreg/training/losses.hpp"

namespace hamreg::training {

namespace {

constexpr double kLossCeiling = 1e8;
constexpr int kCeilingPatience = 100;

/// Every epoch allocates the same few dozen sample-sized blocks. glibc serves
/// blocks above 128 KiB with fresh mmap pages, so each epoch would pay for
/// page faults and kernel zeroing; keeping them on the heap halves the
/// epoch time of the double-pendulum models.
void keep_large_blocks_on_heap() {
#if defined(__GLIBC__)
    static std::once_flag once;
    std::call_once(once, [] {
        mallopt(M_MMAP_THRESHOLD, 256 << 20);
        mallopt(M_TRIM_THRESHOLD, 512 << 20);
    });
#endif
}

}  // namespace

void TrainConfig::validate() const {
    if (epochs < 0) throw ConfigError("epochs must be non-negative");
    if (history_stride < 1) throw ConfigError("history_stride must be at least 1");
    if (lambda_h && !(*lambda_h >= 0.0)) throw ConfigError("lambda_h must be a non-negative number");
    if (lambda_h && family != models::Family::Hnn && family != models::Family::Chnn) {
        throw ConfigError("lambda_h applies to hnn and chnn models only");
    }
}

TrainResult train(const TrainConfig& config, const Dataset& dataset) {
    config.validate();
    keep_large_blocks_on_heap();
    const Batch batch = make_batch(config.family, dataset);

    TrainResult result;
    models::ModelSpec& spec = result.model;
    spec.family = config.family;
    spec.coords = models::native_coords(config.family);
    spec.system = dataset.system;
    spec.sys = dataset.sys;
    const std::vector<int> sizes =
        config.layer_sizes.empty() ? models::default_layer_sizes(config.family, dataset.system) : config.layer_sizes;
    spec.params = nn::init_params(sizes, config.seed);
    spec.validate();

    nn::AdamState adam = nn::AdamState::zeros_like(spec.params);
    int above_ceiling = 0;

    auto record = [&](long epoch, double loss) {
        const HistoryEntry e{epoch, loss, config.schedule.rate(epoch)};
        result.history.push_back(e);
        if (config.progress) config.progress(e);
    };
    auto diverge = [&](long epoch, std::string why) {
        result.diverged = true;
        result.divergence_epoch = epoch;
        result.message = std::move(why);
    };

    for (long epoch = 0; epoch < config.epochs; ++epoch) {
        LossGrad lg;
        try {
            lg = loss_and_gradient(spec.params, batch, config.lambda_h);
        } catch (const DifferentiationError& e) {
            diverge(epoch, e.what());
            break;
        } catch (const ConstraintDegeneracy& e) {
            diverge(epoch, e.what());
            break;
        } catch (const DegenerateLagrangian& e) {
            diverge(epoch, e.what());
            break;
        }
        if (!std::isfinite(lg.loss)) {
            record(epoch, lg.loss);
            diverge(epoch, "loss is not finite");
            break;
        }
        above_ceiling = lg.loss > kLossCeiling ? above_ceiling + 1 : 0;
        if (epoch % config.history_stride == 0) record(epoch, lg.loss);
        if (above_ceiling >= kCeilingPatience) {
            diverge(epoch, "loss above 1e8 for 100 consecutive epochs");
            break;
        }
        nn::MLPParams next = spec.params;
        try {
            nn::adam_step(next, lg.grad, adam, config.schedule, epoch);
        } catch (const DifferentiationError& e) {
            diverge(epoch, e.what());
            break;
        }
        spec.params = std::move(next);
    }

    if (!result.diverged) {
        try {
            result.final_loss = loss_value(spec.params, batch, config.lambda_h);
        } catch (const Error& e) {
            diverge(config.epochs, e.what());
        }
        if (!result.diverged && !std::isfinite(result.final_loss)) diverge(config.epochs, "final loss is not finite");
    }
    return result;
}

std::vector<double> default_lambda_grid() { return {0.0, 0.005, 0.01, 0.03, 0.07, 0.1, 0.2}; }

CrossValidationResult cross_validate_lambda(const TrainConfig& config, const Dataset& dataset,
                                            std::span<const double> grid,
                                            std::span<const physics::State> validation_ics, double horizon) {
    if (grid.empty()) throw ConfigError("lambda grid is empty");
    if (std::find(grid.begin(), grid.end(), 0.0) == grid.end()) throw ConfigError("lambda grid must contain 0");
    for (double l : grid) {
        if (!(l >= 0.0)) throw ConfigError("lambda grid values must be non-negative");
    }
    if (validation_ics.empty()) throw ConfigError("cross-validation needs validation initial conditions");

    std::vector<double> sorted(grid.begin(), grid.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    CrossValidationResult out;
    out.scores.resize(sorted.size());
    // One job per λ; the rollouts inside run serially to keep the pool flat.
    parallel_for(sorted.size(), [&](std::size_t i) {
        TrainConfig c = config;
        c.lambda_h = sorted[i];
        c.progress = nullptr;
        LambdaScore& s = out.scores[i];
        s.lambda_h = sorted[i];
        const TrainResult r = train(c, dataset);
        if (r.diverged) {
            s.diverged = true;
            return;
        }
        std::vector<evaluation::Rollout> rollouts;
        for (const physics::State& ic : validation_ics) {
            rollouts.push_back(evaluation::energy_error_rollout(r.model, ic, horizon));
        }
        const evaluation::EnergyMetrics m = evaluation::aggregate(std::move(rollouts), horizon);
        s.diverged = m.diverged;
        s.mean_abs_de = m.mean_abs_de;
    });

    const LambdaScore* best = nullptr;
    for (const LambdaScore& s : out.scores) {
        if (s.diverged) continue;
        if (!best || s.mean_abs_de < best->mean_abs_de) best = &s;
    }
    if (!best) throw CrossValidationError("every lambda in the grid diverged");
    out.best_lambda = best->lambda_h;
    return out;
}

}  // namespace hamreg::training
