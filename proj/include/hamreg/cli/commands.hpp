#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hamreg/cli/config.hpp"
#include "hamreg/evaluation/evaluation.hpp"

namespace hamreg::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitDiverged = 2;
inline constexpr int kExitConfig = 3;

struct GenerateOptions {
    physics::SystemId system = physics::SystemId::Single;
    training::Split split = training::Split::Small;
    models::Coords coords = models::Coords::Generalized;
    std::uint64_t seed = 0;
    std::filesystem::path out = ".";
};

/// Dataset file name inside an output directory, e.g. "single_s_generalized.csv".
std::string dataset_file_name(physics::SystemId system, training::Split split, models::Coords coords);

/// Writes <out>/<dataset_file_name>.
int cmd_generate(const GenerateOptions& opts, std::ostream& log);

/// Trains from cfg.dataset (or a freshly generated dataset when unset) and
/// writes checkpoint.json and history.csv into cfg.out_dir. Returns
/// kExitDiverged when training diverged.
int cmd_train(const RunConfig& cfg, std::ostream& log);

struct EvaluateOptions {
    /// Checkpoint path, or "truth" for the exact dynamics of `system`.
    std::string checkpoint;
    physics::SystemId system = physics::SystemId::Single;
    int n_ics = 10;
    double horizon = 100.0;
    std::uint64_t seed = 0;
    evaluation::RolloutGrid grid;
    std::filesystem::path out = ".";
};

/// Writes metrics.json and series.csv into `out`. Returns kExitDiverged
/// when a rollout diverged.
int cmd_evaluate(const EvaluateOptions& opts, std::ostream& log);

/// Runs cross_validate_lambda on cfg.lambda_grid with `n_ics` held-out
/// initial conditions and writes crossval.json into cfg.out_dir.
int cmd_crossval(const RunConfig& cfg, int n_ics, double horizon, std::ostream& log);

struct ReproduceOptions {
    int table = 1;              // 1: single pendulum, 2: double pendulum
    std::string scale = "desk";  // desk | full
    std::uint64_t seed = 0;
    std::optional<long> epochs;  // overrides the scale's epoch count
    int n_ics = 10;
    double horizon = 100.0;
    evaluation::RolloutGrid grid;
    std::filesystem::path out = "reproduce";
};

struct ReproduceResult {
    std::vector<evaluation::TableRow> rows;
    std::string table_text;
};

/// Trains all six schemes on both splits, evaluates them on shared unseen
/// initial conditions and assembles the table. Training divergence renders
/// as "-" rather than failing.
ReproduceResult reproduce(const ReproduceOptions& opts, std::ostream& log);

int cmd_reproduce(const ReproduceOptions& opts, std::ostream& log);

/// Regularization weights used by reproduce for hnn / chnn on a system.
double reproduce_lambda(physics::SystemId system, models::Family family);

/// Runs `body`, mapping library errors to exit codes and messages on `err`.
int run_guarded(const std::function<int()>& body, std::ostream& err);

}  // namespace hamreg::cli
