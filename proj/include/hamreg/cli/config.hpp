#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hamreg/models/models.hpp"
#include "hamreg/nn/adam.hpp"
#include "hamreg/training/dataset.hpp"
#include "hamreg/training/train.hpp"

namespace hamreg::cli {

/// Settings shared by `train` and `crossval`.
///
/// The file format is flat `key = value`, one per line, `#` starts a
/// comment. Keys: system, split, family, coords, layer_sizes (comma list),
/// epochs, lr_schedule (standard | scaled | epoch:rate,...), lambda_h, seed,
/// out_dir, dataset, lambda_grid (comma list), history_stride.
struct RunConfig {
    physics::SystemId system = physics::SystemId::Single;
    training::Split split = training::Split::Small;
    models::Family family = models::Family::Hnn;
    std::optional<models::Coords> coords;
    std::vector<int> layer_sizes;
    long epochs = 150000;
    std::string lr_schedule = "standard";
    std::optional<double> lambda_h;
    std::uint64_t seed = 0;
    std::filesystem::path out_dir = ".";
    std::optional<std::filesystem::path> dataset;
    std::vector<double> lambda_grid = training::default_lambda_grid();
    long history_stride = 1;

    models::Coords resolved_coords() const { return coords.value_or(models::native_coords(family)); }
    nn::LRSchedule schedule() const;
    training::TrainConfig train_config() const;
    void validate() const;
};

/// Parses config text. Relative paths are resolved against `base_dir`.
/// Unknown or repeated keys and malformed values raise ConfigError.
RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});

/// Reads and parses a config file; paths resolve against its directory.
RunConfig load_config(const std::filesystem::path& path);

/// Applies one key/value pair; shared by the file parser and CLI flags.
void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value,
                   const std::filesystem::path& base_dir = {});

/// "standard", "scaled" (boundaries at thirds of `epochs`) or "b:r,b:r,...".
nn::LRSchedule parse_schedule(std::string_view text, long epochs);

}  // namespace hamreg::cli
