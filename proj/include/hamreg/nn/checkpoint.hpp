#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"

#include "hamreg/nn/mlp.hpp"

namespace hamreg::nn {

/// Trained network plus the tags needed to rebuild its model.
///
/// Serialized as {"layer_sizes", "weights" (row-major per layer), "biases",
/// "model", "system", "coords"}; "scheme", "lambda_h" and "seed" are optional.
struct Checkpoint {
    MLPParams params;
    std::string model;   // hnn | chnn | lnn | baseline
    std::string system;  // single | double
    std::string coords;  // generalized | cartesian
    std::string scheme;  // display label, e.g. "HNN + H-Reg."
    std::optional<double> lambda_h;
    std::optional<long> seed;
};

nlohmann::json to_json(const Checkpoint& ck);
Checkpoint checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace hamreg::nn
