#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "hamreg/training/dataset.hpp"
#include "hamreg/training/train.hpp"

namespace hamreg::cli {

/// Dataset as CSV: `#`-prefixed metadata lines, then the header
/// `traj_id,t,q...,p...,qdot...,pdot...,H_hat` (Cartesian:
/// `x...,px...,xdot...,pxdot...,H_hat`) and one row per sample. Reals are
/// written with 17 significant digits so parsing restores them exactly.
std::string dataset_to_csv(const training::Dataset& ds);
training::Dataset dataset_from_csv(std::string_view text);

void write_dataset(const training::Dataset& ds, const std::filesystem::path& path);
training::Dataset read_dataset(const std::filesystem::path& path);

/// epoch,loss,lr
std::string history_to_csv(std::span<const training::HistoryEntry> history);

void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

}  // namespace hamreg::cli
