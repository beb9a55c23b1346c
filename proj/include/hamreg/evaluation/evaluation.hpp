#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "hamreg/models/models.hpp"
#include "hamreg/physics/pendulum.hpp"

namespace hamreg::evaluation {

using Vector = Eigen::VectorXd;

/// Uniform angles in (−π, π) at rest, skipping any draw within 1e-6 (max
/// norm) of a training initial condition. Deterministic in `seed`.
std::vector<physics::State> sample_test_ics(physics::SystemId system, int n, std::uint64_t seed,
                                            std::span<const physics::State> training_ics = {});

/// |ΔE(t)| of one rollout in percent of the maximum potential energy.
struct Rollout {
    std::vector<double> times;
    std::vector<double> abs_de_percent;
    bool diverged = false;
    std::string note;
};

/// Output interval and RK4 substeps per interval used by rollouts.
///
/// Plain RK4 at 0.1 s loses up to ~0.8% (single) and tens of percent
/// (double) of the energy on the exact dynamics, which would swamp the
/// model errors being measured; ten substeps bring that floor down to
/// ~1e-5% and ~0.06%.
struct RolloutGrid {
    double dt = 0.1;
    int substeps = 10;
};

/// Simulates the model's learned field with RK4 from `ic` and measures the
/// true energy of every predicted state against the initial one, sampled
/// every grid.dt. A state norm above 1e6 or a failing field truncates the
/// series and sets `diverged`.
Rollout energy_error_rollout(const models::ModelSpec& spec, const physics::State& ic, double horizon,
                             RolloutGrid grid = {});

/// Same measurement for the exact dynamics; the integrator floor.
Rollout ground_truth_rollout(physics::SystemId system, const physics::State& ic, double horizon,
                             const physics::SystemParams& sys = {}, RolloutGrid grid = {});

/// Pooled statistics over every (IC, time) sample.
struct EnergyMetrics {
    double mean_abs_de = 0.0;
    double std_abs_de = 0.0;
    double max_de = 0.0;
    int n_ics = 0;
    double horizon = 0.0;
    bool diverged = false;
    std::vector<Rollout> series;
};

EnergyMetrics aggregate(std::vector<Rollout> rollouts, double horizon);

/// Rollouts from every IC (concurrently, capped by HAMREG_THREADS).
EnergyMetrics evaluate_model(const models::ModelSpec& spec, std::span<const physics::State> ics, double horizon,
                             RolloutGrid grid = {});
EnergyMetrics evaluate_ground_truth(physics::SystemId system, std::span<const physics::State> ics, double horizon,
                                    const physics::SystemParams& sys = {}, RolloutGrid grid = {});

/// Table row labels in display order.
const std::vector<std::string>& scheme_order();

/// A trained scheme; `model` is empty when training diverged.
struct SchemeModel {
    std::string scheme;
    std::optional<models::ModelSpec> model;
};

struct SchemeMetrics {
    std::string scheme;
    std::optional<EnergyMetrics> metrics;  // empty: training diverged

    bool renders_as_dash() const { return !metrics || metrics->diverged; }
};

/// Evaluates every scheme on the same ICs; rows sorted by scheme_order().
std::vector<SchemeMetrics> metrics_table(std::span<const SchemeModel> schemes, std::span<const physics::State> ics,
                                         double horizon, RolloutGrid grid = {});

/// One table row with both dataset splits.
struct TableRow {
    std::string scheme;
    std::optional<SchemeMetrics> full;
    std::optional<SchemeMetrics> small;
};

/// Aligned plain-text table: Scheme | ΔE_f | max ΔE_f | ΔE_s | max ΔE_s.
std::string render_table(std::span<const TableRow> rows, const std::string& title);

/// {scheme, dataset_split, mean, std, max, n_ics, horizon_s, diverged}
nlohmann::json metrics_json(const SchemeMetrics& m, const std::string& split);

/// t, then one |ΔE|% column per rollout; truncated rollouts leave blanks.
std::string series_csv(const EnergyMetrics& m);

}  // namespace hamreg::evaluation
