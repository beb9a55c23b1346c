#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "hamreg/models/models.hpp"
#include "hamreg/physics/pendulum.hpp"

namespace hamreg::training {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class Split { Full, Small };

std::string to_string(Split s);
Split parse_split(std::string_view name);

/// One observation: state, exact time derivative, and the total energy of
/// the trajectory it was sampled from.
struct Sample {
    Vector z;
    Vector zdot;
    double h_hat = 0.0;
    int traj_id = 0;
    double t = 0.0;
};

struct Provenance {
    double dt = 0.1;
    /// RK4 steps per dt interval; at a bare 0.1 s step the double pendulum
    /// drifts several percent off its energy level within 150 s.
    int substeps = 10;
    double sample_interval = 1.0;
    double duration = 150.0;
    std::uint64_t seed = 0;
    /// Initial conditions as stacked canonical states (q, p).
    std::vector<Vector> initial_conditions;
};

struct Dataset {
    std::vector<Sample> samples;
    physics::SystemId system = physics::SystemId::Single;
    models::Coords coords = models::Coords::Generalized;
    Split split = Split::Full;
    Provenance provenance;
    physics::SystemParams sys{};

    std::size_t size() const noexcept { return samples.size(); }
    int state_dim() const { return models::state_dim(system, coords); }

    /// Nonempty, homogeneous dimensions, finite entries, one Ĥ per trajectory.
    void validate() const;

    /// Training initial conditions as canonical states.
    std::vector<physics::State> training_ics() const;
};

/// Row count the split must reach: 600/64 (single) or 6000/600 (double).
std::size_t expected_sample_count(physics::SystemId system, Split split);

/// The four training initial conditions as canonical states.
std::vector<physics::State> training_initial_conditions(physics::SystemId system, std::uint64_t seed,
                                                        const physics::SystemParams& sys = {});

/// Four 150 s RK4 trajectories (dt = 0.1, ten substeps each) sampled every 1 s / 10 s (single)
/// or 0.1 s / 1 s (double). Single-pendulum ICs are 36°, 72°, 108°, 144° at
/// rest; double-pendulum ICs are seeded uniform angles at rest.
Dataset generate_dataset(physics::SystemId system, Split split, models::Coords coords, std::uint64_t seed,
                         const physics::SystemParams& sys = {});

}  // namespace hamreg::training
