#include "hamreg/training/dataset.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "hamreg/integrator/rk4.hpp"

namespace hamreg::training {

using physics::SystemId;

std::string to_string(Split s) { return s == Split::Full ? "f" : "s"; }

Split parse_split(std::string_view name) {
    if (name == "f") return Split::Full;
    if (name == "s") return Split::Small;
    throw ConfigError("unknown split '" + std::string(name) + "' (expected f|s)");
}

void Dataset::validate() const {
    if (samples.empty()) throw ConfigError("dataset is empty");
    const int n = state_dim();
    std::map<int, double> level;
    for (const Sample& s : samples) {
        if (s.z.size() != n || s.zdot.size() != n) throw ShapeError("dataset sample has wrong dimension");
        if (!s.z.allFinite() || !s.zdot.allFinite() || !std::isfinite(s.h_hat)) {
            throw ConfigError("dataset sample is not finite");
        }
        const auto [it, inserted] = level.emplace(s.traj_id, s.h_hat);
        if (!inserted && std::abs(it->second - s.h_hat) > 1e-9) {
            throw ConfigError("energy level differs within trajectory " + std::to_string(s.traj_id));
        }
    }
}

std::vector<physics::State> Dataset::training_ics() const {
    std::vector<physics::State> ics;
    for (const Vector& z : provenance.initial_conditions) ics.push_back(physics::State::from_stacked(z));
    return ics;
}

std::size_t expected_sample_count(SystemId system, Split split) {
    if (system == SystemId::Single) return split == Split::Full ? 600 : 64;
    return split == Split::Full ? 6000 : 600;
}

std::vector<physics::State> training_initial_conditions(SystemId system, std::uint64_t seed,
                                                        const physics::SystemParams& sys) {
    std::vector<physics::State> ics;
    if (system == SystemId::Single) {
        for (int k = 1; k <= 4; ++k) {
            Vector q(1), p(1);
            q(0) = k * std::numbers::pi / 5.0;
            p(0) = 0.0;
            ics.push_back({q, p});
        }
        return ics;
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
    for (int k = 0; k < 4; ++k) {
        Vector q(2);
        q(0) = angle(rng);
        q(1) = angle(rng);
        ics.push_back({q, physics::momenta_from_velocities(system, q, Vector::Zero(2), sys)});
    }
    return ics;
}

Dataset generate_dataset(SystemId system, Split split, models::Coords coords, std::uint64_t seed,
                         const physics::SystemParams& sys) {
    sys.validate();
    constexpr double dt = 0.1;
    constexpr int substeps = 10;
    constexpr long steps = 1500;  // 150 s
    const int d = physics::dof(system);

    // Sampling stride in RK4 steps and whether the final state is kept.
    long stride = 0;
    bool include_end = false;
    if (system == SystemId::Single) {
        stride = split == Split::Full ? 10 : 100;
        include_end = split == Split::Small;
    } else {
        stride = split == Split::Full ? 1 : 10;
    }

    Dataset ds;
    ds.system = system;
    ds.coords = coords;
    ds.split = split;
    ds.sys = sys;
    ds.provenance.dt = dt;
    ds.provenance.substeps = substeps;
    ds.provenance.sample_interval = static_cast<double>(stride) * dt;
    ds.provenance.duration = static_cast<double>(steps) * dt;
    ds.provenance.seed = seed;

    const auto ics = training_initial_conditions(system, seed, sys);
    for (std::size_t id = 0; id < ics.size(); ++id) {
        const physics::State& ic = ics[id];
        ds.provenance.initial_conditions.push_back(ic.stacked());
        const double h_hat = physics::true_energy(system, ic, sys);

        // Angle/velocity form of the equations of motion.
        Vector y0(2 * d);
        y0 << ic.q, physics::velocities_from_momenta(system, ic.q, ic.p, sys);
        const auto traj = integrator::integrate(
            [&](double, const Vector& y) { return physics::angular_field(system, y, sys); }, y0, dt / substeps, steps * substeps);
        if (!traj.complete()) throw GenerationError("ground-truth integration failed: " + *traj.failure);

        const long last = include_end ? steps : steps - 1;
        for (long i = 0; i <= last; i += stride) {
            const Vector& y = traj.states[static_cast<std::size_t>(i * substeps)];
            physics::State st{y.head(d), physics::momenta_from_velocities(system, y.head(d), y.tail(d), sys)};
            Sample s;
            s.traj_id = static_cast<int>(id);
            s.t = static_cast<double>(i) * dt;
            s.h_hat = h_hat;
            if (coords == models::Coords::Generalized) {
                s.z = st.stacked();
                s.zdot = physics::hamiltonian_field(system, s.z, sys);
            } else {
                const physics::CartesianState c = physics::to_cartesian(system, st, sys);
                const physics::ConstraintSet cs(system, sys);
                if (cs.values(c.x).cwiseAbs().maxCoeff() > 1e-9) {
                    throw GenerationError("Cartesian sample violates the rod constraints");
                }
                const Eigen::JacobiSVD<Matrix> svd(cs.jacobian(c.x));
                if (svd.singularValues().minCoeff() < 1e-9) {
                    throw GenerationError("constraint Jacobian is rank deficient at a sample");
                }
                s.z = c.stacked();
                s.zdot = physics::cartesian_derivative(system, st, sys).stacked();
            }
            ds.samples.push_back(std::move(s));
        }
    }

    const std::size_t expected = expected_sample_count(system, split);
    if (ds.samples.size() != expected) {
        throw GenerationError("generated " + std::to_string(ds.samples.size()) + " samples, expected " +
                              std::to_string(expected));
    }
    ds.validate();
    return ds;
}

}  // namespace hamreg::training
