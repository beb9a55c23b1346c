#include "hamreg/evaluation/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "hamreg/integrator/rk4.hpp"
#include "hamreg/parallel.hpp"

namespace hamreg::evaluation {

using physics::SystemId;

std::vector<physics::State> sample_test_ics(SystemId system, int n, std::uint64_t seed,
                                            std::span<const physics::State> training_ics) {
    if (n < 1) throw ConfigError("need at least one test initial condition");
    const int d = physics::dof(system);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
    std::vector<physics::State> out;
    while (static_cast<int>(out.size()) < n) {
        Vector q(d);
        for (int i = 0; i < d; ++i) q(i) = angle(rng);
        const Vector p = Vector::Zero(d);
        const bool seen = std::any_of(training_ics.begin(), training_ics.end(), [&](const physics::State& t) {
            return t.q.size() == d && (t.q - q).cwiseAbs().maxCoeff() < 1e-6 && (t.p - p).cwiseAbs().maxCoeff() < 1e-6;
        });
        if (!seen) out.push_back({q, p});
    }
    return out;
}

namespace {

constexpr double kDivergenceNorm = 1e6;

/// Runs the rollout and converts every output state to its true energy.
template <class Energy>
Rollout measure(const integrator::VectorField& field, const Vector& z0, double horizon, RolloutGrid grid,
                double e_max, Energy&& energy) {
    if (!(horizon >= 0.0) || !(grid.dt > 0.0) || grid.substeps < 1) {
        throw ConfigError("horizon must be non-negative, dt positive and substeps at least 1");
    }
    const long steps = std::lround(horizon / grid.dt);
    if (std::abs(static_cast<double>(steps) * grid.dt - horizon) > 1e-9 * std::max(1.0, horizon)) {
        throw ConfigError("horizon must be an integer number of time steps");
    }
    // Model failures (degenerate systems, non-finite intermediates) surface
    // as a non-finite stage so the integrator stops with a marker.
    const integrator::VectorField guarded = [&field](double t, const Vector& z) -> Vector {
        try {
            return field(t, z);
        } catch (const Error&) {
            return Vector::Constant(z.size(), std::numeric_limits<double>::quiet_NaN());
        }
    };
    const auto traj = integrator::integrate(guarded, z0, grid.dt / grid.substeps, steps * grid.substeps,
                                            [](const Vector& z) { return !(z.norm() <= kDivergenceNorm); });

    Rollout r;
    r.diverged = !traj.complete();
    if (traj.failure) r.note = *traj.failure;
    const double e0 = energy(z0);
    const auto stride = static_cast<std::size_t>(grid.substeps);
    for (std::size_t i = 0; i < traj.states.size(); i += stride) {
        const Vector& z = traj.states[i];
        if (!(z.norm() <= kDivergenceNorm)) break;
        r.times.push_back(static_cast<double>(i / stride) * grid.dt);
        r.abs_de_percent.push_back(100.0 * std::abs(energy(z) - e0) / e_max);
    }
    return r;
}

}  // namespace

Rollout energy_error_rollout(const models::ModelSpec& spec, const physics::State& ic, double horizon, RolloutGrid grid) {
    spec.validate();
    const SystemId id = spec.system;
    const physics::SystemParams& sys = spec.sys;
    const int d = physics::dof(id);
    const double e_max = physics::max_potential_energy(id, sys);
    const integrator::VectorField field = models::vector_field(spec);

    switch (spec.family) {
        case models::Family::Baseline:
        case models::Family::Hnn:
            return measure(field, ic.stacked(), horizon, grid, e_max, [&](const Vector& z) {
                return physics::true_energy(id, physics::State::from_stacked(z), sys);
            });
        case models::Family::Chnn:
            // Off-manifold drift is reported through the energy, never projected away.
            return measure(field, physics::to_cartesian(id, ic, sys).stacked(), horizon, grid, e_max,
                           [&](const Vector& z) {
                               return physics::true_energy(id, physics::CartesianState::from_stacked(z), sys);
                           });
        case models::Family::Lnn: {
            Vector y0(2 * d);
            y0 << ic.q, physics::velocities_from_momenta(id, ic.q, ic.p, sys);
            return measure(field, y0, horizon, grid, e_max, [&](const Vector& y) {
                const Vector q = y.head(d);
                return physics::true_energy(id, physics::State{q, physics::momenta_from_velocities(id, q, y.tail(d), sys)}, sys);
            });
        }
    }
    throw ConfigError("unknown model family");
}

Rollout ground_truth_rollout(SystemId id, const physics::State& ic, double horizon, const physics::SystemParams& sys,
                             RolloutGrid grid) {
    const integrator::VectorField field = [&](double, const Vector& z) { return physics::hamiltonian_field(id, z, sys); };
    return measure(field, ic.stacked(), horizon, grid, physics::max_potential_energy(id, sys), [&](const Vector& z) {
        return physics::true_energy(id, physics::State::from_stacked(z), sys);
    });
}

EnergyMetrics aggregate(std::vector<Rollout> rollouts, double horizon) {
    EnergyMetrics m;
    m.horizon = horizon;
    m.n_ics = static_cast<int>(rollouts.size());
    double sum = 0.0;
    std::size_t count = 0;
    for (const Rollout& r : rollouts) {
        m.diverged = m.diverged || r.diverged;
        for (double v : r.abs_de_percent) {
            sum += v;
            m.max_de = std::max(m.max_de, v);
            ++count;
        }
    }
    if (count > 0) {
        m.mean_abs_de = sum / static_cast<double>(count);
        double ss = 0.0;
        for (const Rollout& r : rollouts)
            for (double v : r.abs_de_percent) ss += (v - m.mean_abs_de) * (v - m.mean_abs_de);
        m.std_abs_de = std::sqrt(ss / static_cast<double>(count));
    }
    m.series = std::move(rollouts);
    return m;
}

EnergyMetrics evaluate_model(const models::ModelSpec& spec, std::span<const physics::State> ics, double horizon,
                             RolloutGrid grid) {
    std::vector<Rollout> rollouts(ics.size());
    parallel_for(ics.size(), [&](std::size_t i) { rollouts[i] = energy_error_rollout(spec, ics[i], horizon, grid); });
    return aggregate(std::move(rollouts), horizon);
}

EnergyMetrics evaluate_ground_truth(SystemId system, std::span<const physics::State> ics, double horizon,
                                    const physics::SystemParams& sys, RolloutGrid grid) {
    std::vector<Rollout> rollouts(ics.size());
    parallel_for(ics.size(), [&](std::size_t i) { rollouts[i] = ground_truth_rollout(system, ics[i], horizon, sys, grid); });
    return aggregate(std::move(rollouts), horizon);
}

const std::vector<std::string>& scheme_order() {
    static const std::vector<std::string> order = {"Baseline", "HNN",           "HNN + H-Reg.",
                                                   "CHNN",     "CHNN + H-Reg.", "LNN"};
    return order;
}

namespace {

std::size_t scheme_rank(const std::string& scheme) {
    const auto& order = scheme_order();
    const auto it = std::find(order.begin(), order.end(), scheme);
    return static_cast<std::size_t>(it - order.begin());
}

}  // namespace

std::vector<SchemeMetrics> metrics_table(std::span<const SchemeModel> schemes, std::span<const physics::State> ics,
                                         double horizon, RolloutGrid grid) {
    if (!schemes.empty()) {
        std::optional<SystemId> system;
        for (const SchemeModel& s : schemes) {
            if (!s.model) continue;
            if (system && *system != s.model->system) throw ConfigError("metrics_table: schemes describe different systems");
            system = s.model->system;
        }
    }
    std::vector<SchemeMetrics> rows(schemes.size());
    for (std::size_t i = 0; i < schemes.size(); ++i) {
        rows[i].scheme = schemes[i].scheme;
        if (schemes[i].model) rows[i].metrics = evaluate_model(*schemes[i].model, ics, horizon, grid);
    }
    std::stable_sort(rows.begin(), rows.end(), [](const SchemeMetrics& a, const SchemeMetrics& b) {
        return scheme_rank(a.scheme) < scheme_rank(b.scheme);
    });
    return rows;
}

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(4) << v;
    return os.str();
}

}  // namespace

std::string render_table(std::span<const TableRow> rows, const std::string& title) {
    const std::vector<std::string> header = {"Scheme", "dE_f", "max dE_f", "dE_s", "max dE_s"};
    std::vector<std::vector<std::string>> cells;
    cells.push_back(header);
    for (const TableRow& row : rows) {
        std::vector<std::string> line = {row.scheme};
        for (const auto* part : {&row.full, &row.small}) {
            if (!part->has_value() || (*part)->renders_as_dash()) {
                line.emplace_back("-");
                line.emplace_back("-");
            } else {
                const EnergyMetrics& m = *(*part)->metrics;
                line.push_back(fmt(m.mean_abs_de) + " +/- " + fmt(m.std_abs_de));
                line.push_back(fmt(m.max_de));
            }
        }
        cells.push_back(std::move(line));
    }
    std::vector<std::size_t> width(header.size(), 0);
    for (const auto& line : cells)
        for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());

    std::ostringstream os;
    os << title << "\n";
    for (std::size_t r = 0; r < cells.size(); ++r) {
        for (std::size_t c = 0; c < cells[r].size(); ++c) {
            if (c > 0) os << " | ";
            if (c == 0) {
                os << std::left << std::setw(static_cast<int>(width[c])) << cells[r][c];
            } else {
                os << std::right << std::setw(static_cast<int>(width[c])) << cells[r][c];
            }
        }
        os << "\n";
        if (r == 0) {
            std::size_t total = 0;
            for (std::size_t w : width) total += w;
            os << std::string(total + 3 * (width.size() - 1), '-') << "\n";
        }
    }
    return os.str();
}

nlohmann::json metrics_json(const SchemeMetrics& m, const std::string& split) {
    nlohmann::json j;
    j["scheme"] = m.scheme;
    j["dataset_split"] = split;
    if (m.metrics) {
        j["mean"] = m.metrics->mean_abs_de;
        j["std"] = m.metrics->std_abs_de;
        j["max"] = m.metrics->max_de;
        j["n_ics"] = m.metrics->n_ics;
        j["horizon_s"] = m.metrics->horizon;
        j["diverged"] = m.metrics->diverged;
    } else {
        j["mean"] = nullptr;
        j["std"] = nullptr;
        j["max"] = nullptr;
        j["n_ics"] = 0;
        j["horizon_s"] = nullptr;
        j["diverged"] = true;
    }
    return j;
}

std::string series_csv(const EnergyMetrics& m) {
    std::size_t rows = 0;
    const Rollout* longest = nullptr;
    for (const Rollout& r : m.series) {
        if (r.times.size() > rows) {
            rows = r.times.size();
            longest = &r;
        }
    }
    std::ostringstream os;
    os << std::setprecision(17) << "t";
    for (std::size_t k = 0; k < m.series.size(); ++k) os << ",ic" << k;
    os << "\n";
    for (std::size_t i = 0; i < rows; ++i) {
        os << longest->times[i];
        for (const Rollout& r : m.series) {
            os << ',';
            if (i < r.abs_de_percent.size()) os << r.abs_de_percent[i];
        }
        os << "\n";
    }
    return os.str();
}

}  // namespace hamreg::evaluation
