#include "hamreg/training/losses.hpp"

#include <limits>

#include "hamreg/autodiff/matrix_tape.hpp"

namespace hamreg::training {

using ad::MatrixTape;
using models::Family;

Batch make_batch(Family family, const Dataset& ds) {
    ds.validate();
    if (ds.coords != models::native_coords(family)) {
        throw ConfigError(models::to_string(family) + " training needs a " +
                          models::to_string(models::native_coords(family)) + " dataset, got " +
                          models::to_string(ds.coords));
    }
    const auto N = static_cast<Eigen::Index>(ds.size());
    const Eigen::Index n = ds.state_dim();
    const Eigen::Index d = physics::dof(ds.system);

    Batch b;
    b.family = family;
    b.system = ds.system;
    b.sys = ds.sys;
    b.inputs.resize(n, N);
    b.targets.resize(n, N);
    b.h_hat.resize(1, N);
    for (Eigen::Index i = 0; i < N; ++i) {
        const Sample& s = ds.samples[static_cast<std::size_t>(i)];
        b.h_hat(0, i) = s.h_hat;
        b.inputs.col(i) = s.z;
        b.targets.col(i) = s.zdot;
    }

    if (family == Family::Lnn) {
        b.targets.resize(d, N);
        for (Eigen::Index i = 0; i < N; ++i) {
            const Sample& s = ds.samples[static_cast<std::size_t>(i)];
            const Vector q = s.z.head(d);
            const Vector qdot = s.zdot.head(d);
            b.inputs.col(i) << q, qdot;
            b.targets.col(i) = physics::angular_acceleration(ds.system, q, qdot, ds.sys);
        }
        for (Eigen::Index k = 0; k < d; ++k) {
            Matrix dir = Matrix::Zero(n, N);
            dir.row(d + k).setOnes();
            b.directions.push_back(std::move(dir));
        }
    } else if (family == Family::Chnn) {
        const physics::ConstraintSet cs(ds.system, ds.sys);
        for (int k = 0; k < cs.count(); ++k) b.directions.emplace_back(n, N);
        for (Eigen::Index i = 0; i < N; ++i) {
            const Matrix u = models::constraint_directions(cs, b.inputs.col(i));
            for (int k = 0; k < cs.count(); ++k) b.directions[static_cast<std::size_t>(k)].col(i) = u.col(k);
        }
    }
    return b;
}

namespace {

double mean_of(const std::vector<double>& per_sample) {
    double sum = 0.0;
    for (double v : per_sample) sum += v;
    return sum / static_cast<double>(per_sample.size());
}

/// Adds λ(H − Ĥ)² per sample and returns the seed for the H node.
Matrix add_energy_term(std::vector<double>& per_sample, const Matrix& h, const Matrix& h_hat, double lambda,
                       double inv_n) {
    const Matrix err = h - h_hat;
    for (Eigen::Index i = 0; i < err.cols(); ++i) per_sample[static_cast<std::size_t>(i)] += lambda * err(0, i) * err(0, i);
    return (2.0 * lambda * inv_n) * err;
}

LossGrad evaluate(const nn::MLPParams& params, const Batch& batch, std::optional<double> lambda_h, bool want_grad) {
    if (lambda_h) {
        if (batch.family != Family::Hnn && batch.family != Family::Chnn) {
            throw ConfigError("energy regularization applies to hnn and chnn models only");
        }
        if (!(*lambda_h >= 0.0)) throw ConfigError("lambda_h must be non-negative");
    }
    const Eigen::Index N = batch.size();
    if (N == 0) throw ConfigError("empty batch");
    const Eigen::Index n = batch.inputs.rows();
    const double inv_n = 1.0 / static_cast<double>(N);

    MatrixTape tape;
    const nn::TapeParams tp = nn::record_params(tape, params);
    const MatrixTape::Node input = tape.constant(batch.inputs);
    std::vector<double> per_sample(static_cast<std::size_t>(N), 0.0);
    std::vector<std::pair<MatrixTape::Node, Matrix>> seeds;

    switch (batch.family) {
        case Family::Baseline: {
            const MatrixTape::Node out = nn::record_forward(tape, tp, input);
            const Matrix r = tape.value(out) - batch.targets;
            for (Eigen::Index i = 0; i < N; ++i) per_sample[static_cast<std::size_t>(i)] = r.col(i).squaredNorm();
            seeds.emplace_back(out, (2.0 * inv_n) * r);
            break;
        }
        case Family::Hnn: {
            const nn::TapeJet jet = nn::record_jet(tape, tp, input, {});
            const Matrix& g = tape.value(jet.gradient);
            const Eigen::Index d = n / 2;
            // rows [0,d): ∂H/∂q + ṗ, rows [d,2d): ∂H/∂p − q̇
            Matrix r(n, N);
            r.topRows(d) = g.topRows(d) + batch.targets.bottomRows(d);
            r.bottomRows(d) = g.bottomRows(d) - batch.targets.topRows(d);
            for (Eigen::Index i = 0; i < N; ++i) per_sample[static_cast<std::size_t>(i)] = r.col(i).squaredNorm();
            seeds.emplace_back(jet.gradient, (2.0 * inv_n) * r);
            if (lambda_h) {
                seeds.emplace_back(jet.value, add_energy_term(per_sample, tape.value(jet.value), batch.h_hat, *lambda_h, inv_n));
            }
            break;
        }
        case Family::Chnn: {
            std::vector<MatrixTape::Node> dirs;
            for (const Matrix& u : batch.directions) dirs.push_back(tape.constant(u));
            const nn::TapeJet jet = nn::record_jet(tape, tp, input, dirs);
            const physics::ConstraintSet cs(batch.system, batch.sys);
            const auto k = static_cast<Eigen::Index>(dirs.size());
            const Matrix& g = tape.value(jet.gradient);
            Matrix g_bar(n, N);
            std::vector<Matrix> hvp_bar(static_cast<std::size_t>(k), Matrix(n, N));
            Matrix hvp(n, k);
            for (Eigen::Index i = 0; i < N; ++i) {
                for (Eigen::Index j = 0; j < k; ++j) hvp.col(j) = tape.value(jet.hvp[static_cast<std::size_t>(j)]).col(i);
                const models::ConstrainedFlow flow = models::constrained_flow(cs, batch.inputs.col(i), g.col(i), hvp);
                const Vector r = flow.zdot - batch.targets.col(i);
                per_sample[static_cast<std::size_t>(i)] = r.squaredNorm();
                if (!want_grad) continue;
                const models::ConstrainedFlowAdjoint adj = models::constrained_flow_vjp(cs, flow, (2.0 * inv_n) * r);
                g_bar.col(i) = adj.grad;
                for (Eigen::Index j = 0; j < k; ++j) hvp_bar[static_cast<std::size_t>(j)].col(i) = adj.hvp.col(j);
            }
            seeds.emplace_back(jet.gradient, std::move(g_bar));
            for (Eigen::Index j = 0; j < k; ++j) {
                seeds.emplace_back(jet.hvp[static_cast<std::size_t>(j)], std::move(hvp_bar[static_cast<std::size_t>(j)]));
            }
            if (lambda_h) {
                seeds.emplace_back(jet.value, add_energy_term(per_sample, tape.value(jet.value), batch.h_hat, *lambda_h, inv_n));
            }
            break;
        }
        case Family::Lnn: {
            std::vector<MatrixTape::Node> dirs;
            for (const Matrix& u : batch.directions) dirs.push_back(tape.constant(u));
            const nn::TapeJet jet = nn::record_jet(tape, tp, input, dirs);
            const Eigen::Index d = n / 2;
            const Matrix& g = tape.value(jet.gradient);
            Matrix g_bar = Matrix::Zero(n, N);
            std::vector<Matrix> hvp_bar(static_cast<std::size_t>(d), Matrix::Zero(n, N));
            Matrix mass(d, d), mixed(d, d);
            for (Eigen::Index i = 0; i < N; ++i) {
                for (Eigen::Index k = 0; k < d; ++k) {
                    const auto col = tape.value(jet.hvp[static_cast<std::size_t>(k)]).col(i);
                    mass.col(k) = col.tail(d);
                    mixed.row(k) = col.head(d).transpose();
                }
                const Vector qdot = batch.inputs.col(i).tail(d);
                const Vector rhs = g.col(i).head(d) - mixed * qdot;
                const Eigen::PartialPivLU<Matrix> lu(mass);
                const double rcond = lu.rcond();
                const double cond = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
                if (!(cond <= 1e12)) throw DegenerateLagrangian(cond);
                const Vector acc = lu.solve(rhs);
                const Vector r = acc - batch.targets.col(i);
                per_sample[static_cast<std::size_t>(i)] = r.squaredNorm();
                if (!want_grad) continue;
                const Vector rhs_bar = mass.transpose().partialPivLu().solve((2.0 * inv_n) * r);
                const Matrix mass_bar = -rhs_bar * acc.transpose();
                g_bar.col(i).head(d) = rhs_bar;
                for (Eigen::Index j = 0; j < d; ++j) {
                    Matrix& hb = hvp_bar[static_cast<std::size_t>(j)];
                    hb.col(i).head(d) = -rhs_bar(j) * qdot;
                    hb.col(i).tail(d) = mass_bar.col(j);
                }
            }
            seeds.emplace_back(jet.gradient, std::move(g_bar));
            for (Eigen::Index k = 0; k < d; ++k) {
                seeds.emplace_back(jet.hvp[static_cast<std::size_t>(k)], std::move(hvp_bar[static_cast<std::size_t>(k)]));
            }
            break;
        }
    }

    LossGrad out;
    out.loss = mean_of(per_sample);
    if (want_grad) {
        tape.backward(seeds);
        out.grad = nn::collect_gradient(tape, tp);
    }
    return out;
}

Batch batch_for(const models::ModelSpec& spec, const Dataset& ds) {
    if (ds.system != spec.system) throw ConfigError("dataset and model describe different systems");
    return make_batch(spec.family, ds);
}

}  // namespace

LossGrad loss_and_gradient(const nn::MLPParams& params, const Batch& batch, std::optional<double> lambda_h) {
    return evaluate(params, batch, lambda_h, true);
}

double loss_value(const nn::MLPParams& params, const Batch& batch, std::optional<double> lambda_h) {
    return evaluate(params, batch, lambda_h, false).loss;
}

double hnn_loss(const models::ModelSpec& spec, const Dataset& ds) {
    if (spec.family != Family::Hnn && spec.family != Family::Chnn) {
        throw UnsupportedFamily("hnn_loss needs an hnn or chnn model");
    }
    return loss_value(spec.params, batch_for(spec, ds), std::nullopt);
}

double regularized_loss(const models::ModelSpec& spec, const Dataset& ds, double lambda_h) {
    if (spec.family != Family::Hnn && spec.family != Family::Chnn) {
        throw UnsupportedFamily("regularized_loss needs an hnn or chnn model");
    }
    return loss_value(spec.params, batch_for(spec, ds), lambda_h);
}

double lnn_loss(const models::ModelSpec& spec, const Dataset& ds) {
    if (spec.family != Family::Lnn) throw UnsupportedFamily("lnn_loss needs an lnn model");
    return loss_value(spec.params, batch_for(spec, ds), std::nullopt);
}

double baseline_loss(const models::ModelSpec& spec, const Dataset& ds) {
    if (spec.family != Family::Baseline) throw UnsupportedFamily("baseline_loss needs a baseline model");
    return loss_value(spec.params, batch_for(spec, ds), std::nullopt);
}

}  // namespace hamreg::training
