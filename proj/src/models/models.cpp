#include "hamreg/models/models.hpp"

#include <limits>

namespace hamreg::models {

std::string to_string(Family f) {
    switch (f) {
        case Family::Baseline: return "baseline";
        case Family::Hnn: return "hnn";
        case Family::Chnn: return "chnn";
        case Family::Lnn: return "lnn";
    }
    return "?";
}

std::string to_string(Coords c) { return c == Coords::Generalized ? "generalized" : "cartesian"; }

Family parse_family(std::string_view name) {
    if (name == "baseline") return Family::Baseline;
    if (name == "hnn") return Family::Hnn;
    if (name == "chnn") return Family::Chnn;
    if (name == "lnn") return Family::Lnn;
    throw ConfigError("unknown model family '" + std::string(name) + "' (expected baseline|hnn|chnn|lnn)");
}

Coords parse_coords(std::string_view name) {
    if (name == "generalized") return Coords::Generalized;
    if (name == "cartesian") return Coords::Cartesian;
    throw ConfigError("unknown coordinates '" + std::string(name) + "' (expected generalized|cartesian)");
}

Coords native_coords(Family f) { return f == Family::Chnn ? Coords::Cartesian : Coords::Generalized; }

int state_dim(physics::SystemId system, Coords coords) {
    const int n = physics::dof(system);
    return coords == Coords::Generalized ? 2 * n : 4 * n;
}

std::vector<int> default_layer_sizes(Family family, physics::SystemId system) {
    const int in = state_dim(system, native_coords(family));
    const int hidden = system == physics::SystemId::Single ? 32 : 128;
    const int out = family == Family::Baseline ? in : 1;
    return {in, hidden, hidden, out};
}

void ModelSpec::validate() const {
    sys.validate();
    if (coords != native_coords(family)) {
        throw ConfigError(to_string(family) + " models work in " + to_string(native_coords(family)) + " coordinates");
    }
    params.validate();
    const int n = state_dim(system, coords);
    if (params.input_dim() != n) {
        throw ShapeError("network input dimension " + std::to_string(params.input_dim()) + " does not match state dimension " +
                         std::to_string(n));
    }
    const int out = family == Family::Baseline ? n : 1;
    if (params.output_dim() != out) {
        throw ShapeError("network output dimension " + std::to_string(params.output_dim()) + ", expected " +
                         std::to_string(out));
    }
}

nn::Checkpoint ModelSpec::to_checkpoint() const {
    nn::Checkpoint ck;
    ck.params = params;
    ck.model = to_string(family);
    ck.system = physics::to_string(system);
    ck.coords = to_string(coords);
    return ck;
}

ModelSpec ModelSpec::from_checkpoint(const nn::Checkpoint& ck, const physics::SystemParams& sys) {
    ModelSpec spec;
    spec.family = parse_family(ck.model);
    spec.coords = parse_coords(ck.coords);
    spec.system = physics::parse_system(ck.system);
    spec.sys = sys;
    spec.params = ck.params;
    spec.validate();
    return spec;
}

JetFunction mlp_jet_function(const nn::MLPParams& params) {
    return [params](const Vector& z, const Matrix& directions) {
        nn::MlpJet j = nn::mlp_jet(params, z, directions);
        return Jet{j.value, std::move(j.gradient), std::move(j.hvp)};
    };
}

Vector symplectic_gradient(const Vector& grad) {
    const Eigen::Index n = grad.size() / 2;
    Vector out(grad.size());
    out << grad.tail(n), -grad.head(n);
    return out;
}

Vector euler_lagrange_acceleration(const JetFunction& lagrangian, const Vector& q, const Vector& qdot,
                                   double max_condition) {
    const Eigen::Index d = q.size();
    if (qdot.size() != d) throw ShapeError("q and qdot differ in dimension");
    Vector z(2 * d);
    z << q, qdot;
    Matrix dirs = Matrix::Zero(2 * d, d);
    for (Eigen::Index k = 0; k < d; ++k) dirs(d + k, k) = 1.0;
    const Jet jet = lagrangian(z, dirs);

    // Column k of jet.hvp is ∂(∇L)/∂q̇_k: rows [0,d) give ∂²L/∂q∂q̇_k,
    // rows [d,2d) give ∂²L/∂q̇∂q̇_k.
    const Matrix mass = jet.hvp.bottomRows(d);
    const Matrix mixed = jet.hvp.topRows(d).transpose();  // (j,k) = ∂²L/∂q̇_j∂q_k
    const Vector rhs = jet.gradient.head(d) - mixed * qdot;
    const Eigen::PartialPivLU<Matrix> lu(mass);
    const double rcond = lu.rcond();
    const double cond = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
    if (!(cond <= max_condition)) throw DegenerateLagrangian(cond);
    return lu.solve(rhs);
}

namespace {

void require_family(const ModelSpec& spec, Family f) {
    if (spec.family != f) {
        throw UnsupportedFamily("operation requires a " + to_string(f) + " model, got " + to_string(spec.family));
    }
}

}  // namespace

Vector baseline_vector_field(const ModelSpec& spec, const Vector& z) {
    require_family(spec, Family::Baseline);
    return nn::mlp_forward(spec.params, z);
}

Vector hnn_vector_field(const ModelSpec& spec, const Vector& z) {
    require_family(spec, Family::Hnn);
    return symplectic_gradient(nn::mlp_jet(spec.params, z, Matrix()).gradient);
}

Vector chnn_vector_field(const ModelSpec& spec, const physics::CartesianState& c) {
    require_family(spec, Family::Chnn);
    const physics::ConstraintSet cs = spec.constraints();
    const Vector z = c.stacked();
    const Matrix u = constraint_directions(cs, z);
    const nn::MlpJet jet = nn::mlp_jet(spec.params, z, u);
    return constrained_flow(cs, z, jet.gradient, jet.hvp).zdot;
}

Vector lnn_acceleration(const ModelSpec& spec, const Vector& q, const Vector& qdot) {
    require_family(spec, Family::Lnn);
    return euler_lagrange_acceleration(mlp_jet_function(spec.params), q, qdot);
}

double model_energy(const ModelSpec& spec, const Vector& z) {
    if (spec.family != Family::Hnn && spec.family != Family::Chnn) {
        throw UnsupportedFamily("model_energy is defined for hnn and chnn models, not " + to_string(spec.family));
    }
    return nn::mlp_forward(spec.params, z)(0);
}

integrator::VectorField vector_field(const ModelSpec& spec) {
    spec.validate();
    switch (spec.family) {
        case Family::Baseline:
            return [spec](double, const Vector& z) { return baseline_vector_field(spec, z); };
        case Family::Hnn:
            return [spec](double, const Vector& z) { return hnn_vector_field(spec, z); };
        case Family::Chnn:
            return [spec](double, const Vector& z) {
                return chnn_vector_field(spec, physics::CartesianState::from_stacked(z));
            };
        case Family::Lnn:
            return [spec](double, const Vector& z) {
                const Eigen::Index d = z.size() / 2;
                Vector out(z.size());
                out << z.tail(d), lnn_acceleration(spec, z.head(d), z.tail(d));
                return out;
            };
    }
    throw ConfigError("unknown model family");
}

}  // namespace hamreg::models
