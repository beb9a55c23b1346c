#include "hamreg/nn/mlp.hpp"

#include <cmath>
#include <random>

namespace hamreg::nn {

using ad::MatrixTape;

std::vector<int> MLPParams::layer_sizes() const {
    std::vector<int> sizes;
    if (weights.empty()) return sizes;
    sizes.push_back(static_cast<int>(weights.front().cols()));
    for (const auto& w : weights) sizes.push_back(static_cast<int>(w.rows()));
    return sizes;
}

std::size_t parameter_count(std::span<const int> layer_sizes) {
    std::size_t count = 0;
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        const auto in = static_cast<std::size_t>(layer_sizes[l]);
        const auto out = static_cast<std::size_t>(layer_sizes[l + 1]);
        count += in * out + out;
    }
    return count;
}

std::size_t MLPParams::parameter_count() const {
    const auto sizes = layer_sizes();
    return nn::parameter_count(sizes);
}

void MLPParams::validate() const {
    if (weights.empty()) throw ShapeError("network has no layers");
    if (weights.size() != biases.size()) throw ShapeError("weight and bias counts differ");
    for (std::size_t l = 0; l < weights.size(); ++l) {
        if (weights[l].rows() != biases[l].size()) {
            throw ShapeError("layer " + std::to_string(l) + ": bias length differs from output dimension");
        }
        if (l > 0 && weights[l].cols() != weights[l - 1].rows()) {
            throw ShapeError("layer " + std::to_string(l) + ": input dimension does not chain");
        }
    }
}

std::vector<double> MLPParams::flatten() const {
    std::vector<double> flat;
    flat.reserve(parameter_count());
    for (std::size_t l = 0; l < weights.size(); ++l) {
        const Matrix& w = weights[l];
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c) flat.push_back(w(r, c));
        for (Eigen::Index r = 0; r < biases[l].size(); ++r) flat.push_back(biases[l](r));
    }
    return flat;
}

MLPParams MLPParams::unflatten(std::span<const int> layer_sizes, std::span<const double> flat) {
    if (layer_sizes.size() < 2) throw ConfigError("network needs at least an input and an output layer");
    if (flat.size() != nn::parameter_count(layer_sizes)) throw ShapeError("flat parameter vector has wrong length");
    MLPParams p;
    std::size_t k = 0;
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        Matrix w(layer_sizes[l + 1], layer_sizes[l]);
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = flat[k++];
        Vector b(layer_sizes[l + 1]);
        for (Eigen::Index r = 0; r < b.size(); ++r) b(r) = flat[k++];
        p.weights.push_back(std::move(w));
        p.biases.push_back(std::move(b));
    }
    return p;
}

MLPParams MLPParams::zeros_like() const {
    MLPParams z;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        z.weights.push_back(Matrix::Zero(weights[l].rows(), weights[l].cols()));
        z.biases.push_back(Vector::Zero(biases[l].size()));
    }
    return z;
}

bool operator==(const MLPParams& a, const MLPParams& b) {
    if (a.weights.size() != b.weights.size()) return false;
    for (std::size_t l = 0; l < a.weights.size(); ++l) {
        if (a.weights[l].rows() != b.weights[l].rows() || a.weights[l].cols() != b.weights[l].cols()) return false;
        if (a.weights[l] != b.weights[l] || a.biases[l] != b.biases[l]) return false;
    }
    return true;
}

MLPParams init_params(std::span<const int> layer_sizes, std::uint64_t seed) {
    if (layer_sizes.size() < 2) throw ConfigError("layer_sizes needs at least two entries");
    for (int s : layer_sizes) {
        if (s <= 0) throw ConfigError("layer sizes must be positive");
    }
    std::mt19937_64 rng(seed);
    MLPParams p;
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        const int in = layer_sizes[l];
        const int out = layer_sizes[l + 1];
        const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
        std::uniform_real_distribution<double> dist(-bound, bound);
        Matrix w(out, in);
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = dist(rng);
        p.weights.push_back(std::move(w));
        p.biases.push_back(Vector::Zero(out));
    }
    return p;
}

Matrix mlp_forward_batch(const MLPParams& params, const Matrix& inputs) {
    if (inputs.rows() != params.input_dim()) throw ShapeError("mlp input dimension mismatch");
    Matrix act = inputs;
    const std::size_t L = params.num_layers();
    for (std::size_t l = 0; l < L; ++l) {
        Matrix pre = params.weights[l] * act;
        pre.colwise() += params.biases[l];
        act = (l + 1 == L) ? std::move(pre) : ad::softplus(pre);
    }
    return act;
}

Vector mlp_forward(const MLPParams& params, const Vector& input) {
    return mlp_forward_batch(params, input);
}

MlpJet mlp_jet(const MLPParams& params, const Vector& z, const Matrix& directions) {
    if (params.output_dim() != 1) throw ShapeError("mlp_jet requires a scalar-output network");
    if (z.size() != params.input_dim()) throw ShapeError("mlp input dimension mismatch");
    if (directions.cols() > 0 && directions.rows() != z.size()) throw ShapeError("direction dimension mismatch");
    const std::size_t L = params.num_layers();
    const Eigen::Index k = directions.cols();

    // Forward, keeping pre-activations and their tangents.
    std::vector<Vector> sig(L - 1), sig_p(L - 1);
    std::vector<Matrix> pre_t(L - 1);
    Vector act = z;
    Matrix act_t = directions;
    for (std::size_t l = 0; l + 1 < L; ++l) {
        Vector pre = params.weights[l] * act + params.biases[l];
        pre_t[l] = params.weights[l] * act_t;
        ad::Logistic lg = ad::logistic(pre);
        sig[l] = std::move(lg.s);
        sig_p[l] = std::move(lg.ds);
        act = ad::softplus(pre);
        act_t = sig[l].asDiagonal() * pre_t[l];
    }
    MlpJet jet;
    jet.value = (params.weights[L - 1] * act + params.biases[L - 1])(0);

    // Backward sweep and its tangent.
    Vector adj = params.weights[L - 1].row(0).transpose();
    Matrix adj_t = Matrix::Zero(adj.size(), k);
    for (std::size_t l = L - 1; l-- > 0;) {
        Matrix d_t = (sig_p[l].cwiseProduct(adj)).asDiagonal() * pre_t[l];
        d_t += sig[l].asDiagonal() * adj_t;
        Vector d = sig[l].cwiseProduct(adj);
        adj = params.weights[l].transpose() * d;
        adj_t = params.weights[l].transpose() * d_t;
    }
    jet.gradient = std::move(adj);
    jet.hvp = std::move(adj_t);
    return jet;
}

TapeParams record_params(MatrixTape& tape, const MLPParams& params) {
    params.validate();
    TapeParams tp;
    for (std::size_t l = 0; l < params.num_layers(); ++l) {
        tp.weights.push_back(tape.variable(params.weights[l]));
        tp.biases.push_back(tape.variable(params.biases[l]));
    }
    return tp;
}

MatrixTape::Node record_forward(MatrixTape& tape, const TapeParams& params, MatrixTape::Node input) {
    const std::size_t L = params.weights.size();
    MatrixTape::Node act = input;
    for (std::size_t l = 0; l < L; ++l) {
        MatrixTape::Node pre = tape.add_bias(tape.matmul(params.weights[l], act), params.biases[l]);
        act = (l + 1 == L) ? pre : tape.softplus(pre);
    }
    return act;
}

TapeJet record_jet(MatrixTape& tape, const TapeParams& params, MatrixTape::Node input,
                   std::span<const MatrixTape::Node> directions) {
    const std::size_t L = params.weights.size();
    if (tape.value(params.weights[L - 1]).rows() != 1) throw ShapeError("record_jet requires a scalar-output network");
    const Eigen::Index batch = tape.value(input).cols();
    const std::size_t k = directions.size();

    std::vector<MatrixTape::Node> sig(L - 1), sig_p(L - 1);
    std::vector<std::vector<MatrixTape::Node>> pre_t(k, std::vector<MatrixTape::Node>(L - 1));
    std::vector<MatrixTape::Node> act_t(directions.begin(), directions.end());

    MatrixTape::Node act = input;
    for (std::size_t l = 0; l + 1 < L; ++l) {
        MatrixTape::Node pre = tape.add_bias(tape.matmul(params.weights[l], act), params.biases[l]);
        sig[l] = tape.sigmoid(pre);
        if (k > 0) sig_p[l] = tape.sigmoid_prime(pre);
        for (std::size_t j = 0; j < k; ++j) {
            pre_t[j][l] = tape.matmul(params.weights[l], act_t[j]);
            act_t[j] = tape.hadamard(sig[l], pre_t[j][l]);
        }
        act = tape.softplus(pre);
    }
    TapeJet jet;
    jet.value = tape.add_bias(tape.matmul(params.weights[L - 1], act), params.biases[L - 1]);

    const MatrixTape::Node ones = tape.constant(Matrix::Ones(1, batch));
    MatrixTape::Node adj = tape.matmul_tn(params.weights[L - 1], ones);
    std::vector<MatrixTape::Node> adj_t(k, -1);  // -1 stands for an exact zero tangent
    for (std::size_t l = L - 1; l-- > 0;) {
        const MatrixTape::Node d = tape.hadamard(sig[l], adj);
        for (std::size_t j = 0; j < k; ++j) {
            MatrixTape::Node d_t = tape.hadamard(tape.hadamard(sig_p[l], pre_t[j][l]), adj);
            if (adj_t[j] >= 0) d_t = tape.add(d_t, tape.hadamard(sig[l], adj_t[j]));
            adj_t[j] = tape.matmul_tn(params.weights[l], d_t);
        }
        adj = tape.matmul_tn(params.weights[l], d);
    }
    jet.gradient = adj;
    for (std::size_t j = 0; j < k; ++j) {
        // A network without hidden layers has a constant gradient.
        jet.hvp.push_back(adj_t[j] >= 0 ? adj_t[j]
                                        : tape.constant(Matrix::Zero(tape.value(input).rows(), batch)));
    }
    return jet;
}

MLPParams collect_gradient(const MatrixTape& tape, const TapeParams& params) {
    MLPParams g;
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        g.weights.push_back(tape.adjoint(params.weights[l]));
        g.biases.push_back(tape.adjoint(params.biases[l]).col(0));
    }
    return g;
}

}  // namespace hamreg::nn
