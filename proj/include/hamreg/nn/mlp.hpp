#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hamreg/autodiff/matrix_tape.hpp"
#include "hamreg/autodiff/tape.hpp"
#include "hamreg/errors.hpp"

namespace hamreg::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Weights and biases of a fully connected network. Hidden layers use
/// softplus, the output layer is affine.
struct MLPParams {
    std::vector<Matrix> weights;  // out × in
    std::vector<Vector> biases;   // out

    std::size_t num_layers() const noexcept { return weights.size(); }
    std::vector<int> layer_sizes() const;
    std::size_t parameter_count() const;
    int input_dim() const { return static_cast<int>(weights.front().cols()); }
    int output_dim() const { return static_cast<int>(weights.back().rows()); }

    /// Throws ShapeError unless consecutive layers chain.
    void validate() const;

    /// Layer by layer: weights row-major, then the bias.
    std::vector<double> flatten() const;
    static MLPParams unflatten(std::span<const int> layer_sizes, std::span<const double> flat);

    MLPParams zeros_like() const;

    friend bool operator==(const MLPParams& a, const MLPParams& b);
};

std::size_t parameter_count(std::span<const int> layer_sizes);

/// Glorot-uniform weights, zero biases, deterministic in `seed`.
MLPParams init_params(std::span<const int> layer_sizes, std::uint64_t seed);

Vector mlp_forward(const MLPParams& params, const Vector& input);

/// Columns of `inputs` are samples.
Matrix mlp_forward_batch(const MLPParams& params, const Matrix& inputs);

/// Same network evaluated on any scalar type (double, ad::Var<...>, ad::Dual<...>),
/// parameters given in flatten() order.
template <class S>
std::vector<S> mlp_forward_scalar(std::span<const int> sizes, std::span<const S> flat, std::span<const S> input) {
    using std::size_t;
    if (sizes.size() < 2) throw ConfigError("network needs at least an input and an output layer");
    if (input.size() != static_cast<size_t>(sizes[0])) throw ShapeError("mlp input dimension mismatch");
    if (flat.size() != parameter_count(sizes)) throw ShapeError("flat parameter vector has wrong length");
    std::vector<S> act(input.begin(), input.end());
    size_t offset = 0;
    for (size_t l = 0; l + 1 < sizes.size(); ++l) {
        const auto in = static_cast<size_t>(sizes[l]);
        const auto out = static_cast<size_t>(sizes[l + 1]);
        const bool last = l + 2 == sizes.size();
        std::vector<S> next(out);
        for (size_t r = 0; r < out; ++r) {
            S acc = flat[offset + out * in + r];
            for (size_t c = 0; c < in; ++c) acc = acc + flat[offset + r * in + c] * act[c];
            if (last) {
                next[r] = acc;
            } else {
                using ad::softplus;
                next[r] = softplus(acc);
            }
        }
        offset += out * in + out;
        act = std::move(next);
    }
    return act;
}

/// Scalar network value, input gradient and Hessian-vector products.
struct MlpJet {
    double value = 0.0;
    Vector gradient;
    Matrix hvp;  // column k = ∇²f · directions.col(k)
};

/// Requires a scalar-output network.
MlpJet mlp_jet(const MLPParams& params, const Vector& z, const Matrix& directions);

/// Tape handles for a recorded parameter set.
struct TapeParams {
    std::vector<ad::MatrixTape::Node> weights;
    std::vector<ad::MatrixTape::Node> biases;
};

/// Tape handles for value, input gradient and tangent directions of a
/// scalar network over a batch.
struct TapeJet {
    ad::MatrixTape::Node value = -1;     // 1 × N
    ad::MatrixTape::Node gradient = -1;  // n × N
    std::vector<ad::MatrixTape::Node> hvp;  // n × N each
};

TapeParams record_params(ad::MatrixTape& tape, const MLPParams& params);
ad::MatrixTape::Node record_forward(ad::MatrixTape& tape, const TapeParams& params, ad::MatrixTape::Node input);

/// Records the forward pass, the input-gradient sweep and, for each
/// direction, the forward tangent of that sweep (Hessian-vector product).
TapeJet record_jet(ad::MatrixTape& tape, const TapeParams& params, ad::MatrixTape::Node input,
                   std::span<const ad::MatrixTape::Node> directions);

/// Parameter adjoints after tape.backward(), shaped like the network.
MLPParams collect_gradient(const ad::MatrixTape& tape, const TapeParams& params);

/// ∇_θ f for a scalar function of the flattened parameters.
template <class F>
MLPParams grad_params(F&& f, const MLPParams& theta) {
    const auto flat = theta.flatten();
    const auto g = ad::grad_params(std::forward<F>(f), std::span<const double>(flat));
    const auto sizes = theta.layer_sizes();
    return MLPParams::unflatten(sizes, g);
}

}  // namespace hamreg::nn
