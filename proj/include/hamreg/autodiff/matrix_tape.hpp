#pragma once

// Batched reverse-mode tape over dense matrices.
//
// Columns are samples. Networks record their forward pass, their input
// gradient (written out as an explicit backward sweep) and tangents of that
// sweep as ordinary tape operations; a single reverse pass over the tape then
// yields parameter gradients of any loss built from those quantities.

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace hamreg::ad {

using Matrix = Eigen::MatrixXd;

/// Elementwise activations on whole blocks (SIMD); they agree with the
/// scalar versions in dual.hpp to rounding.
Matrix softplus(const Matrix& x);
Matrix sigmoid(const Matrix& x);

/// σ(x), σ'(x) and σ''(x) from one exponential each.
struct Logistic {
    Matrix s, ds, d2s;
};
Logistic logistic(const Matrix& x);

class MatrixTape {
public:
    using Node = int;

    /// Differentiable leaf.
    Node variable(Matrix value);
    /// Leaf that never receives an adjoint.
    Node constant(Matrix value);

    Node matmul(Node a, Node b);     // a·b
    Node matmul_tn(Node a, Node b);  // aᵀ·b
    Node add_bias(Node x, Node bias);  // x + bias·1ᵀ, bias is a column
    Node add(Node a, Node b);
    Node sub(Node a, Node b);
    Node hadamard(Node a, Node b);
    Node scale(Node a, double s);
    Node softplus(Node x);
    Node sigmoid(Node x);
    Node sigmoid_prime(Node x);

    const Matrix& value(Node n) const { return nodes_[static_cast<std::size_t>(n)].value; }
    bool requires_grad(Node n) const { return nodes_[static_cast<std::size_t>(n)].grad; }
    std::size_t size() const noexcept { return nodes_.size(); }

    /// Reverse sweep seeded with d(loss)/d(node) for each listed node.
    void backward(std::span<const std::pair<Node, Matrix>> seeds);

    /// Adjoint after backward(); zero matrix of the node's shape if unreached.
    const Matrix& adjoint(Node n) const;

private:
    enum class Op {
        Leaf,
        MatMul,
        MatMulTN,
        AddBias,
        Add,
        Sub,
        Hadamard,
        Scale,
        Softplus,
        Sigmoid,
        SigmoidPrime,
    };

    struct Entry {
        Op op;
        Node a = -1;
        Node b = -1;
        double s = 0.0;
        bool grad = false;
        Matrix value;
        Matrix local;  // elementwise derivative of unary activations
    };

    Node push(Op op, Node a, Node b, double s, Matrix value, Matrix local = {});

    std::vector<Entry> nodes_;
    // Unreached adjoints are materialized as zeros on first request.
    mutable std::vector<Matrix> adj_;
    mutable std::vector<bool> touched_;
};

}  // namespace hamreg::ad
