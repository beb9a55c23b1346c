#include "hamreg/autodiff/matrix_tape.hpp"

#include "hamreg/errors.hpp"

namespace hamreg::ad {

namespace {

const char* op_name(int op) {
    static const char* names[] = {"leaf",     "matmul",  "matmul_tn", "add_bias",     "add",         "sub",
                                  "hadamard", "scale",   "softplus",  "sigmoid",      "sigmoid_prime"};
    return names[op];
}

/// x·0 is NaN exactly for non-finite x, so a vectorized sum finds them.
bool all_finite(const Matrix& m) { return (m.array() * 0.0).sum() == 0.0; }

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ShapeError(std::string(op) + ": operand shapes differ");
    }
}

/// exp(−|x|), the shared ingredient of the stable softplus and sigmoid.
Eigen::ArrayXXd decay(const Matrix& x) { return (-x.array().abs()).exp(); }

Eigen::ArrayXXd sigmoid_from(const Matrix& x, const Eigen::ArrayXXd& e) {
    return (x.array() >= 0.0).select(1.0 / (1.0 + e), e / (1.0 + e));
}

/// log1p on (0, 1] with vectorized log: log(u)·e/(u − 1), u = 1 + e, is
/// accurate to a few ulps and falls back to e when u rounds to 1.
Eigen::ArrayXXd log1p_unit(const Eigen::ArrayXXd& e) {
    const Eigen::ArrayXXd u = 1.0 + e;
    return (u == 1.0).select(e, u.log() * e / (u - 1.0));
}

}  // namespace

Matrix softplus(const Matrix& x) { return (x.array().max(0.0) + log1p_unit(decay(x))).matrix(); }

Matrix sigmoid(const Matrix& x) { return sigmoid_from(x, decay(x)).matrix(); }

Logistic logistic(const Matrix& x) {
    const Eigen::ArrayXXd s = sigmoid_from(x, decay(x));
    const Eigen::ArrayXXd ds = s * (1.0 - s);
    return {s.matrix(), ds.matrix(), (ds * (1.0 - 2.0 * s)).matrix()};
}

MatrixTape::Node MatrixTape::push(Op op, Node a, Node b, double s, Matrix value, Matrix local) {
    if (!all_finite(value)) throw DifferentiationError(op_name(static_cast<int>(op)));
    bool grad = false;
    if (a >= 0) grad = grad || nodes_[static_cast<std::size_t>(a)].grad;
    if (b >= 0) grad = grad || nodes_[static_cast<std::size_t>(b)].grad;
    if (!grad) local.resize(0, 0);
    nodes_.push_back({op, a, b, s, grad, std::move(value), std::move(local)});
    return static_cast<Node>(nodes_.size()) - 1;
}

MatrixTape::Node MatrixTape::variable(Matrix value) {
    Node n = push(Op::Leaf, -1, -1, 0.0, std::move(value));
    nodes_.back().grad = true;
    return n;
}

MatrixTape::Node MatrixTape::constant(Matrix value) { return push(Op::Leaf, -1, -1, 0.0, std::move(value)); }

MatrixTape::Node MatrixTape::matmul(Node a, Node b) {
    const Matrix& va = value(a);
    const Matrix& vb = value(b);
    if (va.cols() != vb.rows()) throw ShapeError("matmul: inner dimensions differ");
    Matrix out(va.rows(), vb.cols());
    out.noalias() = va * vb;
    return push(Op::MatMul, a, b, 0.0, std::move(out));
}

MatrixTape::Node MatrixTape::matmul_tn(Node a, Node b) {
    const Matrix& va = value(a);
    const Matrix& vb = value(b);
    if (va.rows() != vb.rows()) throw ShapeError("matmul_tn: inner dimensions differ");
    Matrix out(va.cols(), vb.cols());
    out.noalias() = va.transpose() * vb;
    return push(Op::MatMulTN, a, b, 0.0, std::move(out));
}

MatrixTape::Node MatrixTape::add_bias(Node x, Node bias) {
    const Matrix& vx = value(x);
    const Matrix& vb = value(bias);
    if (vb.cols() != 1 || vb.rows() != vx.rows()) throw ShapeError("add_bias: bias must be a matching column");
    Matrix out = vx.colwise() + vb.col(0);
    return push(Op::AddBias, x, bias, 0.0, std::move(out));
}

MatrixTape::Node MatrixTape::add(Node a, Node b) {
    require_same_shape(value(a), value(b), "add");
    return push(Op::Add, a, b, 0.0, value(a) + value(b));
}

MatrixTape::Node MatrixTape::sub(Node a, Node b) {
    require_same_shape(value(a), value(b), "sub");
    return push(Op::Sub, a, b, 0.0, value(a) - value(b));
}

MatrixTape::Node MatrixTape::hadamard(Node a, Node b) {
    require_same_shape(value(a), value(b), "hadamard");
    return push(Op::Hadamard, a, b, 0.0, value(a).cwiseProduct(value(b)));
}

MatrixTape::Node MatrixTape::scale(Node a, double s) { return push(Op::Scale, a, -1, s, s * value(a)); }

MatrixTape::Node MatrixTape::softplus(Node x) {
    const Matrix& v = value(x);
    const Eigen::ArrayXXd e = decay(v);
    Matrix out = (v.array().max(0.0) + log1p_unit(e)).matrix();
    return push(Op::Softplus, x, -1, 0.0, std::move(out), sigmoid_from(v, e).matrix());
}

MatrixTape::Node MatrixTape::sigmoid(Node x) {
    Logistic l = logistic(value(x));
    return push(Op::Sigmoid, x, -1, 0.0, std::move(l.s), std::move(l.ds));
}

MatrixTape::Node MatrixTape::sigmoid_prime(Node x) {
    Logistic l = logistic(value(x));
    return push(Op::SigmoidPrime, x, -1, 0.0, std::move(l.ds), std::move(l.d2s));
}

const Matrix& MatrixTape::adjoint(Node n) const {
    const auto i = static_cast<std::size_t>(n);
    if (i >= adj_.size()) throw ShapeError("adjoint requested before backward()");
    if (!touched_[i]) {
        adj_[i] = Matrix::Zero(nodes_[i].value.rows(), nodes_[i].value.cols());
        touched_[i] = true;
    }
    return adj_[i];
}

void MatrixTape::backward(std::span<const std::pair<Node, Matrix>> seeds) {
    const std::size_t n = nodes_.size();
    adj_.assign(n, Matrix());
    touched_.assign(n, false);

    auto accumulate = [&](Node target, auto&& contribution) {
        const auto t = static_cast<std::size_t>(target);
        if (!nodes_[t].grad) return;
        if (touched_[t]) {
            adj_[t] += contribution;
        } else {
            adj_[t] = contribution;
            touched_[t] = true;
        }
    };

    for (const auto& [node, seed] : seeds) {
        require_same_shape(value(node), seed, "backward seed");
        accumulate(node, seed);
    }

    for (std::size_t k = n; k-- > 0;) {
        if (!touched_[k]) continue;
        const Entry& e = nodes_[k];
        const Matrix& g = adj_[k];
        if (!all_finite(g)) throw DifferentiationError(std::string(op_name(static_cast<int>(e.op))) + " (adjoint)");
        switch (e.op) {
            case Op::Leaf:
                break;
            case Op::MatMul:
                if (nodes_[static_cast<std::size_t>(e.a)].grad) accumulate(e.a, g * value(e.b).transpose());
                if (nodes_[static_cast<std::size_t>(e.b)].grad) accumulate(e.b, value(e.a).transpose() * g);
                break;
            case Op::MatMulTN:
                if (nodes_[static_cast<std::size_t>(e.a)].grad) accumulate(e.a, value(e.b) * g.transpose());
                if (nodes_[static_cast<std::size_t>(e.b)].grad) accumulate(e.b, value(e.a) * g);
                break;
            case Op::AddBias:
                accumulate(e.a, g);
                if (nodes_[static_cast<std::size_t>(e.b)].grad) accumulate(e.b, g.rowwise().sum());
                break;
            case Op::Add:
                accumulate(e.a, g);
                accumulate(e.b, g);
                break;
            case Op::Sub:
                accumulate(e.a, g);
                if (nodes_[static_cast<std::size_t>(e.b)].grad) accumulate(e.b, -g);
                break;
            case Op::Hadamard:
                if (nodes_[static_cast<std::size_t>(e.a)].grad) accumulate(e.a, g.cwiseProduct(value(e.b)));
                if (nodes_[static_cast<std::size_t>(e.b)].grad) accumulate(e.b, g.cwiseProduct(value(e.a)));
                break;
            case Op::Scale:
                accumulate(e.a, e.s * g);
                break;
            case Op::Softplus:
            case Op::Sigmoid:
            case Op::SigmoidPrime:
                accumulate(e.a, g.cwiseProduct(e.local));
                break;
        }
    }
}

}  // namespace hamreg::ad
