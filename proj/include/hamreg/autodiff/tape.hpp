#pragma once

// Scalar reverse-mode differentiation on an explicit Wengert list.
//
// Each recorded node stores its local partials, evaluated in the tape's value
// type T. With T = double this is plain reverse mode. With T = Dual<double>
// the reverse sweep is itself differentiated along the input tangent
// (forward-over-reverse), which yields Hessian-vector products and mixed
// parameter/input second derivatives without ever forming a Hessian.

#include <span>
#include <utility>
#include <vector>

#include "hamreg/autodiff/dual.hpp"
#include "hamreg/errors.hpp"

namespace hamreg::ad {

template <class T>
class Tape;

template <class T>
class Var {
public:
    Var() = default;
    Var(T value) : value_(std::move(value)) {}  // NOLINT(google-explicit-constructor)
    template <class U = T, std::enable_if_t<!std::is_same_v<U, double>, int> = 0>
    Var(double value) : value_(value) {}  // NOLINT(google-explicit-constructor)
    Var(T value, Tape<T>* tape, int index) : value_(std::move(value)), tape_(tape), index_(index) {}

    const T& value() const noexcept { return value_; }
    Tape<T>* tape() const noexcept { return tape_; }
    int index() const noexcept { return index_; }
    bool is_constant() const noexcept { return tape_ == nullptr; }

    Var& operator+=(const Var& o) { return *this = *this + o; }
    Var& operator-=(const Var& o) { return *this = *this - o; }
    Var& operator*=(const Var& o) { return *this = *this * o; }

private:
    T value_{};
    Tape<T>* tape_ = nullptr;
    int index_ = -1;
};

template <class T>
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var<T> variable(T value) {
        nodes_.push_back({-1, T{}, -1, T{}});
        return {std::move(value), this, static_cast<int>(nodes_.size()) - 1};
    }

    std::vector<Var<T>> variables(std::span<const T> values) {
        std::vector<Var<T>> out;
        out.reserve(values.size());
        for (const auto& v : values) out.push_back(variable(v));
        return out;
    }

    int push(int a, T da, int b, T db) {
        nodes_.push_back({a, std::move(da), b, std::move(db)});
        return static_cast<int>(nodes_.size()) - 1;
    }

    std::size_t size() const noexcept { return nodes_.size(); }

    /// Adjoints of every node for the seed d(out)/d(out) = 1.
    std::vector<T> adjoints(const Var<T>& out) const {
        std::vector<T> adj(nodes_.size(), T{});
        if (out.tape() != this) return adj;
        adj[static_cast<std::size_t>(out.index())] = T(1.0);
        for (int i = out.index(); i >= 0; --i) {
            const auto& n = nodes_[static_cast<std::size_t>(i)];
            const T& ai = adj[static_cast<std::size_t>(i)];
            if (n.a >= 0) adj[static_cast<std::size_t>(n.a)] += ai * n.da;
            if (n.b >= 0) adj[static_cast<std::size_t>(n.b)] += ai * n.db;
        }
        return adj;
    }

    /// d(out)/d(wrt[k]) for each k; constants in `wrt` get exactly 0.
    std::vector<T> gradient(const Var<T>& out, std::span<const Var<T>> wrt) const {
        std::vector<T> g(wrt.size(), T{});
        if (out.tape() != this) return g;
        const auto adj = adjoints(out);
        for (std::size_t k = 0; k < wrt.size(); ++k) {
            if (wrt[k].tape() == this) g[k] = adj[static_cast<std::size_t>(wrt[k].index())];
        }
        return g;
    }

private:
    struct Node {
        int a;
        T da;
        int b;
        T db;
    };
    std::vector<Node> nodes_;
};

namespace detail {

template <class T>
Var<T> record(const char* op, T value, const Var<T>& a, T da) {
    if (!all_finite(value)) throw DifferentiationError(op);
    if (a.is_constant()) return Var<T>(std::move(value));
    if (!all_finite(da)) throw DifferentiationError(op);
    const int idx = a.tape()->push(a.index(), std::move(da), -1, T{});
    return {std::move(value), a.tape(), idx};
}

template <class T>
Var<T> record(const char* op, T value, const Var<T>& a, T da, const Var<T>& b, T db) {
    if (!all_finite(value)) throw DifferentiationError(op);
    Tape<T>* tape = a.is_constant() ? b.tape() : a.tape();
    if (tape == nullptr) return Var<T>(std::move(value));
    if (!all_finite(da) || !all_finite(db)) throw DifferentiationError(op);
    const int idx = tape->push(a.index(), std::move(da), b.index(), std::move(db));
    return {std::move(value), tape, idx};
}

}  // namespace detail

template <class T> Var<T> operator+(const Var<T>& a, const Var<T>& b) {
    return detail::record("add", a.value() + b.value(), a, T(1.0), b, T(1.0));
}
template <class T> Var<T> operator-(const Var<T>& a, const Var<T>& b) {
    return detail::record("sub", a.value() - b.value(), a, T(1.0), b, T(-1.0));
}
template <class T> Var<T> operator-(const Var<T>& a) {
    return detail::record("neg", -a.value(), a, T(-1.0));
}
template <class T> Var<T> operator*(const Var<T>& a, const Var<T>& b) {
    return detail::record("mul", a.value() * b.value(), a, b.value(), b, a.value());
}
template <class T> Var<T> operator/(const Var<T>& a, const Var<T>& b) {
    T q = a.value() / b.value();
    T inv = T(1.0) / b.value();
    return detail::record("div", q, a, inv, b, -(q * inv));
}

template <class T> Var<T> operator+(const Var<T>& a, double b) { return a + Var<T>(b); }
template <class T> Var<T> operator+(double a, const Var<T>& b) { return Var<T>(a) + b; }
template <class T> Var<T> operator-(const Var<T>& a, double b) { return a - Var<T>(b); }
template <class T> Var<T> operator-(double a, const Var<T>& b) { return Var<T>(a) - b; }
template <class T> Var<T> operator*(const Var<T>& a, double b) { return a * Var<T>(b); }
template <class T> Var<T> operator*(double a, const Var<T>& b) { return Var<T>(a) * b; }
template <class T> Var<T> operator/(const Var<T>& a, double b) { return a / Var<T>(b); }
template <class T> Var<T> operator/(double a, const Var<T>& b) { return Var<T>(a) / b; }

template <class T> Var<T> sin(const Var<T>& x) {
    return detail::record("sin", sin(x.value()), x, cos(x.value()));
}
template <class T> Var<T> cos(const Var<T>& x) {
    return detail::record("cos", cos(x.value()), x, -sin(x.value()));
}
template <class T> Var<T> exp(const Var<T>& x) {
    T e = exp(x.value());
    return detail::record("exp", e, x, e);
}
template <class T> Var<T> log(const Var<T>& x) {
    if (!(primal(x.value()) > 0.0)) throw DifferentiationError("log");
    return detail::record("log", log(x.value()), x, T(1.0) / x.value());
}
template <class T> Var<T> softplus(const Var<T>& x) {
    return detail::record("softplus", softplus(x.value()), x, sigmoid(x.value()));
}

/// ∇f(x). `f` takes std::span<const Var<double>> and returns Var<double>.
template <class F>
std::pair<double, std::vector<double>> value_and_grad(F&& f, std::span<const double> x) {
    Tape<double> tape;
    const auto vars = tape.variables(x);
    const Var<double> out = f(std::span<const Var<double>>(vars));
    return {out.value(), tape.gradient(out, vars)};
}

template <class F>
std::vector<double> grad_input(F&& f, std::span<const double> x) {
    return value_and_grad(std::forward<F>(f), x).second;
}

/// Gradient with respect to a flat parameter vector; identical to grad_input,
/// kept separate so call sites read as what they differentiate.
template <class F>
std::vector<double> grad_params(F&& f, std::span<const double> theta) {
    return value_and_grad(std::forward<F>(f), theta).second;
}

/// Hessian-vector product ∇²f(x)·v by forward-over-reverse.
/// `f` must be generic over the Var value type.
template <class F>
std::vector<double> hvp(F&& f, std::span<const double> x, std::span<const double> v) {
    if (x.size() != v.size()) throw ShapeError("hvp: direction length differs from point length");
    using D = Dual<double>;
    Tape<D> tape;
    std::vector<Var<D>> vars;
    vars.reserve(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) vars.push_back(tape.variable(D(x[i], v[i])));
    const Var<D> out = f(std::span<const Var<D>>(vars));
    const auto g = tape.gradient(out, vars);
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = g[i].d;
    return r;
}

/// d/dθ of g(θ, ∇_z h(θ,z), h(θ,z)).
///
/// `h(theta_vars, z_vars)` must be generic over the Var value type.
/// `g(theta_vars, grad_vars, h_var)` is recorded on a double tape.
/// The input-gradient dependence is handled by pushing the tangent
/// v = ∂g/∂(∇_z h) through z and reading the tangent of ∇_θ h.
template <class H, class G>
std::vector<double> mixed_grad(H&& h, G&& g, std::span<const double> theta, std::span<const double> z) {
    const std::size_t nt = theta.size();
    const std::size_t nz = z.size();

    // Pass 1: h and ∇_z h.
    std::vector<double> grad_z;
    double h_value = 0.0;
    {
        Tape<double> tape;
        const auto tv = tape.variables(theta);
        const auto zv = tape.variables(z);
        const Var<double> out = h(std::span<const Var<double>>(tv), std::span<const Var<double>>(zv));
        h_value = out.value();
        grad_z = tape.gradient(out, zv);
    }

    // Pass 2: sensitivities of g to its arguments.
    std::vector<double> g_theta, g_grad;
    double g_h = 0.0;
    {
        Tape<double> tape;
        const auto tv = tape.variables(theta);
        const auto gv = tape.variables(grad_z);
        const Var<double> hv = tape.variable(h_value);
        const Var<double> out =
            g(std::span<const Var<double>>(tv), std::span<const Var<double>>(gv), hv);
        const auto adj = tape.adjoints(out);
        g_theta.resize(nt);
        g_grad.resize(nz);
        for (std::size_t i = 0; i < nt; ++i) g_theta[i] = adj[static_cast<std::size_t>(tv[i].index())];
        for (std::size_t i = 0; i < nz; ++i) g_grad[i] = adj[static_cast<std::size_t>(gv[i].index())];
        g_h = out.is_constant() ? 0.0 : adj[static_cast<std::size_t>(hv.index())];
    }

    // Pass 3: ∇_θ h with z carrying tangent g_grad.
    using D = Dual<double>;
    Tape<D> tape;
    std::vector<Var<D>> tv, zv;
    tv.reserve(nt);
    zv.reserve(nz);
    for (std::size_t i = 0; i < nt; ++i) tv.push_back(tape.variable(D(theta[i], 0.0)));
    for (std::size_t i = 0; i < nz; ++i) zv.push_back(tape.variable(D(z[i], g_grad[i])));
    const Var<D> out = h(std::span<const Var<D>>(tv), std::span<const Var<D>>(zv));
    const auto dh = tape.gradient(out, tv);

    std::vector<double> result(nt);
    for (std::size_t i = 0; i < nt; ++i) result[i] = dh[i].d + g_h * dh[i].v + g_theta[i];
    return result;
}

}  // namespace hamreg::ad
