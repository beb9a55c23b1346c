#pragma once

#include <cmath>
#include <type_traits>

namespace hamreg::ad {

/// Forward-mode number v + d·ε with ε² = 0. Nests: Dual<Dual<double>>
/// carries two independent tangents and their cross term.
template <class T>
struct Dual {
    T v{};
    T d{};

    constexpr Dual() = default;
    constexpr Dual(T value) : v(value), d{} {}  // NOLINT(google-explicit-constructor)
    constexpr Dual(T value, T tangent) : v(value), d(tangent) {}
    template <class U = T, std::enable_if_t<!std::is_same_v<U, double>, int> = 0>
    constexpr Dual(double value) : v(value), d{} {}  // NOLINT(google-explicit-constructor)

    Dual& operator+=(const Dual& o) { v += o.v; d += o.d; return *this; }
    Dual& operator-=(const Dual& o) { v -= o.v; d -= o.d; return *this; }
    Dual& operator*=(const Dual& o) { *this = *this * o; return *this; }
};

template <class T> struct is_dual : std::false_type {};
template <class T> struct is_dual<Dual<T>> : std::true_type {};

/// Innermost real part.
inline double primal(double x) { return x; }
template <class T>
double primal(const Dual<T>& x) { return primal(x.v); }

inline bool all_finite(double x) { return std::isfinite(x); }
template <class T>
bool all_finite(const Dual<T>& x) { return all_finite(x.v) && all_finite(x.d); }

template <class T> Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) { return {a.v + b.v, a.d + b.d}; }
template <class T> Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) { return {a.v - b.v, a.d - b.d}; }
template <class T> Dual<T> operator-(const Dual<T>& a) { return {-a.v, -a.d}; }
template <class T> Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
template <class T> Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
    T q = a.v / b.v;
    return {q, (a.d - q * b.d) / b.v};
}

template <class T> Dual<T> operator+(const Dual<T>& a, double b) { return {a.v + b, a.d}; }
template <class T> Dual<T> operator+(double a, const Dual<T>& b) { return {a + b.v, b.d}; }
template <class T> Dual<T> operator-(const Dual<T>& a, double b) { return {a.v - b, a.d}; }
template <class T> Dual<T> operator-(double a, const Dual<T>& b) { return {a - b.v, -b.d}; }
template <class T> Dual<T> operator*(const Dual<T>& a, double b) { return {a.v * b, a.d * b}; }
template <class T> Dual<T> operator*(double a, const Dual<T>& b) { return {a * b.v, a * b.d}; }
template <class T> Dual<T> operator/(const Dual<T>& a, double b) { return {a.v / b, a.d / b}; }
template <class T> Dual<T> operator/(double a, const Dual<T>& b) { return Dual<T>(T(a)) / b; }

template <class T> bool operator<(const Dual<T>& a, const Dual<T>& b) { return primal(a) < primal(b); }

/// softplus(x) = log(1 + e^x), evaluated as max(x,0) + log1p(e^-|x|).
inline double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

/// σ'(x) = σ(1-σ)
inline double sigmoid_prime(double x) {
    const double s = sigmoid(x);
    return s * (1.0 - s);
}

/// σ''(x) = σ(1-σ)(1-2σ)
inline double sigmoid_second(double x) {
    const double s = sigmoid(x);
    return s * (1.0 - s) * (1.0 - 2.0 * s);
}

using std::cos;
using std::exp;
using std::log;
using std::sin;

template <class T> Dual<T> sin(const Dual<T>& x) { return {sin(x.v), cos(x.v) * x.d}; }
template <class T> Dual<T> cos(const Dual<T>& x) { return {cos(x.v), -(sin(x.v) * x.d)}; }
template <class T> Dual<T> exp(const Dual<T>& x) {
    T e = exp(x.v);
    return {e, e * x.d};
}
template <class T> Dual<T> log(const Dual<T>& x) { return {log(x.v), x.d / x.v}; }
template <class T> Dual<T> sigmoid(const Dual<T>& x) {
    T s = sigmoid(x.v);
    return {s, s * (1.0 - s) * x.d};
}
template <class T> Dual<T> softplus(const Dual<T>& x) { return {softplus(x.v), sigmoid(x.v) * x.d}; }

}  // namespace hamreg::ad
