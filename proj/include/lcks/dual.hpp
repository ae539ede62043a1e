#pragma once

#include <cmath>
#include <utility>

namespace lcks {

// Forward-mode dual scalar carrying a value and one directional derivative.
// Nesting (Dual<Dual<double>>, ...) yields exact higher mixed derivatives.
template <class T>
struct Dual {
    T a{};  // value
    T b{};  // derivative

    Dual() = default;
    Dual(double v) : a(v), b() {}
    Dual(T value, T deriv) : a(std::move(value)), b(std::move(deriv)) {}
};

using D1 = Dual<double>;
using D2 = Dual<D1>;
using D3 = Dual<D2>;

template <class T>
struct DualDepth {
    static constexpr int value = 0;
};
template <class T>
struct DualDepth<Dual<T>> {
    static constexpr int value = 1 + DualDepth<T>::value;
};
template <class T>
inline constexpr int dual_depth_v = DualDepth<T>::value;

inline double value_of(double x) { return x; }
template <class T>
double value_of(const Dual<T>& x) {
    return value_of(x.a);
}

template <class T>
Dual<T> operator-(const Dual<T>& x) {
    return {-x.a, -x.b};
}
template <class T>
Dual<T> operator+(const Dual<T>& x, const Dual<T>& y) {
    return {x.a + y.a, x.b + y.b};
}
template <class T>
Dual<T> operator-(const Dual<T>& x, const Dual<T>& y) {
    return {x.a - y.a, x.b - y.b};
}
template <class T>
Dual<T> operator*(const Dual<T>& x, const Dual<T>& y) {
    return {x.a * y.a, x.a * y.b + x.b * y.a};
}
template <class T>
Dual<T> operator/(const Dual<T>& x, const Dual<T>& y) {
    T q = x.a / y.a;
    return {q, (x.b - q * y.b) / y.a};
}

template <class T>
Dual<T> operator+(const Dual<T>& x, double c) {
    return {x.a + c, x.b};
}
template <class T>
Dual<T> operator+(double c, const Dual<T>& x) {
    return x + c;
}
template <class T>
Dual<T> operator-(const Dual<T>& x, double c) {
    return {x.a - c, x.b};
}
template <class T>
Dual<T> operator-(double c, const Dual<T>& x) {
    return {c - x.a, -x.b};
}
template <class T>
Dual<T> operator*(const Dual<T>& x, double c) {
    return {x.a * c, x.b * c};
}
template <class T>
Dual<T> operator*(double c, const Dual<T>& x) {
    return x * c;
}
template <class T>
Dual<T> operator/(const Dual<T>& x, double c) {
    return {x.a / c, x.b / c};
}
template <class T>
Dual<T> operator/(double c, const Dual<T>& x) {
    return Dual<T>(c) / x;
}

template <class T>
Dual<T> sin(const Dual<T>& x) {
    using std::cos;
    using std::sin;
    return {sin(x.a), cos(x.a) * x.b};
}

template <class T>
Dual<T> cos(const Dual<T>& x) {
    using std::cos;
    using std::sin;
    return {cos(x.a), -(sin(x.a) * x.b)};
}

template <class T>
Dual<T> exp(const Dual<T>& x) {
    using std::exp;
    T e = exp(x.a);
    return {e, e * x.b};
}

template <class T>
Dual<T> log(const Dual<T>& x) {
    using std::log;
    return {log(x.a), x.b / x.a};
}

template <class T>
Dual<T> sqrt(const Dual<T>& x) {
    using std::sqrt;
    T r = sqrt(x.a);
    return {r, x.b / (2.0 * r)};
}

// exponent restricted to a real constant; d(u^c) = c u^(c-1) du
template <class T>
Dual<T> pow(const Dual<T>& x, double c) {
    using std::pow;
    if (c == 0.0) return {T(1.0), T(0.0)};
    if (c == 1.0) return x;
    return {pow(x.a, c), (c * pow(x.a, c - 1.0)) * x.b};
}

template <class T>
Dual<T> atan2(const Dual<T>& y, const Dual<T>& x) {
    using std::atan2;
    T denom = x.a * x.a + y.a * y.a;
    return {atan2(y.a, x.a), (x.a * y.b - y.a * x.b) / denom};
}

template <class T>
Dual<T> abs(const Dual<T>& x) {
    using std::abs;
    double v = value_of(x.a);
    double s = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
    return {abs(x.a), s * x.b};
}

}  // namespace lcks
