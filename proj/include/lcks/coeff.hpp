#pragma once

/* Coefficient functions on a coordinate chart.
 *
 * A Coeff is a pure function R^dim -> R built from expression ASTs, chart
 * coordinates, sums, products, compositions and axis derivatives.  Every
 * node evaluates generically over double or nested dual scalars, so exact
 * directional derivatives of any derived coefficient (wedge products,
 * exterior-derivative coefficients, pullbacks, ...) come from the same tree.
 */

#include <cmath>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "lcks/dual.hpp"
#include "lcks/errors.hpp"
#include "lcks/expr.hpp"

namespace lcks {

struct CoeffNode;
using CoeffPtr = std::shared_ptr<const CoeffNode>;

class Coeff {
  public:
    Coeff() = default;  // structural zero

    static Coeff zero() { return Coeff(); }
    static Coeff constant(double v);
    static Coeff coordinate(int index);
    static Coeff from_expr(Expression e);
    static Coeff compose(const Coeff& outer, std::vector<Coeff> inner);
    // angle of (z[ix], z[iy]) shifted by a multiple of 2*pi into (lo, hi), times factor
    static Coeff branch_angle(int ix, int iy, double lo, double hi, double factor);

    bool is_zero() const { return p_ == nullptr; }
    bool is_constant(double* value = nullptr) const;

    Coeff scaled(double c) const;
    Coeff derivative(int axis) const;

    friend Coeff operator+(const Coeff& a, const Coeff& b);
    friend Coeff operator-(const Coeff& a, const Coeff& b);
    friend Coeff operator*(const Coeff& a, const Coeff& b);

    template <class T>
    T operator()(std::span<const T> z) const;

    double at(std::span<const double> z) const { return (*this)(z); }

  private:
    explicit Coeff(CoeffPtr p) : p_(std::move(p)) {}
    CoeffPtr p_;
};

// exp(f), f/g as compositions with fixed ASTs
Coeff coeff_exp(const Coeff& f);
Coeff coeff_neg_exp(const Coeff& f);
Coeff coeff_div(const Coeff& f, const Coeff& g);

struct CoeffNode {
    struct Constant {
        double value;
    };
    struct Coordinate {
        int index;
    };
    struct FromExpr {
        Expression expr;
    };
    struct Sum {
        std::vector<std::pair<double, CoeffPtr>> terms;
    };
    struct Product {
        CoeffPtr lhs, rhs;
    };
    struct Composition {
        CoeffPtr outer;
        std::vector<CoeffPtr> inner;
    };
    struct AxisDerivative {
        CoeffPtr f;
        int axis;
    };
    struct BranchAngle {
        int ix, iy;
        double lo, hi, factor;
    };
    std::variant<Constant, Coordinate, FromExpr, Sum, Product, Composition, AxisDerivative, BranchAngle> v;
};

namespace detail {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

template <class T>
T eval_coeff_node(const CoeffNode& n, std::span<const T> z);

template <class T>
T eval_coeff(const CoeffPtr& p, std::span<const T> z) {
    return p ? eval_coeff_node<T>(*p, z) : T(0.0);
}

template <class T>
T eval_coeff_node(const CoeffNode& n, std::span<const T> z) {
    using Node = CoeffNode;
    return std::visit(
        [&](const auto& node) -> T {
            using N = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<N, Node::Constant>) {
                return T(node.value);
            } else if constexpr (std::is_same_v<N, Node::Coordinate>) {
                return z[static_cast<std::size_t>(node.index)];
            } else if constexpr (std::is_same_v<N, Node::FromExpr>) {
                return node.expr.template eval<T>(z);
            } else if constexpr (std::is_same_v<N, Node::Sum>) {
                T acc(0.0);
                for (const auto& [w, f] : node.terms) acc = acc + w * eval_coeff<T>(f, z);
                return acc;
            } else if constexpr (std::is_same_v<N, Node::Product>) {
                return eval_coeff<T>(node.lhs, z) * eval_coeff<T>(node.rhs, z);
            } else if constexpr (std::is_same_v<N, Node::Composition>) {
                std::vector<T> y;
                y.reserve(node.inner.size());
                for (const auto& f : node.inner) y.push_back(eval_coeff<T>(f, z));
                return eval_coeff<T>(node.outer, y);
            } else if constexpr (std::is_same_v<N, Node::AxisDerivative>) {
                if constexpr (dual_depth_v<T> >= 3) {
                    throw Error("dual nesting depth exceeded");
                } else {
                    std::vector<Dual<T>> dz;
                    dz.reserve(z.size());
                    for (std::size_t i = 0; i < z.size(); ++i)
                        dz.emplace_back(z[i], T(static_cast<int>(i) == node.axis ? 1.0 : 0.0));
                    return eval_coeff<Dual<T>>(node.f, dz).b;
                }
            } else {  // BranchAngle
                using std::atan2;
                T w = atan2(z[static_cast<std::size_t>(node.iy)], z[static_cast<std::size_t>(node.ix)]);
                double center = 0.5 * (node.lo + node.hi);
                double m = std::round((center - value_of(w)) / kTwoPi);
                if (m != 0.0) w = w + m * kTwoPi;
                return node.factor == 1.0 ? w : node.factor * w;
            }
        },
        n.v);
}

}  // namespace detail

template <class T>
T Coeff::operator()(std::span<const T> z) const {
    return detail::eval_coeff<T>(p_, z);
}

}  // namespace lcks
