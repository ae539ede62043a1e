#pragma once

/* Arithmetic expression DSL for coordinate functions.
 *
 *   expr     ::= term  { ("+" | "-") term }
 *   term     ::= unary { ("*" | "/") unary }
 *   unary    ::= "-" unary | power
 *   power    ::= atom [ "^" exponent ]          (right-assoc; exponent must be a literal)
 *   exponent ::= [ "-" ] number
 *   atom     ::= number | ident | ident "(" expr { "," expr } ")" | "(" expr ")"
 *   number   ::= digits [ "." digits ] [ ("e"|"E") [("+"|"-")] digits ]
 *   ident    ::= [a-zA-Z_][a-zA-Z0-9_]*
 *
 * Functions: sin cos exp ln sqrt atan2 abs.  Whitespace is insignificant.
 * The exponent of "^" is restricted to a numeric literal so differentiation
 * stays exact.
 */

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lcks/dual.hpp"
#include "lcks/errors.hpp"

namespace lcks {

class VariableScope {
  public:
    explicit VariableScope(std::vector<std::string> names);
    std::size_t size() const { return names_.size(); }
    const std::string& name(std::size_t i) const { return names_[i]; }
    const std::vector<std::string>& names() const { return names_; }
    int index_of(std::string_view name) const;  // -1 when absent

  private:
    std::vector<std::string> names_;
};

using ScopePtr = std::shared_ptr<const VariableScope>;

ScopePtr make_scope(std::vector<std::string> names);

enum class BinaryOp { Add, Sub, Mul, Div, Pow };
enum class FuncOp { Sin, Cos, Exp, Ln, Sqrt, Atan2, Abs };

struct ExprNode;
using NodePtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
    enum class Kind { Number, Variable, Negate, Binary, Call };
    Kind kind = Kind::Number;
    double number = 0.0;
    int var = -1;
    BinaryOp op = BinaryOp::Add;
    FuncOp func = FuncOp::Sin;
    NodePtr lhs;
    NodePtr rhs;
    std::vector<NodePtr> args;
};

class Expression {
  public:
    Expression() = default;
    Expression(NodePtr root, ScopePtr scope) : root_(std::move(root)), scope_(std::move(scope)) {}

    bool empty() const { return root_ == nullptr; }
    const NodePtr& root() const { return root_; }
    const ScopePtr& scope() const { return scope_; }

    template <class T>
    T eval(std::span<const T> point) const;

  private:
    NodePtr root_;
    ScopePtr scope_;
};

Expression parse(std::string_view source, ScopePtr scope);

double evaluate(const Expression& e, std::span<const double> point);

struct ValueAndDerivative {
    double value;
    double derivative;
};

// Forward-mode directional derivative over the AST (exact, not finite differences).
ValueAndDerivative directional_derivative(const Expression& e, std::span<const double> point,
                                          std::span<const double> direction);

std::string to_string(const Expression& e);
bool structurally_equal(const Expression& a, const Expression& b);

// --- implementation ---

namespace detail {

template <class T>
T eval_expr_node(const ExprNode& n, std::span<const T> z) {
    switch (n.kind) {
        case ExprNode::Kind::Number:
            return T(n.number);
        case ExprNode::Kind::Variable:
            return z[static_cast<std::size_t>(n.var)];
        case ExprNode::Kind::Negate:
            return -eval_expr_node(*n.lhs, z);
        case ExprNode::Kind::Binary: {
            T l = eval_expr_node(*n.lhs, z);
            switch (n.op) {
                case BinaryOp::Add:
                    return l + eval_expr_node(*n.rhs, z);
                case BinaryOp::Sub:
                    return l - eval_expr_node(*n.rhs, z);
                case BinaryOp::Mul:
                    return l * eval_expr_node(*n.rhs, z);
                case BinaryOp::Div: {
                    T r = eval_expr_node(*n.rhs, z);
                    if (value_of(r) == 0.0) throw DomainError("/", 0.0);
                    return l / r;
                }
                case BinaryOp::Pow: {
                    using std::floor;
                    using std::pow;
                    double c = n.rhs->number;
                    double base = value_of(l);
                    if (base < 0.0 && floor(c) != c) throw DomainError("^", base);
                    if (base == 0.0 && c < 0.0) throw DomainError("^", base);
                    return pow(l, c);
                }
            }
            break;
        }
        case ExprNode::Kind::Call: {
            using std::abs;
            using std::atan2;
            using std::cos;
            using std::exp;
            using std::log;
            using std::sin;
            using std::sqrt;
            T a0 = eval_expr_node(*n.args[0], z);
            switch (n.func) {
                case FuncOp::Sin:
                    return sin(a0);
                case FuncOp::Cos:
                    return cos(a0);
                case FuncOp::Exp:
                    return exp(a0);
                case FuncOp::Ln:
                    if (value_of(a0) <= 0.0) throw DomainError("ln", value_of(a0));
                    return log(a0);
                case FuncOp::Sqrt:
                    if (value_of(a0) < 0.0) throw DomainError("sqrt", value_of(a0));
                    return sqrt(a0);
                case FuncOp::Abs:
                    return abs(a0);
                case FuncOp::Atan2: {
                    T a1 = eval_expr_node(*n.args[1], z);
                    if (value_of(a0) == 0.0 && value_of(a1) == 0.0) throw DomainError("atan2", 0.0);
                    return atan2(a0, a1);
                }
            }
            break;
        }
    }
    throw Error("corrupt expression node");
}

}  // namespace detail

template <class T>
T Expression::eval(std::span<const T> point) const {
    if (!root_) throw Error("empty expression");
    if (scope_ && point.size() != scope_->size())
        throw DimensionMismatch(static_cast<int>(scope_->size()), static_cast<int>(point.size()));
    return detail::eval_expr_node<T>(*root_, point);
}

}  // namespace lcks
