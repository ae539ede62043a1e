#include "lcks/coeff.hpp"

namespace lcks {

namespace {

CoeffPtr node(CoeffNode n) { return std::make_shared<CoeffNode>(std::move(n)); }

const CoeffNode::Sum* as_sum(const CoeffPtr& p) {
    return p ? std::get_if<CoeffNode::Sum>(&p->v) : nullptr;
}

}  // namespace

Coeff Coeff::constant(double v) {
    if (v == 0.0) return Coeff();
    return Coeff(node({CoeffNode::Constant{v}}));
}

Coeff Coeff::coordinate(int index) { return Coeff(node({CoeffNode::Coordinate{index}})); }

Coeff Coeff::from_expr(Expression e) {
    if (e.empty()) return Coeff();
    if (e.root()->kind == ExprNode::Kind::Number) return constant(e.root()->number);
    return Coeff(node({CoeffNode::FromExpr{std::move(e)}}));
}

Coeff Coeff::compose(const Coeff& outer, std::vector<Coeff> inner) {
    if (outer.is_zero()) return Coeff();
    double c = 0.0;
    if (outer.is_constant(&c)) return constant(c);
    std::vector<CoeffPtr> in;
    in.reserve(inner.size());
    for (auto& f : inner) in.push_back(f.p_);
    return Coeff(node({CoeffNode::Composition{outer.p_, std::move(in)}}));
}

Coeff Coeff::branch_angle(int ix, int iy, double lo, double hi, double factor) {
    return Coeff(node({CoeffNode::BranchAngle{ix, iy, lo, hi, factor}}));
}

bool Coeff::is_constant(double* value) const {
    if (!p_) {
        if (value) *value = 0.0;
        return true;
    }
    if (const auto* c = std::get_if<CoeffNode::Constant>(&p_->v)) {
        if (value) *value = c->value;
        return true;
    }
    return false;
}

Coeff Coeff::scaled(double c) const {
    if (c == 0.0 || is_zero()) return Coeff();
    if (c == 1.0) return *this;
    double v = 0.0;
    if (is_constant(&v)) return constant(c * v);
    if (const auto* s = as_sum(p_)) {
        CoeffNode::Sum out = *s;
        for (auto& t : out.terms) t.first *= c;
        return Coeff(node({std::move(out)}));
    }
    return Coeff(node({CoeffNode::Sum{{{c, p_}}}}));
}

Coeff operator+(const Coeff& a, const Coeff& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    double ca = 0.0, cb = 0.0;
    if (a.is_constant(&ca) && b.is_constant(&cb)) return Coeff::constant(ca + cb);
    CoeffNode::Sum out;
    auto append = [&out](const CoeffPtr& p, double w) {
        if (const auto* s = as_sum(p)) {
            for (const auto& t : s->terms) out.terms.emplace_back(w * t.first, t.second);
        } else {
            out.terms.emplace_back(w, p);
        }
    };
    append(a.p_, 1.0);
    append(b.p_, 1.0);
    return Coeff(node({std::move(out)}));
}

Coeff operator-(const Coeff& a, const Coeff& b) { return a + b.scaled(-1.0); }

Coeff operator*(const Coeff& a, const Coeff& b) {
    if (a.is_zero() || b.is_zero()) return Coeff();
    double c = 0.0;
    if (a.is_constant(&c)) return b.scaled(c);
    if (b.is_constant(&c)) return a.scaled(c);
    return Coeff(node({CoeffNode::Product{a.p_, b.p_}}));
}

Coeff Coeff::derivative(int axis) const {
    if (is_zero()) return Coeff();
    double c = 0.0;
    if (is_constant(&c)) return Coeff();
    if (const auto* coord = std::get_if<CoeffNode::Coordinate>(&p_->v))
        return constant(coord->index == axis ? 1.0 : 0.0);
    return Coeff(node({CoeffNode::AxisDerivative{p_, axis}}));
}

namespace {

const Expression& exp_expr() {
    static const Expression e = parse("exp(u)", make_scope({"u"}));
    return e;
}
const Expression& neg_exp_expr() {
    static const Expression e = parse("exp(-u)", make_scope({"u"}));
    return e;
}
const Expression& div_expr() {
    static const Expression e = parse("u/v", make_scope({"u", "v"}));
    return e;
}

}  // namespace

Coeff coeff_exp(const Coeff& f) { return Coeff::compose(Coeff::from_expr(exp_expr()), {f}); }

Coeff coeff_neg_exp(const Coeff& f) { return Coeff::compose(Coeff::from_expr(neg_exp_expr()), {f}); }

Coeff coeff_div(const Coeff& f, const Coeff& g) {
    if (f.is_zero()) return Coeff();
    return Coeff::compose(Coeff::from_expr(div_expr()), {f, g});
}

}  // namespace lcks
