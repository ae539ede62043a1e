#include "lcks/forms.hpp"

#include <algorithm>
#include <cmath>

namespace lcks {

namespace {

constexpr int kMaxDegree = 3;

// merge two disjoint increasing tuples; returns 0 if they share an index,
// otherwise the sign of the sorting permutation
int merge_tuples(const IndexTuple& a, const IndexTuple& b, IndexTuple& out) {
    out.clear();
    out.reserve(a.size() + b.size());
    out.insert(out.end(), a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    int sign = 1;
    for (std::size_t i = 1; i < out.size(); ++i) {
        std::size_t j = i;
        while (j > 0 && out[j - 1] > out[j]) {
            std::swap(out[j - 1], out[j]);
            sign = -sign;
            --j;
        }
        if (j > 0 && out[j - 1] == out[j]) return 0;
    }
    return sign;
}

void check_same_chart(const FormField& a, const FormField& b) {
    if (a.dim() != b.dim()) throw DimensionMismatch(a.dim(), b.dim());
}

}  // namespace

double PointForm::get(const IndexTuple& idx) const {
    auto it = c.find(idx);
    return it == c.end() ? 0.0 : it->second;
}

double PointForm::norm_inf() const {
    double m = 0.0;
    for (const auto& [idx, v] : c) m = std::max(m, std::abs(v));
    return m;
}

PointForm PointForm::operator-(const PointForm& other) const {
    PointForm out{dim, degree, c};
    for (const auto& [idx, v] : other.c) out.c[idx] -= v;
    return out;
}

FormField::FormField(int dim, int degree) : dim_(dim), degree_(degree) {
    if (degree < 0 || degree > kMaxDegree) throw DegreeOverflow(degree);
}

FormField FormField::scalar(int dim, Coeff f) {
    FormField out(dim, 0);
    out.set({}, std::move(f));
    return out;
}

void FormField::set(IndexTuple idx, Coeff c) {
    if (static_cast<int>(idx.size()) != degree_) throw DimensionMismatch(degree_, static_cast<int>(idx.size()));
    for (std::size_t i = 0; i + 1 < idx.size(); ++i)
        if (idx[i] >= idx[i + 1]) throw Error("index tuple not strictly increasing");
    if (c.is_zero())
        coeffs_.erase(idx);
    else
        coeffs_[std::move(idx)] = std::move(c);
}

void FormField::add_to(IndexTuple idx, const Coeff& c) {
    if (c.is_zero()) return;
    auto it = coeffs_.find(idx);
    if (it == coeffs_.end()) {
        set(std::move(idx), c);
    } else {
        Coeff s = it->second + c;
        if (s.is_zero())
            coeffs_.erase(it);
        else
            it->second = std::move(s);
    }
}

Coeff FormField::get(const IndexTuple& idx) const {
    auto it = coeffs_.find(idx);
    return it == coeffs_.end() ? Coeff() : it->second;
}

PointForm FormField::at(std::span<const double> z) const {
    PointForm out{dim_, degree_, {}};
    for (const auto& [idx, c] : coeffs_) out.c[idx] = c(z);
    return out;
}

Eigen::VectorXd FormField::covector(std::span<const double> z) const {
    if (degree_ != 1) throw DimensionMismatch(1, degree_);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dim_);
    for (const auto& [idx, c] : coeffs_) v[idx[0]] = c(z);
    return v;
}

Eigen::MatrixXd FormField::coefficient_matrix(std::span<const double> z) const {
    if (degree_ != 2) throw DimensionMismatch(2, degree_);
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(dim_, dim_);
    for (const auto& [idx, c] : coeffs_) {
        double v = c(z);
        W(idx[0], idx[1]) = v;
        W(idx[1], idx[0]) = -v;
    }
    return W;
}

double FormField::apply(std::span<const double> z, const std::vector<Eigen::VectorXd>& vectors) const {
    if (static_cast<int>(vectors.size()) != degree_)
        throw DimensionMismatch(degree_, static_cast<int>(vectors.size()));
    double total = 0.0;
    for (const auto& [idx, c] : coeffs_) {
        double det = 0.0;
        switch (degree_) {
            case 0:
                det = 1.0;
                break;
            case 1:
                det = vectors[0][idx[0]];
                break;
            case 2:
                det = vectors[0][idx[0]] * vectors[1][idx[1]] - vectors[0][idx[1]] * vectors[1][idx[0]];
                break;
            case 3: {
                auto m = [&](int r, int cidx) { return vectors[r][idx[cidx]]; };
                det = m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
                      m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
                      m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
                break;
            }
            default:
                throw DegreeOverflow(degree_);
        }
        if (det != 0.0) total += c(z) * det;
    }
    return total;
}

FormField add(const FormField& a, const FormField& b) {
    check_same_chart(a, b);
    if (a.degree() != b.degree()) throw DimensionMismatch(a.degree(), b.degree());
    FormField out = a;
    for (const auto& [idx, c] : b.coefficients()) out.add_to(idx, c);
    return out;
}

FormField subtract(const FormField& a, const FormField& b) {
    return add(a, scalar_multiply(Coeff::constant(-1.0), b));
}

FormField scalar_multiply(const Coeff& f, const FormField& a) {
    FormField out(a.dim(), a.degree());
    if (f.is_zero()) return out;
    for (const auto& [idx, c] : a.coefficients()) out.set(idx, f * c);
    return out;
}

FormField wedge(const FormField& a, const FormField& b) {
    check_same_chart(a, b);
    int d = a.degree() + b.degree();
    if (d > kMaxDegree) throw DegreeOverflow(d);
    FormField out(a.dim(), d);
    IndexTuple merged;
    for (const auto& [ia, ca] : a.coefficients()) {
        for (const auto& [ib, cb] : b.coefficients()) {
            int sign = merge_tuples(ia, ib, merged);
            if (sign == 0) continue;
            out.add_to(merged, (ca * cb).scaled(sign));
        }
    }
    return out;
}

FormField exterior_derivative(const FormField& a) {
    if (a.degree() + 1 > kMaxDegree) throw DegreeOverflow(a.degree() + 1);
    FormField out(a.dim(), a.degree() + 1);
    IndexTuple merged;
    for (const auto& [idx, c] : a.coefficients()) {
        for (int axis = 0; axis < a.dim(); ++axis) {
            Coeff dc = c.derivative(axis);
            if (dc.is_zero()) continue;
            int sign = merge_tuples({axis}, idx, merged);
            if (sign == 0) continue;
            out.add_to(merged, dc.scaled(sign));
        }
    }
    return out;
}

FormField lichnerowicz_derivative(const FormField& a, const FormField& theta) {
    if (theta.degree() != 1) throw DimensionMismatch(1, theta.degree());
    return subtract(exterior_derivative(a), wedge(theta, a));
}

PointForm interior_product(const Eigen::VectorXd& X, const FormField& a, std::span<const double> z) {
    if (a.degree() < 1) throw DegreeUnderflow();
    if (X.size() != a.dim()) throw DimensionMismatch(a.dim(), static_cast<int>(X.size()));
    PointForm out{a.dim(), a.degree() - 1, {}};
    for (const auto& [idx, c] : a.coefficients()) {
        double v = c(z);
        for (std::size_t t = 0; t < idx.size(); ++t) {
            double x = X[idx[t]];
            if (x == 0.0) continue;
            IndexTuple rest;
            rest.reserve(idx.size() - 1);
            for (std::size_t s = 0; s < idx.size(); ++s)
                if (s != t) rest.push_back(idx[s]);
            double sign = (t % 2 == 0) ? 1.0 : -1.0;
            out.c[rest] += sign * x * v;
        }
    }
    for (auto it = out.c.begin(); it != out.c.end();)
        it = it->second == 0.0 ? out.c.erase(it) : std::next(it);
    return out;
}

FormField interior_product_field(const std::vector<Coeff>& X, const FormField& a) {
    if (a.degree() < 1) throw DegreeUnderflow();
    if (static_cast<int>(X.size()) != a.dim()) throw DimensionMismatch(a.dim(), static_cast<int>(X.size()));
    FormField out(a.dim(), a.degree() - 1);
    for (const auto& [idx, c] : a.coefficients()) {
        for (std::size_t t = 0; t < idx.size(); ++t) {
            const Coeff& x = X[static_cast<std::size_t>(idx[t])];
            if (x.is_zero()) continue;
            IndexTuple rest;
            rest.reserve(idx.size() - 1);
            for (std::size_t s = 0; s < idx.size(); ++s)
                if (s != t) rest.push_back(idx[s]);
            double sign = (t % 2 == 0) ? 1.0 : -1.0;
            out.add_to(rest, (x * c).scaled(sign));
        }
    }
    return out;
}

ChartMap::ChartMap(int src_dim, int dst_dim, std::vector<Coeff> components)
    : src_dim_(src_dim), dst_dim_(dst_dim), comps_(std::move(components)) {
    if (static_cast<int>(comps_.size()) != dst_dim_)
        throw DimensionMismatch(dst_dim_, static_cast<int>(comps_.size()));
}

ChartMap ChartMap::identity(int dim) {
    std::vector<Coeff> comps;
    comps.reserve(dim);
    for (int i = 0; i < dim; ++i) comps.push_back(Coeff::coordinate(i));
    return ChartMap(dim, dim, std::move(comps));
}

Eigen::VectorXd ChartMap::operator()(std::span<const double> q) const {
    Eigen::VectorXd out(dst_dim_);
    for (int i = 0; i < dst_dim_; ++i) out[i] = comps_[i](q);
    return out;
}

Eigen::MatrixXd ChartMap::jacobian(std::span<const double> q) const {
    Eigen::MatrixXd J(dst_dim_, src_dim_);
    std::vector<D1> dq(q.size());
    for (int col = 0; col < src_dim_; ++col) {
        for (std::size_t i = 0; i < q.size(); ++i) dq[i] = D1(q[i], i == static_cast<std::size_t>(col) ? 1.0 : 0.0);
        for (int row = 0; row < dst_dim_; ++row) J(row, col) = comps_[row](std::span<const D1>(dq)).b;
    }
    return J;
}

FormField pullback(const ChartMap& phi, const FormField& a) {
    if (phi.dst_dim() != a.dim()) throw DimensionMismatch(a.dim(), phi.dst_dim());
    if (a.degree() > 2) throw DegreeOverflow(a.degree());
    const int n = phi.src_dim();
    FormField out(n, a.degree());

    auto composed = [&](const Coeff& c) {
        std::vector<Coeff> inner = phi.components();
        return Coeff::compose(c, std::move(inner));
    };

    if (a.degree() == 0) {
        for (const auto& [idx, c] : a.coefficients()) out.add_to(idx, composed(c));
        return out;
    }

    // Jacobian entries as coefficient functions
    std::vector<std::vector<Coeff>> J(phi.dst_dim(), std::vector<Coeff>(n));
    for (int i = 0; i < phi.dst_dim(); ++i)
        for (int k = 0; k < n; ++k) J[i][k] = phi.components()[i].derivative(k);

    if (a.degree() == 1) {
        for (const auto& [idx, c] : a.coefficients()) {
            Coeff ac = composed(c);
            for (int k = 0; k < n; ++k) out.add_to({k}, ac * J[idx[0]][k]);
        }
        return out;
    }

    for (const auto& [idx, c] : a.coefficients()) {
        Coeff ac = composed(c);
        int i = idx[0], j = idx[1];
        for (int k = 0; k < n; ++k) {
            for (int l = k + 1; l < n; ++l) {
                Coeff minor = J[i][k] * J[j][l] - J[i][l] * J[j][k];
                out.add_to({k, l}, ac * minor);
            }
        }
    }
    return out;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> KVectorField::value_and_dir(std::span<const double> z,
                                                                        std::span<const double> dir) const {
    double scale = 0.0;
    for (double x : z) scale = std::max(scale, std::abs(x));
    double h = 1e-6 * std::max(1.0, scale);
    std::vector<double> zp(z.begin(), z.end()), zm(z.begin(), z.end());
    for (std::size_t i = 0; i < z.size(); ++i) {
        zp[i] += h * dir[i];
        zm[i] -= h * dir[i];
    }
    Eigen::MatrixXd vp = value(zp), vm = value(zm);
    return {value(z), (vp - vm) / (2.0 * h)};
}

AnalyticKVectorField::AnalyticKVectorField(int dim, std::vector<std::vector<Coeff>> components)
    : KVectorField(static_cast<int>(components.size()), dim), comps_(std::move(components)) {
    for (const auto& c : comps_)
        if (static_cast<int>(c.size()) != dim) throw DimensionMismatch(dim, static_cast<int>(c.size()));
}

Eigen::MatrixXd AnalyticKVectorField::value(std::span<const double> z) const {
    Eigen::MatrixXd out(dim(), k());
    for (int kappa = 0; kappa < k(); ++kappa)
        for (int i = 0; i < dim(); ++i) out(i, kappa) = comps_[kappa][i](z);
    return out;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> AnalyticKVectorField::value_and_dir(
    std::span<const double> z, std::span<const double> dir) const {
    std::vector<D1> dz(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) dz[i] = D1(z[i], dir[i]);
    Eigen::MatrixXd v(dim(), k()), d(dim(), k());
    for (int kappa = 0; kappa < k(); ++kappa) {
        for (int i = 0; i < dim(); ++i) {
            D1 r = comps_[kappa][i](std::span<const D1>(dz));
            v(i, kappa) = r.a;
            d(i, kappa) = r.b;
        }
    }
    return {v, d};
}

}  // namespace lcks
