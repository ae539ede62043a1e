#pragma once

/* Exterior calculus on a single coordinate chart.
 *
 * Differential forms of degree 0..3 are stored as maps from strictly
 * increasing index tuples to Coeff coefficient functions (the canonical
 * antisymmetric representation).  Evaluation on vectors uses the
 * determinant convention, so for a 1-form t and 2-form w
 *     (t ^ w)(u, v, x) = t(u) w(v, x) - t(v) w(u, x) + t(x) w(u, v).
 */

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "lcks/coeff.hpp"
#include "lcks/errors.hpp"

namespace lcks {

using IndexTuple = std::vector<int>;

inline std::span<const double> as_span(const Eigen::VectorXd& v) {
    return {v.data(), static_cast<std::size_t>(v.size())};
}

// form value at a single point
struct PointForm {
    int dim = 0;
    int degree = 0;
    std::map<IndexTuple, double> c;

    double get(const IndexTuple& idx) const;
    double norm_inf() const;
    PointForm operator-(const PointForm& other) const;
};

class FormField {
  public:
    FormField() = default;
    FormField(int dim, int degree);

    static FormField scalar(int dim, Coeff f);

    int dim() const { return dim_; }
    int degree() const { return degree_; }
    const std::map<IndexTuple, Coeff>& coefficients() const { return coeffs_; }

    bool is_structurally_zero() const { return coeffs_.empty(); }

    void set(IndexTuple idx, Coeff c);
    void add_to(IndexTuple idx, const Coeff& c);
    Coeff get(const IndexTuple& idx) const;

    PointForm at(std::span<const double> z) const;
    // degree 1: covector of components
    Eigen::VectorXd covector(std::span<const double> z) const;
    // degree 2: antisymmetric matrix W with W(a,b) = form(e_a, e_b)
    Eigen::MatrixXd coefficient_matrix(std::span<const double> z) const;
    // evaluate on `degree` vectors
    double apply(std::span<const double> z, const std::vector<Eigen::VectorXd>& vectors) const;

  private:
    int dim_ = 0;
    int degree_ = 0;
    std::map<IndexTuple, Coeff> coeffs_;
};

FormField add(const FormField& a, const FormField& b);
FormField subtract(const FormField& a, const FormField& b);
FormField scalar_multiply(const Coeff& f, const FormField& a);

FormField wedge(const FormField& a, const FormField& b);
FormField exterior_derivative(const FormField& a);
// d_theta a = da - theta ^ a
FormField lichnerowicz_derivative(const FormField& a, const FormField& theta);

// pointwise contraction (i_X a)(v...) = a(X, v...)
PointForm interior_product(const Eigen::VectorXd& X, const FormField& a, std::span<const double> z);
// symbolic contraction with a vector field given by component coefficients
FormField interior_product_field(const std::vector<Coeff>& X, const FormField& a);

class ChartMap {
  public:
    ChartMap() = default;
    ChartMap(int src_dim, int dst_dim, std::vector<Coeff> components);

    static ChartMap identity(int dim);

    int src_dim() const { return src_dim_; }
    int dst_dim() const { return dst_dim_; }
    const std::vector<Coeff>& components() const { return comps_; }

    Eigen::VectorXd operator()(std::span<const double> q) const;
    Eigen::MatrixXd jacobian(std::span<const double> q) const;  // dst x src

    template <class T>
    std::vector<T> eval(std::span<const T> q) const {
        std::vector<T> out;
        out.reserve(comps_.size());
        for (const auto& c : comps_) out.push_back(c(q));
        return out;
    }

  private:
    int src_dim_ = 0;
    int dst_dim_ = 0;
    std::vector<Coeff> comps_;
};

FormField pullback(const ChartMap& phi, const FormField& a);

// Ordered family (X_1, ..., X_k) of vector fields on one chart.
class KVectorField {
  public:
    virtual ~KVectorField() = default;
    KVectorField(int k, int dim) : k_(k), dim_(dim) {}

    int k() const { return k_; }
    int dim() const { return dim_; }

    // dim x k matrix; column kappa is X_kappa at z
    virtual Eigen::MatrixXd value(std::span<const double> z) const = 0;

    // value and directional derivative along dir; default is central differences
    virtual std::pair<Eigen::MatrixXd, Eigen::MatrixXd> value_and_dir(std::span<const double> z,
                                                                      std::span<const double> dir) const;

  private:
    int k_;
    int dim_;
};

// k-vector field with explicit coefficient functions
class AnalyticKVectorField : public KVectorField {
  public:
    AnalyticKVectorField(int dim, std::vector<std::vector<Coeff>> components);

    Eigen::MatrixXd value(std::span<const double> z) const override;
    std::pair<Eigen::MatrixXd, Eigen::MatrixXd> value_and_dir(std::span<const double> z,
                                                              std::span<const double> dir) const override;

    const Coeff& component(int kappa, int i) const { return comps_[kappa][i]; }

  private:
    std::vector<std::vector<Coeff>> comps_;  // [kappa][i]
};

// k-vector field backed by an arbitrary pointwise solver
class CallbackKVectorField : public KVectorField {
  public:
    CallbackKVectorField(int k, int dim, std::function<Eigen::MatrixXd(std::span<const double>)> fn)
        : KVectorField(k, dim), fn_(std::move(fn)) {}

    Eigen::MatrixXd value(std::span<const double> z) const override { return fn_(z); }

  private:
    std::function<Eigen::MatrixXd(std::span<const double>)> fn_;
};

}  // namespace lcks
