#include "lcks/hj.hpp"

#include <cmath>

namespace lcks {

Section Section::from_forms(std::vector<FormField> one_forms) {
    Section s;
    s.k = static_cast<int>(one_forms.size());
    if (s.k == 0) throw Error("section needs at least one one-form");
    s.n = one_forms[0].dim();
    for (const auto& f : one_forms) {
        if (f.degree() != 1) throw DimensionMismatch(1, f.degree());
        if (f.dim() != s.n) throw DimensionMismatch(s.n, f.dim());
        std::vector<Coeff> row(s.n);
        for (int i = 0; i < s.n; ++i) row[i] = f.get({i});
        s.gamma.push_back(std::move(row));
    }
    return s;
}

FormField Section::form(int kappa) const {
    FormField f(n, 1);
    for (int i = 0; i < n; ++i) f.set({i}, gamma[kappa][i]);
    return f;
}

ChartMap Section::induced(const PhaseBundle& b) const {
    if (b.n != n || b.k != k) throw DimensionMismatch(b.n, n);
    std::vector<Coeff> comps;
    comps.reserve(b.N);
    for (int i = 0; i < n; ++i) comps.push_back(Coeff::coordinate(i));
    for (int kappa = 0; kappa < k; ++kappa)
        for (int i = 0; i < n; ++i) comps.push_back(gamma[kappa][i]);
    return ChartMap(n, b.N, std::move(comps));
}

double section_closedness(const Section& s, const FormField& vartheta,
                          const std::vector<Eigen::VectorXd>& base_points) {
    double worst = 0.0;
    for (int kappa = 0; kappa < s.k; ++kappa) {
        FormField d = lichnerowicz_derivative(s.form(kappa), vartheta);
        for (const auto& q : base_points) worst = std::max(worst, d.at(as_span(q)).norm_inf());
    }
    return worst;
}

Eigen::MatrixXd project_field(const KVectorField& X, const Section& s, const PhaseBundle& b,
                              std::span<const double> q) {
    ChartMap gamma_hat = s.induced(b);
    Eigen::VectorXd z = gamma_hat(q);
    if (!b.phase_domain.contains(as_span(z)))
        throw DomainEscape(std::vector<double>(z.data(), z.data() + z.size()));
    return X.value(as_span(z)).topRows(s.n);
}

namespace {

class ProjectedField : public KVectorField {
  public:
    ProjectedField(std::shared_ptr<const KVectorField> X, ChartMap gamma_hat, int n)
        : KVectorField(X->k(), n), X_(std::move(X)), gamma_hat_(std::move(gamma_hat)) {}

    Eigen::MatrixXd value(std::span<const double> q) const override {
        Eigen::VectorXd z = gamma_hat_(q);
        return X_->value(as_span(z)).topRows(dim());
    }

    std::pair<Eigen::MatrixXd, Eigen::MatrixXd> value_and_dir(std::span<const double> q,
                                                              std::span<const double> dir) const override {
        // chain rule: d/dt X(gamma(q + t dir)) = DX(gamma(q)) . (Dgamma . dir)
        std::vector<D1> dq(q.size());
        for (std::size_t i = 0; i < q.size(); ++i) dq[i] = D1(q[i], dir[i]);
        auto zdual = gamma_hat_.eval<D1>(dq);
        Eigen::VectorXd z(zdual.size()), dz(zdual.size());
        for (std::size_t i = 0; i < zdual.size(); ++i) {
            z(i) = zdual[i].a;
            dz(i) = zdual[i].b;
        }
        auto [v, d] = X_->value_and_dir(as_span(z), as_span(dz));
        return {v.topRows(dim()), d.topRows(dim())};
    }

  private:
    std::shared_ptr<const KVectorField> X_;
    ChartMap gamma_hat_;
};

}  // namespace

std::shared_ptr<KVectorField> projected_base_field(std::shared_ptr<const KVectorField> X, const Section& s,
                                                   const PhaseBundle& b) {
    return std::make_shared<ProjectedField>(std::move(X), s.induced(b), s.n);
}

HjResiduals hj_residual(const PhaseBundle& b, const Coeff& H, const Section& s,
                        const std::vector<Eigen::VectorXd>& base_points) {
    ChartMap gamma_hat = s.induced(b);
    Coeff h_gamma = Coeff::compose(H, gamma_hat.components());
    FormField lhs = lichnerowicz_derivative(FormField::scalar(s.n, h_gamma), b.vartheta);
    FormField rhs = pullback(gamma_hat, d_theta_hamiltonian(b, H));

    HjResiduals out;
    for (const auto& q : base_points) {
        PointForm l = lhs.at(as_span(q));
        out.residual = std::max(out.residual, l.norm_inf());
        out.cross_check = std::max(out.cross_check, (l - rhs.at(as_span(q))).norm_inf());
    }
    return out;
}

RelatednessResult relatedness_defect(const PhaseBundle& b, const KVectorField& X, const Section& s,
                                     const std::vector<Eigen::VectorXd>& base_points) {
    ChartMap gamma_hat = s.induced(b);
    RelatednessResult out;
    for (const auto& q : base_points) {
        Eigen::VectorXd z = gamma_hat(as_span(q));
        if (!b.phase_domain.contains(as_span(z)))
            throw DomainEscape(std::vector<double>(z.data(), z.data() + z.size()));
        Eigen::MatrixXd Xz = X.value(as_span(z));
        Eigen::MatrixXd J = gamma_hat.jacobian(as_span(q));
        Eigen::MatrixXd D = Xz - J * Xz.topRows(s.n);
        out.verticality = std::max(out.verticality, D.topRows(s.n).lpNorm<Eigen::Infinity>());
        FlatMatrix f = assemble_flat(b, as_span(z));
        Eigen::VectorXd stacked(b.k * b.N);
        for (int kappa = 0; kappa < b.k; ++kappa) stacked.segment(kappa * b.N, b.N) = D.col(kappa);
        out.flat_defect = std::max(out.flat_defect, (f.B * stacked).lpNorm<Eigen::Infinity>());
    }
    return out;
}

HJReport verify_hj_theorem(const PhaseBundle& b, const Coeff& H, std::shared_ptr<const KVectorField> X,
                           const Section& s, std::span<const double> base_start, const GridSpec& grid,
                           const std::vector<Eigen::VectorXd>& base_points, double tol_algebraic,
                           double tol_integration) {
    HJReport rep;
    rep.tol_algebraic = tol_algebraic;
    rep.tol_integration = tol_integration;

    ChartMap gamma_hat = s.induced(b);
    FormField dthetaH = d_theta_hamiltonian(b, H);

    // hypotheses: X solves the field equation along Im gamma, gamma is closed
    for (const auto& q : base_points) {
        Eigen::VectorXd z = gamma_hat(as_span(q));
        FlatMatrix f = assemble_flat(b, as_span(z));
        Eigen::MatrixXd Xz = X->value(as_span(z));
        Eigen::VectorXd stacked(b.k * b.N);
        for (int kappa = 0; kappa < b.k; ++kappa) stacked.segment(kappa * b.N, b.N) = Xz.col(kappa);
        double r = (f.B * stacked - dthetaH.covector(as_span(z))).lpNorm<Eigen::Infinity>();
        rep.solver_residual = std::max(rep.solver_residual, r);
    }
    if (rep.solver_residual > tol_algebraic)
        throw PreconditionFailed("X does not solve the field equation", rep.solver_residual);

    rep.closedness = section_closedness(s, b.vartheta, base_points);
    if (rep.closedness > tol_algebraic)
        throw PreconditionFailed("section is not d_vartheta-closed", rep.closedness);

    HjResiduals hj = hj_residual(b, H, s, base_points);
    rep.hj = hj.residual;
    rep.hj_cross_check = hj.cross_check;

    RelatednessResult rel = relatedness_defect(b, *X, s, base_points);
    rep.relatedness = rel.flat_defect;
    rep.verticality = rel.verticality;

    // condition (1), constructively: integrate the projected field, lift the
    // grid through gamma, and measure the lifted flat-map residual
    auto Xg = projected_base_field(X, s, b);
    MultiTimeGrid base_grid = integrate_section(*Xg, base_start, grid, b.base_domain);
    MultiTimeGrid lifted;
    lifted.k = base_grid.k;
    lifted.dim = b.N;
    lifted.shape = base_grid.shape;
    lifted.sizes = base_grid.sizes;
    lifted.escape_index = base_grid.escape_index;
    lifted.values.resize(base_grid.values.size());
    for (std::size_t i = 0; i < base_grid.values.size(); ++i)
        if (base_grid.values[i].size() != 0) lifted.values[i] = gamma_hat(as_span(base_grid.values[i]));
    lifted.start = gamma_hat(base_start);
    rep.lift = grid_flat_residual(lifted, b, H, &rep.lift_measured_points);
    rep.lift_grid_escaped = base_grid.escape_index.has_value();

    for (const auto& q : base_points) {
        Eigen::VectorXd z = gamma_hat(as_span(q));
        rep.integrability = std::max(rep.integrability, integrability_defect(*X, as_span(z)));
    }

    rep.hj_pass = rep.hj < tol_algebraic;
    rep.relatedness_pass = rep.relatedness < tol_algebraic;
    rep.lift_pass = rep.lift < tol_integration && rep.lift_measured_points > 0;
    bool all = rep.hj_pass && rep.relatedness_pass && rep.lift_pass;
    bool none = !rep.hj_pass && !rep.relatedness_pass && !rep.lift_pass;
    rep.verdict = (all || none) ? "PASS" : "VIOLATION";
    return rep;
}

}  // namespace lcks
