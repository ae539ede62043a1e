#include "lcks/bundle.hpp"

#include <cmath>

#include "lcks/linalg.hpp"

namespace lcks {

std::vector<std::string> base_coordinate_names(int n) {
    std::vector<std::string> names;
    names.reserve(n);
    for (int i = 1; i <= n; ++i) names.push_back("q" + std::to_string(i));
    return names;
}

std::vector<std::string> phase_coordinate_names(int n, int k) {
    std::vector<std::string> names = base_coordinate_names(n);
    for (int kappa = 1; kappa <= k; ++kappa)
        for (int i = 1; i <= n; ++i)
            names.push_back("p_" + std::to_string(kappa) + "_" + std::to_string(i));
    return names;
}

Coeff PhaseBundle::promote(const Coeff& base_coeff) const {
    std::vector<Coeff> first;
    first.reserve(n);
    for (int i = 0; i < n; ++i) first.push_back(Coeff::coordinate(i));
    return Coeff::compose(base_coeff, std::move(first));
}

FormField PhaseBundle::promote_form(const FormField& base_form) const {
    FormField out(N, base_form.degree());
    for (const auto& [idx, c] : base_form.coefficients()) out.set(idx, promote(c));
    return out;
}

std::vector<int> PhaseBundle::vertical_indices() const {
    std::vector<int> v;
    v.reserve(n * k);
    for (int i = n; i < N; ++i) v.push_back(i);
    return v;
}

PhaseBundle build_phase_bundle(int n, int k, const FormField& vartheta, const Domain& base_domain,
                               double momentum_radius, double closedness_tol, int closedness_samples,
                               std::uint64_t seed) {
    if (n < 1 || k < 1) throw Error("need n >= 1 and k >= 1");
    if (vartheta.dim() != n) throw DimensionMismatch(n, vartheta.dim());
    if (vartheta.degree() != 1) throw DimensionMismatch(1, vartheta.degree());

    FormField dv = exterior_derivative(vartheta);
    if (!dv.is_structurally_zero()) {
        Rng rng(seed);
        double worst = 0.0;
        Eigen::VectorXd worst_z;
        for (int s = 0; s < closedness_samples; ++s) {
            Eigen::VectorXd z = sample_point(base_domain, rng);
            double r = dv.at(as_span(z)).norm_inf();
            if (r > worst) {
                worst = r;
                worst_z = z;
            }
        }
        if (worst > closedness_tol)
            throw NotClosed(std::vector<double>(worst_z.data(), worst_z.data() + worst_z.size()), worst);
    }

    PhaseBundle b;
    b.n = n;
    b.k = k;
    b.N = n + n * k;
    b.base_scope = make_scope(base_coordinate_names(n));
    b.phase_scope = make_scope(phase_coordinate_names(n, k));
    b.base_domain = base_domain;

    const double loose = 100.0 * momentum_radius;
    b.phase_domain.lo = Eigen::VectorXd(b.N);
    b.phase_domain.hi = Eigen::VectorXd(b.N);
    b.phase_domain.lo.head(n) = base_domain.lo;
    b.phase_domain.hi.head(n) = base_domain.hi;
    for (int i = n; i < b.N; ++i) {
        b.phase_domain.lo(i) = -loose;
        b.phase_domain.hi(i) = loose;
    }
    b.phase_domain.puncture_dims = base_domain.puncture_dims;
    b.phase_domain.puncture_radius = base_domain.puncture_radius;

    b.phase_sample_domain = b.phase_domain;
    for (int i = n; i < b.N; ++i) {
        b.phase_sample_domain.lo(i) = -momentum_radius;
        b.phase_sample_domain.hi(i) = momentum_radius;
    }
    b.phase_sample_domain.ball_start = n;
    b.phase_sample_domain.ball_radius = momentum_radius;

    b.vartheta = vartheta;
    b.theta = b.promote_form(vartheta);

    b.Theta.reserve(k);
    b.Omega.reserve(k);
    b.OmegaTheta.reserve(k);
    for (int kappa = 0; kappa < k; ++kappa) {
        FormField theta_k(b.N, 1);
        FormField omega_k(b.N, 2);
        for (int i = 0; i < n; ++i) {
            int pi = b.momentum_index(kappa, i);
            theta_k.set({i}, Coeff::coordinate(pi));
            omega_k.set({i, pi}, Coeff::constant(1.0));
        }
        b.OmegaTheta.push_back(add(omega_k, wedge(b.theta, theta_k)));
        b.Theta.push_back(std::move(theta_k));
        b.Omega.push_back(std::move(omega_k));
    }
    return b;
}

StructureReport verify_structure(const PhaseBundle& b, const std::vector<Eigen::VectorXd>& points,
                                 double tol) {
    StructureReport rep;
    rep.tolerance = tol;
    rep.expected_single_kernel_dim = b.n * (b.k - 1);

    // axiom (i) residual fields, one per kappa
    std::vector<FormField> axiom1;
    axiom1.reserve(b.k);
    for (int kappa = 0; kappa < b.k; ++kappa)
        axiom1.push_back(subtract(exterior_derivative(b.OmegaTheta[kappa]), wedge(b.theta, b.OmegaTheta[kappa])));

    const auto vert = b.vertical_indices();

    for (const auto& zvec : points) {
        auto z = as_span(zvec);
        StructureReport::Row row;
        row.z = zvec;

        Eigen::MatrixXd stacked(b.k * b.N, b.N);
        for (int kappa = 0; kappa < b.k; ++kappa) {
            row.axiom_i = std::max(row.axiom_i, axiom1[kappa].at(z).norm_inf());

            Eigen::MatrixXd W = b.OmegaTheta[kappa].coefficient_matrix(z);
            stacked.middleRows(kappa * b.N, b.N) = W;
            row.single_kernel_dims.push_back(b.N - numerical_rank(W));

            for (std::size_t a = 0; a < vert.size(); ++a)
                for (std::size_t c = a + 1; c < vert.size(); ++c) {
                    double v = b.OmegaTheta[kappa].get({vert[a], vert[c]}).at(z);
                    row.axiom_iii = std::max(row.axiom_iii, std::abs(v));
                }
        }
        row.stacked_kernel_dim = b.N - numerical_rank(stacked);

        // cross-check the dq^i ^ dq^j block against the literal Darboux pattern
        // theta_i p^kappa_j - theta_j p^kappa_i
        Eigen::VectorXd vth = b.theta.covector(z);
        for (int kappa = 0; kappa < b.k && !rep.darboux_pattern_mismatch; ++kappa)
            for (int i = 0; i < b.n; ++i)
                for (int j = i + 1; j < b.n; ++j) {
                    double got = b.OmegaTheta[kappa].get({i, j}).at(z);
                    double want = vth(i) * zvec(b.momentum_index(kappa, j)) -
                                  vth(j) * zvec(b.momentum_index(kappa, i));
                    if (std::abs(got - want) > tol * std::max(1.0, std::abs(want)))
                        rep.darboux_pattern_mismatch = true;
                }

        rep.max_axiom_i = std::max(rep.max_axiom_i, row.axiom_i);
        rep.max_axiom_iii = std::max(rep.max_axiom_iii, row.axiom_iii);
        rep.max_stacked_kernel_dim = std::max(rep.max_stacked_kernel_dim, row.stacked_kernel_dim);
        for (int d : row.single_kernel_dims)
            if (d != rep.expected_single_kernel_dim) rep.single_kernel_dims_ok = false;
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

std::vector<FormField> conformal_rescale(const PhaseBundle& b, const Coeff& sigma) {
    Coeff factor = coeff_neg_exp(sigma);
    std::vector<FormField> out;
    out.reserve(b.k);
    for (const auto& w : b.OmegaTheta) out.push_back(scalar_multiply(factor, w));
    return out;
}

LiouvilleResult liouville_fields_at(const PhaseBundle& b, const std::vector<FormField>& upsilon,
                                    std::span<const double> z, double tol) {
    if (static_cast<int>(upsilon.size()) != b.k) throw DimensionMismatch(b.k, static_cast<int>(upsilon.size()));
    LiouvilleResult res;
    res.Z = Eigen::MatrixXd::Zero(b.N, b.k);
    res.residuals = Eigen::VectorXd::Zero(b.k);
    res.contractions = Eigen::VectorXd::Zero(b.k);
    res.exact.assign(b.k, false);

    for (int kappa = 0; kappa < b.k; ++kappa) {
        Eigen::MatrixXd B = b.OmegaTheta[kappa].coefficient_matrix(z).transpose();
        Eigen::VectorXd rhs = upsilon[kappa].covector(z);
        Eigen::VectorXd zk = min_norm_solve(B, rhs);
        double resid = (B * zk - rhs).lpNorm<Eigen::Infinity>();
        if (resid > tol) throw Inconsistent(resid);
        res.Z.col(kappa) = zk;
        res.residuals(kappa) = resid;

        PointForm diff = lichnerowicz_derivative(upsilon[kappa], b.theta).at(z) - b.OmegaTheta[kappa].at(z);
        res.exact[kappa] = diff.norm_inf() < tol;
        if (res.exact[kappa]) res.contractions(kappa) = rhs.dot(zk);
    }
    return res;
}

namespace {

class LiouvilleField : public KVectorField {
  public:
    LiouvilleField(const PhaseBundle& b, std::vector<FormField> upsilon)
        : KVectorField(b.k, b.N), bundle_(&b), upsilon_(std::move(upsilon)) {}

    Eigen::MatrixXd value(std::span<const double> z) const override {
        Eigen::MatrixXd Z(dim(), k());
        for (int kappa = 0; kappa < k(); ++kappa) {
            Eigen::MatrixXd B = bundle_->OmegaTheta[kappa].coefficient_matrix(z).transpose();
            Z.col(kappa) = min_norm_solve(B, upsilon_[kappa].covector(z));
        }
        return Z;
    }

  private:
    const PhaseBundle* bundle_;
    std::vector<FormField> upsilon_;
};

}  // namespace

std::shared_ptr<KVectorField> liouville_fields(const PhaseBundle& b, std::vector<FormField> upsilon) {
    if (static_cast<int>(upsilon.size()) != b.k) throw DimensionMismatch(b.k, static_cast<int>(upsilon.size()));
    return std::make_shared<LiouvilleField>(b, std::move(upsilon));
}

}  // namespace lcks
