#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "lcks/bundle.hpp"
#include "lcks/linalg.hpp"
#include "lcks/problem.hpp"

using namespace lcks;

namespace {

FormField lee_form(int n, ScopePtr scope) {
    FormField t(n, 1);
    t.set({0}, Coeff::from_expr(parse("-2*q2/(q1^2+q2^2)", scope)));
    t.set({1}, Coeff::from_expr(parse("2*q1/(q1^2+q2^2)", scope)));
    return t;
}

Domain plane_domain() {
    Domain d;
    d.lo = Eigen::Vector2d(-6.0, -6.0);
    d.hi = Eigen::Vector2d(6.0, 6.0);
    d.puncture_dims = 2;
    d.puncture_radius = 0.1;
    return d;
}

PhaseBundle punctured_bundle(int k) {
    auto scope = make_scope(base_coordinate_names(2));
    return build_phase_bundle(2, k, lee_form(2, scope), plane_domain(), 10.0);
}

PhaseBundle darboux_bundle(int n, int k) {
    Domain d;
    d.lo = Eigen::VectorXd::Constant(n, -5.0);
    d.hi = Eigen::VectorXd::Constant(n, 5.0);
    return build_phase_bundle(n, k, FormField(n, 1), d, 10.0);
}

// row-reduction rank with partial pivoting, independent of the SVD route
int elimination_rank(Eigen::MatrixXd M, double tol = 1e-10) {
    double scale = M.cwiseAbs().maxCoeff();
    if (scale == 0.0) return 0;
    int rank = 0;
    int rows = static_cast<int>(M.rows()), cols = static_cast<int>(M.cols());
    for (int c = 0; c < cols && rank < rows; ++c) {
        int piv = rank;
        for (int r = rank + 1; r < rows; ++r)
            if (std::abs(M(r, c)) > std::abs(M(piv, c))) piv = r;
        if (std::abs(M(piv, c)) <= tol * scale) continue;
        M.row(piv).swap(M.row(rank));
        for (int r = rank + 1; r < rows; ++r) M.row(r) -= (M(r, c) / M(rank, c)) * M.row(rank);
        ++rank;
    }
    return rank;
}

}  // namespace

TEST_CASE("bundle assembly") {
    SUBCASE("dimension counts for n=2, k=3") {
        PhaseBundle b = punctured_bundle(3);
        CHECK(b.N == 8);
        CHECK(b.OmegaTheta.size() == 3);
        CHECK(b.vertical_indices().size() == 6);
        CHECK(b.phase_scope->name(2) == "p_1_1");
        CHECK(b.phase_scope->name(7) == "p_3_2");
    }

    SUBCASE("vanishing Lee form gives the plain Darboux family") {
        PhaseBundle b = darboux_bundle(2, 2);
        Rng rng(5);
        for (int i = 0; i < 10; ++i) {
            Eigen::VectorXd z = sample_point(b.phase_sample_domain, rng);
            for (int kappa = 0; kappa < 2; ++kappa)
                CHECK((b.OmegaTheta[kappa].at(as_span(z)) - b.Omega[kappa].at(as_span(z))).norm_inf() == 0.0);
        }
    }

    SUBCASE("twisted two-form coefficient at the reference point") {
        PhaseBundle b = punctured_bundle(1);
        Eigen::VectorXd z(4);
        z << 1.0, 0.0, 1.0, 0.0;
        CHECK(b.OmegaTheta[0].get({0, 1}).at(as_span(z)) == doctest::Approx(-2.0).epsilon(1e-14));
    }

    SUBCASE("semi-basic Lee form: no momentum components") {
        PhaseBundle b = punctured_bundle(2);
        for (const auto& [idx, c] : b.theta.coefficients()) CHECK(idx[0] < b.n);
    }

    SUBCASE("a non-closed one-form is rejected") {
        auto scope = make_scope(base_coordinate_names(2));
        FormField bad(2, 1);
        bad.set({0}, Coeff::from_expr(parse("q2", scope)));  // d(q2 dq1) = -dq1^dq2
        CHECK_THROWS_AS(build_phase_bundle(2, 1, bad, plane_domain(), 10.0), NotClosed);
    }
}

TEST_CASE("structure verification") {
    SUBCASE("punctured-plane bundle passes for k in 1..3") {
        for (int k : {1, 2, 3}) {
            CAPTURE(k);
            PhaseBundle b = punctured_bundle(k);
            auto pts = sample_points(b.phase_sample_domain, 100, 42);
            StructureReport rep = verify_structure(b, pts, 1e-8);
            CHECK(rep.all_pass());
            CHECK(rep.max_stacked_kernel_dim == 0);
            CHECK(rep.expected_single_kernel_dim == 2 * (k - 1));
            CHECK(rep.max_axiom_iii < 1e-12);
            CHECK_FALSE(rep.darboux_pattern_mismatch);
        }
    }

    SUBCASE("constant-coefficient Darboux forms have exactly zero axiom-i residual") {
        PhaseBundle b = darboux_bundle(2, 2);
        auto pts = sample_points(b.phase_sample_domain, 20, 7);
        StructureReport rep = verify_structure(b, pts, 1e-12);
        CHECK(rep.max_axiom_i == 0.0);
        CHECK(rep.all_pass());
    }

    SUBCASE("corrupting one two-form degrades the joint kernel") {
        PhaseBundle b = punctured_bundle(2);
        b.OmegaTheta[0] = FormField(b.N, 2);  // zeroed out
        auto pts = sample_points(b.phase_sample_domain, 10, 11);
        StructureReport rep = verify_structure(b, pts, 1e-8);
        CHECK(rep.max_stacked_kernel_dim >= b.n);
        CHECK_FALSE(rep.all_pass());

        // independent rank oracle at one point
        Eigen::VectorXd z = pts.front();
        Eigen::MatrixXd stacked(2 * b.N, b.N);
        for (int kappa = 0; kappa < 2; ++kappa)
            stacked.middleRows(kappa * b.N, b.N) = b.OmegaTheta[kappa].coefficient_matrix(as_span(z));
        CHECK(b.N - elimination_rank(stacked) == rep.rows.front().stacked_kernel_dim);
    }

    SUBCASE("SVD rank agrees with elimination rank on the stacked matrices") {
        PhaseBundle b = punctured_bundle(3);
        auto pts = sample_points(b.phase_sample_domain, 10, 13);
        for (const auto& z : pts) {
            Eigen::MatrixXd stacked(3 * b.N, b.N);
            for (int kappa = 0; kappa < 3; ++kappa)
                stacked.middleRows(kappa * b.N, b.N) = b.OmegaTheta[kappa].coefficient_matrix(as_span(z));
            CHECK(numerical_rank(stacked) == elimination_rank(stacked));
        }
    }
}

TEST_CASE("conformal rescaling") {
    PhaseBundle b = punctured_bundle(1);

    SUBCASE("sigma = 0 is the identity") {
        auto scaled = conformal_rescale(b, Coeff::constant(0.0));
        Rng rng(17);
        for (int i = 0; i < 10; ++i) {
            Eigen::VectorXd z = sample_point(b.phase_sample_domain, rng);
            CHECK((scaled[0].at(as_span(z)) - b.OmegaTheta[0].at(as_span(z))).norm_inf() < 1e-15);
        }
    }

    SUBCASE("d(e^{-sigma} Omega) = (theta - d sigma) ^ (e^{-sigma} Omega)") {
        auto scope = make_scope(base_coordinate_names(2));
        Coeff sigma = b.promote(Coeff::from_expr(parse("q1*q2/4", scope)));
        auto scaled = conformal_rescale(b, sigma);
        FormField dsigma = exterior_derivative(FormField::scalar(b.N, sigma));
        FormField expected_factor = subtract(b.theta, dsigma);
        FormField lhs = exterior_derivative(scaled[0]);
        FormField rhs = wedge(expected_factor, scaled[0]);
        Rng rng(19);
        for (int i = 0; i < 20; ++i) {
            Eigen::VectorXd z = sample_point(b.phase_sample_domain, rng);
            double scale = std::max(1.0, rhs.at(as_span(z)).norm_inf());
            CHECK((lhs.at(as_span(z)) - rhs.at(as_span(z))).norm_inf() < 1e-9 * scale);
        }
    }

    SUBCASE("rescaling by sigma then -sigma restores the coefficients") {
        auto scope = make_scope(base_coordinate_names(2));
        Coeff sigma = b.promote(Coeff::from_expr(parse("q1 - q2/2", scope)));
        auto once = conformal_rescale(b, sigma);
        FormField back = scalar_multiply(coeff_exp(sigma), once[0]);
        Rng rng(23);
        for (int i = 0; i < 20; ++i) {
            Eigen::VectorXd z = sample_point(b.phase_sample_domain, rng);
            PointForm orig = b.OmegaTheta[0].at(as_span(z));
            CHECK((back.at(as_span(z)) - orig).norm_inf() <= 1e-13 * std::max(1.0, orig.norm_inf()));
        }
    }
}

TEST_CASE("Liouville solves") {
    Eigen::VectorXd z(4);
    z << 1.0, 0.0, 1.0, 0.0;

    SUBCASE("canonical generator: i_Z Omega = -Theta gives Z = p d/dp") {
        for (bool twisted : {false, true}) {
            CAPTURE(twisted);
            PhaseBundle b = twisted ? punctured_bundle(1) : darboux_bundle(2, 1);
            std::vector<FormField> upsilon{scalar_multiply(Coeff::constant(-1.0), b.Theta[0])};
            LiouvilleResult r = liouville_fields_at(b, upsilon, as_span(z));
            CHECK(r.Z(0, 0) == doctest::Approx(0.0));
            CHECK(r.Z(1, 0) == doctest::Approx(0.0));
            CHECK(r.Z(2, 0) == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(r.Z(3, 0) == doctest::Approx(0.0));
            CHECK(r.exact[0]);  // OmegaTheta = d_theta(-Theta) holds
            CHECK(std::abs(r.contractions(0)) < 1e-12);
        }
    }

    SUBCASE("zero right-hand side gives the zero field") {
        PhaseBundle b = punctured_bundle(2);
        std::vector<FormField> upsilon{FormField(b.N, 1), FormField(b.N, 1)};
        Eigen::VectorXd z2(6);
        z2 << 1.0, 0.5, 1.0, 0.0, -0.5, 2.0;
        LiouvilleResult r = liouville_fields_at(b, upsilon, as_span(z2));
        CHECK(r.Z.norm() == 0.0);
    }

    SUBCASE("generic k=2 data reports residuals and matches a least-squares oracle") {
        PhaseBundle b = darboux_bundle(2, 2);
        auto scope = b.phase_scope;
        std::vector<FormField> upsilon(2, FormField(b.N, 1));
        upsilon[0].set({0}, Coeff::from_expr(parse("q2", scope)));
        upsilon[0].set({2}, Coeff::constant(1.0));
        upsilon[1].set({1}, Coeff::from_expr(parse("p_2_2", scope)));
        Eigen::VectorXd z2(6);
        z2 << 0.7, -0.3, 1.1, 0.4, -0.8, 0.9;

        LiouvilleResult r = liouville_fields_at(b, upsilon, as_span(z2), 1e-8);
        CHECK_FALSE(r.exact[0]);

        for (int kappa = 0; kappa < 2; ++kappa) {
            Eigen::MatrixXd B = b.OmegaTheta[kappa].coefficient_matrix(as_span(z2)).transpose();
            Eigen::VectorXd rhs = upsilon[kappa].covector(as_span(z2));
            // normal-equations oracle on the row space: B is antisymmetric and
            // singular, so solve on the image via B B^T y = B rhs is unstable;
            // instead verify optimality: residual orthogonal to the range,
            // solution orthogonal to the kernel
            Eigen::VectorXd resid = B * r.Z.col(kappa) - rhs;
            CHECK((B.transpose() * resid).lpNorm<Eigen::Infinity>() < 1e-9);
            Eigen::MatrixXd K = kernel_basis_of(B);
            if (K.cols() > 0)
                CHECK((K.transpose() * r.Z.col(kappa)).lpNorm<Eigen::Infinity>() < 1e-10);
        }
    }

    SUBCASE("right-hand side outside the range raises Inconsistent") {
        PhaseBundle b = darboux_bundle(2, 2);
        // dp^2_1 component cannot be produced by contractions with Omega^1
        std::vector<FormField> upsilon(2, FormField(b.N, 1));
        upsilon[0].set({4}, Coeff::constant(1.0));
        Eigen::VectorXd z2(6);
        z2 << 0.5, 0.5, 0.1, 0.2, 0.3, 0.4;
        CHECK_THROWS_AS(liouville_fields_at(b, upsilon, as_span(z2), 1e-8), Inconsistent);
    }

    SUBCASE("field wrapper matches the pointwise solve") {
        PhaseBundle b = punctured_bundle(1);
        std::vector<FormField> upsilon{scalar_multiply(Coeff::constant(-1.0), b.Theta[0])};
        auto field = liouville_fields(b, upsilon);
        LiouvilleResult r = liouville_fields_at(b, upsilon, as_span(z));
        CHECK((field->value(as_span(z)) - r.Z).norm() < 1e-14);
    }
}
