#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "lcks/atlas.hpp"
#include "lcks/problem.hpp"

using namespace lcks;

namespace {

constexpr double kPi = 3.14159265358979323846264338328;

ProblemInstance plane(int k) { return compile_problem(builtin_problem("punctured-plane", k)); }
ProblemInstance polar(int k) { return compile_problem(builtin_problem("punctured-plane-polar", k)); }

}  // namespace

TEST_CASE("sector membership handles branch wrap-around") {
    SectorBounds east{-0.75 * kPi, 0.75 * kPi, 0.1, 20.0};
    SectorBounds north{0.25 * kPi, 1.75 * kPi, 0.1, 20.0};
    CHECK(east.contains(1.0, 0.0));
    CHECK(east.contains(0.0, 1.0));
    CHECK_FALSE(east.contains(-1.0, 0.0));
    CHECK_FALSE(east.contains(0.05, 0.0));  // inside the excluded radius
    CHECK(north.contains(-1.0, 0.0));       // phi = pi
    CHECK(north.contains(0.0, -1.0));       // phi = -pi/2 == 3pi/2
    CHECK_FALSE(north.contains(1.0, 0.0));
    CHECK(north.contains(1.0, 1.0));        // phi = pi/4 boundary-inclusive region interior
}

TEST_CASE("cocycle of the angular cover") {
    ProblemInstance p = plane(1);

    SUBCASE("three-patch atlas composes exactly") {
        CocycleReport rep = cocycle_defect(p.atlas, p.bundle.base_domain, 500, 42);
        CHECK(rep.triple_samples > 0);
        CHECK(rep.cocycle_defect < 1e-12);
        CHECK(rep.constancy_defect < 1e-10);
    }

    SUBCASE("single-chart atlas is vacuously consistent") {
        Atlas one;
        one.patches.push_back(p.atlas.patches[0]);
        CocycleReport rep = cocycle_defect(one, p.bundle.base_domain, 200, 7);
        CHECK(rep.cocycle_defect == 0.0);
        CHECK(rep.triple_samples == 0);
    }

    SUBCASE("three patches with no common point raise EmptyOverlap") {
        Atlas disjoint;
        for (int i = 0; i < 3; ++i) {
            ChartPatch patch;
            patch.name = "slice" + std::to_string(i);
            double lo = -kPi + i * (2.0 * kPi / 3.0);
            patch.sector = SectorBounds{lo, lo + 0.6, 0.1, 20.0};
            patch.sigma = Coeff::branch_angle(0, 1, lo, lo + 0.6, 2.0);
            disjoint.patches.push_back(std::move(patch));
        }
        CHECK_THROWS_AS(cocycle_defect(disjoint, p.bundle.base_domain, 300, 11), EmptyOverlap);
    }

    SUBCASE("identity and inverse transitions are exact in log space") {
        auto pts = sample_points(p.bundle.base_domain, 200, 3);
        for (const auto& q : pts) {
            for (const auto& a : p.atlas.patches) {
                if (!a.contains_base_point(as_span(q))) continue;
                double sa = a.sigma.at(as_span(q));
                CHECK(std::exp(sa - sa) == 1.0);
                for (const auto& b : p.atlas.patches) {
                    if (&a == &b || !b.contains_base_point(as_span(q))) continue;
                    double sb = b.sigma.at(as_span(q));
                    CHECK((sa - sb) + (sb - sa) == 0.0);  // negation symmetry of rounding
                }
            }
        }
    }

    SUBCASE("a non-constant perturbation of one factor breaks local constancy") {
        Atlas corrupted = p.atlas;
        auto scope = make_scope(base_coordinate_names(2));
        corrupted.patches[1].sigma =
            corrupted.patches[1].sigma + Coeff::from_expr(parse("0.1*sqrt(q1^2+q2^2)", scope));
        CocycleReport rep = cocycle_defect(corrupted, p.bundle.base_domain, 500, 42);
        CHECK(rep.constancy_defect > 1e-3);
        // the pointwise triple product still telescopes by construction
        CHECK(rep.cocycle_defect < 1e-9);
    }
}

TEST_CASE("patch exactness") {
    ProblemInstance p = plane(1);
    auto base_pts = sample_points(p.bundle.base_domain, 100, 42);

    SUBCASE("angular factors match the Lee form on their sectors") {
        for (const auto& patch : p.atlas.patches)
            CHECK(patch_exactness(p.bundle.vartheta, patch, base_pts) < 1e-12);
    }

    SUBCASE("sigma = 0 fails on a twisted chart") {
        ChartPatch flat;
        flat.name = "bad";
        flat.sector = SectorBounds{-0.75 * kPi, 0.75 * kPi, 0.1, 20.0};
        flat.sigma = Coeff::zero();
        CHECK(patch_exactness(p.bundle.vartheta, flat, base_pts) > 1e-1);
        auto pts = sample_points(p.bundle.phase_sample_domain, 20, 4);
        CHECK_THROWS_AS(localize(p.bundle, p.H, flat, pts, 1e-8), NotExactOnPatch);
    }
}

TEST_CASE("localization on the polar chart") {
    ProblemInstance p = polar(1);
    const ChartPatch& patch = p.atlas.patches[0];
    auto pts = sample_points(p.bundle.phase_sample_domain, 100, 42);
    Localization loc = localize(p.bundle, p.H, patch, pts, 1e-8);

    SUBCASE("rescaled two-forms are closed") { CHECK(loc.closedness_residual < 1e-8); }

    SUBCASE("coefficients match the printed local forms") {
        // e^{-2 phi} (dr ^ dp_r + dphi ^ dp_phi - 2 p_r dr ^ dphi)
        Rng rng(3);
        for (int i = 0; i < 20; ++i) {
            Eigen::VectorXd z = sample_point(p.bundle.phase_sample_domain, rng);
            double r = z(0), phi = z(1), pr = z(2);
            double f = std::exp(-2.0 * phi);
            CHECK(loc.omega_alpha[0].get({0, 2}).at(as_span(z)) == doctest::Approx(f).epsilon(1e-12));
            CHECK(loc.omega_alpha[0].get({1, 3}).at(as_span(z)) == doctest::Approx(f).epsilon(1e-12));
            CHECK(loc.omega_alpha[0].get({0, 1}).at(as_span(z)) ==
                  doctest::Approx(-2.0 * pr * f).epsilon(1e-12));
            // H_alpha = e^{-2 phi} (p_r^2 + p_phi^2 / r^2) / 2
            double want = f * (pr * pr + z(3) * z(3) / (r * r)) / 2.0;
            CHECK(loc.H_alpha(as_span(z)) == doctest::Approx(want).epsilon(1e-12));
        }
    }

    SUBCASE("localization inverts: e^{sigma} omega_alpha recovers the global forms") {
        Coeff sigma_phase = p.bundle.promote(patch.sigma);
        FormField back = scalar_multiply(coeff_exp(sigma_phase), loc.omega_alpha[0]);
        for (int i = 0; i < 20; ++i) {
            const auto& z = pts[i];
            PointForm orig = p.bundle.OmegaTheta[0].at(as_span(z));
            CHECK((back.at(as_span(z)) - orig).norm_inf() <= 1e-12 * std::max(1.0, orig.norm_inf()));
        }
    }

    SUBCASE("identity localization on an untwisted chart") {
        ProblemInstance flat = compile_problem(builtin_problem("darboux-free", 1));
        ChartPatch whole;
        whole.name = "all";
        whole.sigma = Coeff::zero();
        auto fpts = sample_points(flat.bundle.phase_sample_domain, 20, 5);
        Localization l = localize(flat.bundle, flat.H, whole, fpts, 1e-10);
        CHECK(l.closedness_residual == 0.0);
        for (const auto& z : fpts)
            CHECK((l.omega_alpha[0].at(as_span(z)) - flat.bundle.OmegaTheta[0].at(as_span(z))).norm_inf() ==
                  0.0);
    }
}

TEST_CASE("glueing leaves the dynamics invariant") {
    SUBCASE("polar chart, 100 points") {
        for (int k : {1, 2}) {
            CAPTURE(k);
            ProblemInstance p = polar(k);
            auto pts = sample_points(p.bundle.phase_sample_domain, 100, 42);
            CHECK(glue_invariance(p.bundle, p.H, p.atlas.patches[0], pts, Gauge::MinNorm) < 1e-8);
        }
    }

    SUBCASE("constant sigma is a pure rescale") {
        ProblemInstance flat = compile_problem(builtin_problem("darboux-free", 1));
        ChartPatch whole;
        whole.name = "all";
        whole.sigma = Coeff::constant(0.37);  // d sigma = 0 = vartheta
        auto pts = sample_points(flat.bundle.phase_sample_domain, 50, 9);
        CHECK(glue_invariance(flat.bundle, flat.H, whole, pts, Gauge::MinNorm) < 1e-13);
    }

    SUBCASE("local Hamiltonians glue back to the global one on overlaps") {
        ProblemInstance p = plane(1);
        auto pts = sample_points(p.bundle.phase_sample_domain, 200, 42);
        Localization le = localize(p.bundle, p.H, p.atlas.patches[0], {}, 1e-8);
        Localization ln = localize(p.bundle, p.H, p.atlas.patches[1], {}, 1e-8);
        Coeff se = p.bundle.promote(p.atlas.patches[0].sigma);
        Coeff sn = p.bundle.promote(p.atlas.patches[1].sigma);
        int used = 0;
        for (const auto& z : pts) {
            Eigen::Vector2d q(z(0), z(1));
            if (!p.atlas.patches[0].contains_base_point(as_span(q)) ||
                !p.atlas.patches[1].contains_base_point(as_span(q)))
                continue;
            ++used;
            double he = std::exp(se(as_span(z))) * le.H_alpha(as_span(z));
            double hn = std::exp(sn(as_span(z))) * ln.H_alpha(as_span(z));
            CHECK(std::abs(he - hn) <= 1e-9 * std::max(1.0, std::abs(he)));
        }
        CHECK(used > 10);
    }
}

TEST_CASE("cotangent lift and cross-coordinate consistency") {
    ProblemInstance pol = polar(1);
    ProblemInstance cart = plane(1);
    ChartMap lift = cotangent_lift(pol.atlas.patches[0].to_reference.value(), 1);

    SUBCASE("lift maps the reference section point correctly") {
        // (r, phi, p_r, p_phi) = (2, pi/2, 3, 4) -> x = 0, y = 2,
        // p_x = cos(phi) p_r - sin(phi)/r p_phi = -2, p_y = sin(phi) p_r = 3
        Eigen::VectorXd z(4);
        z << 2.0, 0.5 * kPi, 3.0, 4.0;
        Eigen::VectorXd w = lift(as_span(z));
        CHECK(w(0) == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(w(1) == doctest::Approx(2.0).epsilon(1e-14));
        CHECK(w(2) == doctest::Approx(-2.0).epsilon(1e-13));
        CHECK(w(3) == doctest::Approx(3.0).epsilon(1e-13));
    }

    SUBCASE("momenta transform covariantly: p dq is invariant") {
        Rng rng(13);
        for (int i = 0; i < 20; ++i) {
            Eigen::VectorXd z(4);
            z << rng.uniform(0.5, 2.5), rng.uniform(-1.5, 1.5), rng.uniform(-2, 2), rng.uniform(-2, 2);
            Eigen::VectorXd w = lift(as_span(z));
            Eigen::MatrixXd Jbase = pol.atlas.patches[0].to_reference->jacobian(as_span(z.head(2)));
            // p_cart . (Jbase v) == p_polar . v for the coordinate basis v
            Eigen::Vector2d p_cart(w(2), w(3)), p_pol(z(2), z(3));
            Eigen::Vector2d pulled = Jbase.transpose() * p_cart;
            CHECK((pulled - p_pol).lpNorm<Eigen::Infinity>() < 1e-12);
        }
    }

    SUBCASE("solutions map through the phase-space jacobian") {
        auto pts = sample_points(pol.bundle.phase_sample_domain, 100, 42);
        CHECK(cross_coordinate_match(pol.bundle, pol.H, cart.bundle, cart.H, lift, pts, Gauge::MinNorm) <
              1e-7);
    }

    SUBCASE("base dimension above three is rejected") {
        std::vector<Coeff> comps;
        for (int i = 0; i < 4; ++i) comps.push_back(Coeff::coordinate(i));
        ChartMap big(4, 4, comps);
        CHECK_THROWS_AS(cotangent_lift(big, 1), Error);
    }
}
