// Acceptance suite: one line per criterion, exit code = number of failures.

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "lcks/atlas.hpp"
#include "lcks/diagnostics.hpp"
#include "lcks/hj.hpp"
#include "lcks/problem.hpp"

using namespace lcks;

namespace {

struct Line {
    bool pass;
    std::string name;
    std::string detail;
};

std::vector<Line> results;

void record(bool pass, std::string name, std::string detail) {
    results.push_back({pass, std::move(name), std::move(detail)});
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

ProblemInstance plane(int k) { return compile_problem(builtin_problem("punctured-plane", k)); }
ProblemInstance polar(int k) { return compile_problem(builtin_problem("punctured-plane-polar", k)); }

// ---- 1. structure axioms --------------------------------------------------

void criterion_structure() {
    bool pass = true;
    double worst_i = 0.0, worst_iii = 0.0;
    int worst_kernel = 0;
    for (int k : {1, 2, 3}) {
        ProblemInstance p = plane(k);
        auto pts = sample_points(p.bundle.phase_sample_domain, 100, 42);
        StructureReport rep = verify_structure(p.bundle, pts, 1e-8);
        worst_i = std::max(worst_i, rep.max_axiom_i);
        worst_iii = std::max(worst_iii, rep.max_axiom_iii);
        worst_kernel = std::max(worst_kernel, rep.max_stacked_kernel_dim);
        pass = pass && rep.max_axiom_i < 1e-8 && rep.max_stacked_kernel_dim == 0 &&
               rep.max_axiom_iii < 1e-12 && rep.single_kernel_dims_ok &&
               rep.expected_single_kernel_dim == 2 * (k - 1);
    }
    record(pass, "1. structure axioms (k=1,2,3)",
           "axiom-i " + fmt(worst_i) + " < 1e-8, joint kernel " + std::to_string(worst_kernel) +
               " = 0, isotropy " + fmt(worst_iii) + " < 1e-12, single-form kernel n(k-1)");
}

// ---- 2. twisted-differential identities ------------------------------------

void criterion_ldr() {
    auto scope = testutil::corpus_scope();
    // an arbitrary, non-closed twist on the 4-dimensional corpus chart
    FormField t(4, 1);
    t.set({0}, Coeff::from_expr(parse("y", scope)));
    t.set({1}, Coeff::from_expr(parse("sin(x)", scope)));
    t.set({2}, Coeff::from_expr(parse("x*y/4", scope)));
    FormField dt = exterior_derivative(t);

    Rng rng(1234);
    double worst = 0.0;
    int forms = 0;
    std::vector<std::string> usable;
    for (const auto& src : testutil::corpus_expressions())
        if (src.find("abs") == std::string::npos) usable.push_back(src);
    auto check_form = [&](const FormField& f) {
        FormField lhs = lichnerowicz_derivative(lichnerowicz_derivative(f, t), t);
        FormField rhs = scalar_multiply(Coeff::constant(-1.0), wedge(dt, f));
        for (int i = 0; i < 5; ++i) {
            auto zv = testutil::corpus_sample(rng);
            Eigen::VectorXd z = Eigen::Map<Eigen::VectorXd>(zv.data(), 4);
            worst = std::max(worst, (lhs.at(as_span(z)) - rhs.at(as_span(z))).norm_inf());
        }
        ++forms;
    };
    for (const auto& src : usable) check_form(FormField::scalar(4, Coeff::from_expr(parse(src, scope))));
    for (std::size_t i = 0; i + 1 < usable.size(); i += 2) {  // degree-one corpus forms
        int a = static_cast<int>(i) % 4;
        FormField f(4, 1);
        f.set({a}, Coeff::from_expr(parse(usable[i], scope)));
        f.set({(a + 1) % 4}, Coeff::from_expr(parse(usable[i + 1], scope)));
        check_form(f);
    }

    // closed Lee form: the twisted square itself vanishes
    ProblemInstance p = plane(1);
    double worst_closed = 0.0;
    auto pts = sample_points(p.bundle.phase_sample_domain, 50, 4242);
    Coeff f = Coeff::from_expr(parse("q1*p_1_1 + cos(q2)*p_1_2", p.bundle.phase_scope));
    FormField dd = lichnerowicz_derivative(
        lichnerowicz_derivative(FormField::scalar(p.bundle.N, f), p.bundle.theta), p.bundle.theta);
    for (const auto& z : pts) worst_closed = std::max(worst_closed, dd.at(as_span(z)).norm_inf());

    record(forms >= 20 && worst < 1e-7 && worst_closed < 1e-8, "2. twisted-differential identities",
           std::to_string(forms) + " forms, square-vs-wedge " + fmt(worst) + " < 1e-7, closed twist " +
               fmt(worst_closed) + " < 1e-8");
}

// ---- 3. solver against the printed coefficient formulas --------------------

void criterion_hdw_formulas() {
    bool pass = true;
    double worst_base = 0.0, worst_trace = 0.0;
    for (int k : {1, 2, 3}) {
        ProblemInstance p = plane(k);
        auto pts = sample_points(p.bundle.phase_sample_domain, 100, 42);
        for (const auto& z : pts) {
            HdwSolution sol = solve_hdw(p.bundle, p.H, as_span(z), Gauge::MinNorm);
            double x = z(0), y = z(1), r2 = x * x + y * y;
            double sum_c = 0.0, sum_d = 0.0, want_c = 0.0, want_d = 0.0;
            for (int kappa = 0; kappa < k; ++kappa) {
                double px = z(2 + 2 * kappa), py = z(3 + 2 * kappa);
                worst_base = std::max({worst_base, std::abs(sol.X(0, kappa) - px),
                                       std::abs(sol.X(1, kappa) - py)});
                sum_c += sol.X(p.bundle.momentum_index(kappa, 0), kappa);
                sum_d += sol.X(p.bundle.momentum_index(kappa, 1), kappa);
                want_c += (y * (py * py - px * px) + 2.0 * x * px * py) / r2;
                want_d += (x * (py * py - px * px) - 2.0 * y * px * py) / r2;
            }
            double scale = std::max({1.0, std::abs(want_c), std::abs(want_d)});
            worst_trace = std::max({worst_trace, std::abs(sum_c - want_c) / scale,
                                    std::abs(sum_d - want_d) / scale});
        }
        Eigen::VectorXd z0 = pts.front();
        pass = pass && kernel_basis(p.bundle, as_span(z0)).cols() == 2 * (k * k - 1);
    }
    pass = pass && worst_base < 1e-9 && worst_trace < 1e-7;
    record(pass, "3. solver matches the coefficient formulas (k=1,2,3)",
           "base " + fmt(worst_base) + " < 1e-9, momentum traces " + fmt(worst_trace) +
               " < 1e-7, kernel 2(k^2-1)");
}

// ---- 4. conformal energy along the flow -------------------------------------

void criterion_energy() {
    ProblemInstance p = plane(1);
    auto X = hdw_field(p.bundle, p.H, Gauge::MinNorm);
    auto drift_at = [&](double h) {
        GridSpec spec{{static_cast<int>(std::lround(1.0 / h))}, {h}, {}};
        MultiTimeGrid g = integrate_section(*X, as_span(p.start), spec, p.bundle.phase_domain);
        return g.escape_index ? 1.0 : conformal_energy_drift(g, p.H);
    };
    double drift = drift_at(1e-3);
    double half = drift_at(5e-4);
    bool pass = drift < 1e-6 && drift / half >= 8.0;
    record(pass, "4. conformal energy law (k=1, T=1, h=1e-3)",
           "drift " + fmt(drift) + " < 1e-6, halving ratio " + fmt(drift / half) + " >= 8");
}

// ---- 5. exact section family ------------------------------------------------

void criterion_hj_positive() {
    bool pass = true;
    std::string detail;
    for (int k : {1, 2}) {
        ProblemInstance p = polar(k);
        auto X = hdw_field(p.bundle, p.H, Gauge::MinNorm);
        auto pts = sample_points(p.bundle.base_domain, 100, 42);
        Eigen::VectorXd base_start = p.start.head(2);
        HJReport rep = verify_hj_theorem(p.bundle, p.H, X, *p.section, as_span(base_start), p.grid, pts,
                                         1e-7, 1e-6);
        pass = pass && rep.closedness < 1e-7 && rep.hj < 1e-7 && rep.relatedness < 1e-7 &&
               rep.lift < 1e-6 && rep.verdict == "PASS";
        if (k == 2)
            detail = "closedness " + fmt(rep.closedness) + ", hj " + fmt(rep.hj) + ", relatedness " +
                     fmt(rep.relatedness) + " < 1e-7, lift " + fmt(rep.lift) + " < 1e-6";
    }
    record(pass, "5. exact sections verify all three conditions (k=1,2)", detail);
}

// ---- 6. negative control ------------------------------------------------------

void criterion_hj_negative() {
    ProblemInstance p = plane(1);
    auto X = hdw_field(p.bundle, p.H, Gauge::MinNorm);
    auto all = sample_points(p.bundle.base_domain, 400, 42);
    std::vector<Eigen::VectorXd> pts;  // away from the angular branch cut
    for (const auto& q : all) {
        if (SectorBounds{-2.0, 2.0, 0.1, 20.0}.contains(q(0), q(1))) pts.push_back(q);
        if (pts.size() == 100) break;
    }
    Eigen::Vector2d base_start(1.0, 0.0);
    HJReport rep =
        verify_hj_theorem(p.bundle, p.H, X, *p.section, as_span(base_start), p.grid, pts, 1e-7, 1e-6);
    bool pass = rep.closedness < 1e-8 && rep.hj > 1e-2 && rep.relatedness > 1e-3 && rep.lift > 1e-3 &&
                rep.verdict == "PASS";
    record(pass, "6. closed non-solution co-fails, verdict stays consistent",
           "closedness " + fmt(rep.closedness) + " < 1e-8, hj " + fmt(rep.hj) + " > 1e-2, relatedness " +
               fmt(rep.relatedness) + " / lift " + fmt(rep.lift) + " > 1e-3, verdict " + rep.verdict);
}

// ---- 7. glueing ----------------------------------------------------------------

void criterion_glueing() {
    ProblemInstance cart = plane(1);
    ProblemInstance pol = polar(1);
    auto pts = sample_points(pol.bundle.phase_sample_domain, 100, 42);

    Localization loc = localize(pol.bundle, pol.H, pol.atlas.patches[0], pts, 1e-8);
    CocycleReport coc = cocycle_defect(cart.atlas, cart.bundle.base_domain, 500, 42);
    double glue = glue_invariance(pol.bundle, pol.H, pol.atlas.patches[0], pts, Gauge::MinNorm);
    ChartMap lift = cotangent_lift(pol.atlas.patches[0].to_reference.value(), 1);
    double cross = cross_coordinate_match(pol.bundle, pol.H, cart.bundle, cart.H, lift, pts, Gauge::MinNorm);

    bool pass = loc.closedness_residual < 1e-8 && coc.cocycle_defect < 1e-12 && coc.triple_samples > 0 &&
                glue < 1e-8 && cross < 1e-7;
    record(pass, "7. glueing: local forms, cocycle, solution invariance",
           "d(omega_alpha) " + fmt(loc.closedness_residual) + " < 1e-8, cocycle " +
               fmt(coc.cocycle_defect) + " < 1e-12, glue " + fmt(glue) + " < 1e-8, cross-chart " +
               fmt(cross) + " < 1e-7");
}

// ---- 8. vanishing twist reduces to classical mechanics -------------------------

void criterion_regression() {
    ProblemInstance p = compile_problem(builtin_problem("darboux-free", 1));
    auto X = hdw_field(p.bundle, p.H, Gauge::MinNorm);
    GridSpec spec{{1000}, {1e-3}, {}};
    MultiTimeGrid g = integrate_section(*X, as_span(p.start), spec, p.bundle.phase_domain);
    double drift = energy_drift(g, p.H);
    double line = straight_line_defect(g);

    auto pts = sample_points(p.bundle.base_domain, 50, 42);
    HjResiduals hj = hj_residual(p.bundle, p.H, *p.section, pts);

    bool pass = !g.escape_index && drift <= 1e-9 && line <= 1e-9 && hj.residual <= 1e-12;
    record(pass, "8. zero twist: straight lines, conserved energy, d(H o gamma) = 0",
           "energy drift " + fmt(drift) + " <= 1e-9, line defect " + fmt(line) + ", d(H o gamma) " +
               fmt(hj.residual));
}

// ---- 9. expression layer ---------------------------------------------------------

void criterion_dsl() {
    auto scope = testutil::corpus_scope();
    int round_trips = 0;
    double worst = 0.0;
    Rng rng(2024);
    const double h = 1e-6;
    bool pass = true;
    for (const auto& src : testutil::corpus_expressions()) {
        Expression e = parse(src, scope);
        if (!structurally_equal(e, parse(to_string(e), scope))) pass = false;
        ++round_trips;
        for (int trial = 0; trial < 100; ++trial) {
            auto z = testutil::corpus_sample(rng);
            if (src.find("abs") != std::string::npos && std::abs(z[2]) < 1e-2) continue;
            std::vector<double> dir(4), zp = z, zm = z;
            for (int i = 0; i < 4; ++i) {
                dir[i] = rng.uniform(-1.0, 1.0);
                zp[i] += h * dir[i];
                zm[i] -= h * dir[i];
            }
            double fd = (evaluate(e, zp) - evaluate(e, zm)) / (2.0 * h);
            double dual = directional_derivative(e, z, dir).derivative;
            double rel = std::abs(dual - fd) / std::max(1.0, std::abs(fd));
            worst = std::max(worst, rel);
        }
    }
    pass = pass && round_trips >= 30 && worst < 1e-6;
    record(pass, "9. expression layer: round trips and derivative cross-check",
           std::to_string(round_trips) + " expressions round-trip, derivative vs finite differences " +
               fmt(worst) + " < 1e-6");
}

}  // namespace

int main() {
    struct Entry {
        const char* name;
        void (*fn)();
    };
    const Entry criteria[] = {
        {"1. structure axioms", criterion_structure},
        {"2. twisted-differential identities", criterion_ldr},
        {"3. solver vs formulas", criterion_hdw_formulas},
        {"4. conformal energy", criterion_energy},
        {"5. exact sections", criterion_hj_positive},
        {"6. negative control", criterion_hj_negative},
        {"7. glueing", criterion_glueing},
        {"8. zero-twist regression", criterion_regression},
        {"9. expression layer", criterion_dsl},
    };
    for (const auto& c : criteria) {
        try {
            c.fn();
        } catch (const std::exception& e) {
            record(false, c.name, std::string("exception: ") + e.what());
        }
    }

    int failures = 0;
    for (const auto& r : results) {
        std::printf("%s  %s  [%s]\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
        if (!r.pass) ++failures;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(results.size()) - failures, results.size());
    return failures;
}
