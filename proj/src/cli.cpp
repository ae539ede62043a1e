#include "lcks/cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "lcks/diagnostics.hpp"
#include "lcks/problem.hpp"

namespace lcks {

namespace {

struct CommonOpts {
    std::string problem_path;
    int points = 100;
    std::uint64_t seed = 0;  // 0: use the problem seed
    bool seed_set = false;
    double tol = 0.0;  // 0: use the problem tolerance
    std::string gauge;
    std::string grid_flag;
    std::string order_flag;
    std::string point_flag;
    std::string start_flag;
    std::string out_path;
    std::string format;  // reports default to json, trajectories to csv
};

std::vector<double> parse_csv_doubles(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stod(item));
    }
    return out;
}

void apply_overrides(ProblemInstance& inst, const CommonOpts& o) {
    if (o.seed_set) inst.file.seed = o.seed;
    if (o.tol > 0.0) inst.tolerance = o.tol;
    if (!o.gauge.empty()) {
        if (o.gauge == "min-norm")
            inst.gauge = Gauge::MinNorm;
        else if (o.gauge == "darboux")
            inst.gauge = Gauge::DarbouxDiagonal;
        else
            throw Error("unknown gauge '" + o.gauge + "' (expected min-norm or darboux)");
    }
    if (!o.grid_flag.empty()) {
        GridSpec g;
        std::stringstream ss(o.grid_flag);
        std::string axis;
        while (std::getline(ss, axis, ',')) {
            auto at = axis.find('@');
            if (at == std::string::npos) throw Error("grid format is steps@size[,steps@size...]");
            g.steps.push_back(std::stoi(axis.substr(0, at)));
            g.sizes.push_back(std::stod(axis.substr(at + 1)));
        }
        if (static_cast<int>(g.steps.size()) != inst.file.k)
            throw Error("grid needs one steps@size entry per axis");
        g.order = inst.grid.order;
        inst.grid = g;
    }
    if (!o.order_flag.empty()) {
        inst.grid.order.clear();
        for (double v : parse_csv_doubles(o.order_flag)) inst.grid.order.push_back(static_cast<int>(v) - 1);
    }
    if (!o.start_flag.empty()) {
        auto s = parse_csv_doubles(o.start_flag);
        if (static_cast<int>(s.size()) != inst.bundle.N) throw Error("start needs n + n*k coordinates");
        inst.start = Eigen::Map<const Eigen::VectorXd>(s.data(), s.size());
    }
}

void emit(const Json& j, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        std::ofstream f(out_path);
        if (!f) throw Error("cannot write '" + out_path + "'");
        f << j.dump(2) << "\n";
    }
}

Json vec_to_json(const Eigen::VectorXd& v) {
    Json a = Json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

// --- subcommands ---

int cmd_check_structure(ProblemInstance& inst, const CommonOpts& o) {
    double tol = inst.tolerance;
    auto pts = sample_points(inst.bundle.phase_sample_domain, o.points, inst.file.seed);
    StructureReport rep = verify_structure(inst.bundle, pts, tol);

    Json j;
    j["problem"] = inst.file.name;
    j["seed"] = inst.file.seed;
    j["points"] = o.points;
    j["tolerance"] = tol;
    j["axiom_i_max_residual"] = rep.max_axiom_i;
    j["axiom_ii_max_kernel_dim"] = rep.max_stacked_kernel_dim;
    j["axiom_iii_max_value"] = rep.max_axiom_iii;
    j["single_form_kernel_dim_expected"] = rep.expected_single_kernel_dim;
    j["single_form_kernel_dims_ok"] = rep.single_kernel_dims_ok;
    j["darboux_pattern_mismatch"] = rep.darboux_pattern_mismatch;
    j["pass"] = rep.all_pass();
    emit(j, o.out_path);
    return rep.all_pass() ? 0 : 1;
}

int cmd_hdw(ProblemInstance& inst, const CommonOpts& o) {
    std::vector<Eigen::VectorXd> pts;
    if (!o.point_flag.empty()) {
        auto p = parse_csv_doubles(o.point_flag);
        if (static_cast<int>(p.size()) != inst.bundle.N)
            throw Error("point needs n + n*k coordinates");
        pts.push_back(Eigen::Map<const Eigen::VectorXd>(p.data(), p.size()));
    } else {
        pts = sample_points(inst.bundle.phase_sample_domain, o.points, inst.file.seed);
    }

    Json rows = Json::array();
    bool ok = true;
    for (const auto& z : pts) {
        Json row;
        row["point"] = vec_to_json(z);
        try {
            HdwSolution sol = solve_hdw(inst.bundle, inst.H, as_span(z), inst.gauge,
                                        std::max(inst.tolerance, 1e-9));
            Json X = Json::array();
            for (int kappa = 0; kappa < inst.bundle.k; ++kappa) X.push_back(vec_to_json(sol.X.col(kappa)));
            row["X"] = std::move(X);
            row["residual"] = sol.residual;
            row["kernel_dim"] = static_cast<int>(kernel_basis(inst.bundle, as_span(z)).cols());
        } catch (const OutOfRange& e) {
            row["error"] = e.what();
            ok = false;
        }
        rows.push_back(std::move(row));
    }
    Json j;
    j["problem"] = inst.file.name;
    j["gauge"] = inst.gauge == Gauge::MinNorm ? "min-norm" : "darboux";
    j["solutions"] = std::move(rows);
    emit(j, o.out_path);
    return ok ? 0 : 1;
}

int cmd_integrate(ProblemInstance& inst, const CommonOpts& o) {
    auto X = hdw_field(inst.bundle, inst.H, inst.gauge);
    MultiTimeGrid g = integrate_section(*X, as_span(inst.start), inst.grid, inst.bundle.phase_domain);

    auto write_grid = [&](std::ostream& out) {
        if (o.format == "json") {
            Json rows = Json::array();
            std::vector<int> idx(g.k, 0);
            for (std::size_t f = 0; f < g.values.size(); ++f) {
                if (g.values[f].size() != 0) {
                    Json row;
                    row["t"] = g.time_of(idx);
                    row["z"] = vec_to_json(g.values[f]);
                    rows.push_back(std::move(row));
                }
                for (int a = g.k - 1; a >= 0; --a) {
                    if (++idx[a] < g.shape[a]) break;
                    idx[a] = 0;
                }
            }
            Json j;
            j["columns"] = inst.bundle.phase_scope->names();
            j["samples"] = std::move(rows);
            out << j.dump(2) << "\n";
        } else {
            write_grid_csv(g, inst.bundle.phase_scope->names(), out);
        }
    };
    if (o.out_path.empty()) {
        write_grid(std::cout);
    } else {
        std::ofstream f(o.out_path);
        if (!f) throw Error("cannot write '" + o.out_path + "'");
        write_grid(f);
    }

    Json j;
    j["problem"] = inst.file.name;
    j["shape"] = g.shape;
    j["hdw_residual"] = grid_hdw_residual(g, *X);
    if (inst.bundle.k > 1)
        j["path_independence_defect"] =
            path_independence_defect(*X, as_span(inst.start), inst.grid, inst.bundle.phase_domain);
    if (g.escape_index) j["escape_index"] = *g.escape_index;
    std::cerr << j.dump(2) << "\n";
    return 0;
}

Json hj_report_json(const HJReport& rep) {
    Json j;
    j["closedness"] = rep.closedness;
    j["hj"] = rep.hj;
    j["hj_cross_check"] = rep.hj_cross_check;
    j["relatedness"] = rep.relatedness;
    j["verticality"] = rep.verticality;
    j["lift"] = rep.lift;
    j["lift_measured_points"] = rep.lift_measured_points;
    j["lift_grid_escaped"] = rep.lift_grid_escaped;
    j["solver_residual"] = rep.solver_residual;
    j["integrability"] = rep.integrability;
    j["hj_pass"] = rep.hj_pass;
    j["relatedness_pass"] = rep.relatedness_pass;
    j["lift_pass"] = rep.lift_pass;
    j["verdict"] = rep.verdict;
    return j;
}

int cmd_hj_verify(ProblemInstance& inst, const CommonOpts& o) {
    if (!inst.section) throw Error("problem file has no sections");
    auto X = hdw_field(inst.bundle, inst.H, inst.gauge);
    auto base_pts = sample_points(inst.bundle.base_domain, o.points, inst.file.seed);
    double tol_alg = inst.tolerance;
    double tol_int = std::max(inst.tolerance, 1e-6);
    Eigen::VectorXd base_start = inst.start.head(inst.bundle.n);

    HJReport rep = verify_hj_theorem(inst.bundle, inst.H, X, *inst.section, as_span(base_start), inst.grid,
                                     base_pts, tol_alg, tol_int);
    Json j = hj_report_json(rep);
    j["problem"] = inst.file.name;
    j["seed"] = inst.file.seed;
    j["points"] = o.points;
    emit(j, o.out_path);
    return rep.verdict == "PASS" ? 0 : 1;
}

int cmd_atlas_check(ProblemInstance& inst, const CommonOpts& o) {
    Json j;
    j["problem"] = inst.file.name;
    j["seed"] = inst.file.seed;
    j["points"] = o.points;
    bool ok = true;

    if (!inst.atlas.patches.empty()) {
        CocycleReport coc = cocycle_defect(inst.atlas, inst.bundle.base_domain, 500, inst.file.seed);
        j["cocycle_defect"] = coc.cocycle_defect;
        j["transition_constancy_defect"] = coc.constancy_defect;
        j["triple_overlap_samples"] = coc.triple_samples;
        j["base_samples_covered"] = coc.covered_samples;
        j["base_samples_total"] = coc.total_samples;
        ok = ok && coc.cocycle_defect < 1e-12 && coc.constancy_defect < 1e-10 &&
             coc.covered_samples == coc.total_samples;
    }

    auto pts = sample_points(inst.bundle.phase_sample_domain, o.points, inst.file.seed);
    Json patches = Json::array();
    for (const auto& patch : inst.atlas.patches) {
        std::vector<Eigen::VectorXd> inside;
        for (const auto& z : pts) {
            Eigen::VectorXd q = z.head(inst.bundle.n);
            if (patch.contains_base_point(as_span(q))) inside.push_back(z);
        }
        Json pj;
        pj["name"] = patch.name;
        pj["points"] = static_cast<int>(inside.size());
        if (inside.empty()) {
            patches.push_back(std::move(pj));
            continue;
        }
        try {
            Localization loc = localize(inst.bundle, inst.H, patch, inside, inst.tolerance);
            pj["localized_closedness_residual"] = loc.closedness_residual;
            double glue = glue_invariance(inst.bundle, inst.H, patch, inside, inst.gauge, inst.tolerance);
            pj["glue_discrepancy"] = glue;
            bool patch_ok = loc.closedness_residual < inst.tolerance && glue < inst.tolerance;
            pj["pass"] = patch_ok;
            ok = ok && patch_ok;
        } catch (const NotExactOnPatch& e) {
            pj["error"] = e.what();
            ok = false;
        }
        patches.push_back(std::move(pj));
    }
    j["patches"] = std::move(patches);

    // overlap diagnostic: the localized Hamiltonians must glue back to the
    // same global function, e^{sigma_a} H_a = e^{sigma_b} H_b
    double h_glue = 0.0;
    int overlap_points = 0;
    for (std::size_t a = 0; a < inst.atlas.patches.size(); ++a) {
        for (std::size_t c = a + 1; c < inst.atlas.patches.size(); ++c) {
            const auto& pa = inst.atlas.patches[a];
            const auto& pc = inst.atlas.patches[c];
            Coeff sa = inst.bundle.promote(pa.sigma);
            Coeff sc = inst.bundle.promote(pc.sigma);
            Coeff ha = coeff_neg_exp(sa) * inst.H;
            Coeff hc = coeff_neg_exp(sc) * inst.H;
            for (const auto& z : pts) {
                Eigen::VectorXd q = z.head(inst.bundle.n);
                if (!pa.contains_base_point(as_span(q)) || !pc.contains_base_point(as_span(q))) continue;
                ++overlap_points;
                double va = std::exp(sa.at(as_span(z))) * ha(as_span(z));
                double vc = std::exp(sc.at(as_span(z))) * hc(as_span(z));
                h_glue = std::max(h_glue, std::abs(va - vc) / std::max(1.0, std::abs(va)));
            }
        }
    }
    if (overlap_points > 0) {
        j["hamiltonian_glue_defect"] = h_glue;
        j["overlap_points"] = overlap_points;
    }

    j["pass"] = ok;
    emit(j, o.out_path);
    return ok ? 0 : 1;
}

// --- demo ---

struct DemoRow {
    std::string name;
    bool pass;
    std::string detail;
};

void demo_print(const std::vector<DemoRow>& rows) {
    std::size_t width = 0;
    for (const auto& r : rows) width = std::max(width, r.name.size());
    for (const auto& r : rows) {
        std::printf("%s  %-*s  %s\n", r.pass ? "PASS" : "FAIL", static_cast<int>(width), r.name.c_str(),
                    r.detail.c_str());
    }
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

int cmd_demo(const std::string& name, int k, std::uint64_t seed) {
    if (name != "punctured-plane")
        throw Error("unknown demo '" + name + "' (available: punctured-plane)");

    ProblemInstance cart = compile_problem(builtin_problem("punctured-plane", k));
    ProblemInstance polar = compile_problem(builtin_problem("punctured-plane-polar", k));
    if (seed != 0) {
        cart.file.seed = seed;
        polar.file.seed = seed;
    }

    std::vector<DemoRow> rows;

    {  // structure axioms on the reference chart
        auto pts = sample_points(cart.bundle.phase_sample_domain, 100, cart.file.seed);
        StructureReport rep = verify_structure(cart.bundle, pts, 1e-8);
        rows.push_back({"structure-axioms", rep.all_pass(),
                        "axiom residuals " + fmt(rep.max_axiom_i) + " / kernel " +
                            std::to_string(rep.max_stacked_kernel_dim) + " / isotropy " +
                            fmt(rep.max_axiom_iii)});
    }

    {  // kernel dimension of the flat map
        auto pts = sample_points(cart.bundle.phase_sample_domain, 20, cart.file.seed + 1);
        int expected = cart.bundle.n * (k * k - 1);
        bool ok = true;
        for (const auto& z : pts)
            if (kernel_basis(cart.bundle, as_span(z)).cols() != expected) ok = false;
        rows.push_back({"flat-kernel-dimension", ok, "n(k^2-1) = " + std::to_string(expected)});
    }

    {  // both gauges solve, and agree on the base components
        auto pts = sample_points(cart.bundle.phase_sample_domain, 50, cart.file.seed + 2);
        double resid = 0.0, base_diff = 0.0;
        for (const auto& z : pts) {
            HdwSolution a = solve_hdw(cart.bundle, cart.H, as_span(z), Gauge::MinNorm);
            HdwSolution b = solve_hdw(cart.bundle, cart.H, as_span(z), Gauge::DarbouxDiagonal);
            resid = std::max(resid, std::max(a.residual, b.residual));
            base_diff = std::max(base_diff,
                                 (a.X.topRows(cart.bundle.n) - b.X.topRows(cart.bundle.n))
                                     .lpNorm<Eigen::Infinity>());
        }
        rows.push_back({"hdw-gauges", resid < 1e-9 && base_diff < 1e-9,
                        "residual " + fmt(resid) + ", base components agree to " + fmt(base_diff)});
    }

    if (k == 1) {  // conformal energy along the flow
        auto X = hdw_field(cart.bundle, cart.H, cart.gauge);
        MultiTimeGrid g = integrate_section(*X, as_span(cart.start), cart.grid, cart.bundle.phase_domain);
        double drift = conformal_energy_drift(g, cart.H);
        rows.push_back({"conformal-energy", drift < 1e-6 && !g.escape_index, "drift " + fmt(drift)});
    }

    if (k <= 2) {  // exact section family solves the Hamilton-Jacobi conditions
        auto X = hdw_field(polar.bundle, polar.H, polar.gauge);
        auto base_pts = sample_points(polar.bundle.base_domain, 50, polar.file.seed);
        Eigen::VectorXd base_start = polar.start.head(polar.bundle.n);
        HJReport rep = verify_hj_theorem(polar.bundle, polar.H, X, *polar.section, as_span(base_start),
                                         polar.grid, base_pts, 1e-7, 1e-6);
        rows.push_back({"hj-positive", rep.verdict == "PASS" && rep.hj_pass,
                        "hj " + fmt(rep.hj) + ", relatedness " + fmt(rep.relatedness) + ", lift " +
                            fmt(rep.lift) + ", verdict " + rep.verdict});
    }

    if (k == 1) {  // closed section that fails the conditions, coherently
        auto X = hdw_field(cart.bundle, cart.H, cart.gauge);
        // sample away from the angular branch cut
        Domain restricted = cart.bundle.base_domain;
        auto base_pts_all = sample_points(restricted, 200, cart.file.seed + 3);
        std::vector<Eigen::VectorXd> base_pts;
        for (const auto& q : base_pts_all) {
            if (SectorBounds{-2.0, 2.0, 0.1, 20.0}.contains(q(0), q(1))) base_pts.push_back(q);
            if (base_pts.size() == 50) break;
        }
        Eigen::VectorXd base_start(2);
        base_start << 1.0, 0.0;
        HJReport rep = verify_hj_theorem(cart.bundle, cart.H, X, *cart.section, as_span(base_start),
                                         cart.grid, base_pts, 1e-7, 1e-6);
        bool ok = rep.verdict == "PASS" && !rep.hj_pass && rep.hj > 1e-2 && rep.relatedness > 1e-3 &&
                  rep.lift > 1e-3;
        rows.push_back({"hj-negative-control", ok,
                        "hj " + fmt(rep.hj) + ", relatedness " + fmt(rep.relatedness) + ", lift " +
                            fmt(rep.lift) + ", verdict " + rep.verdict});
    }

    {  // atlas: cocycle on the angular cover, localization on the polar chart
        CocycleReport coc = cocycle_defect(cart.atlas, cart.bundle.base_domain, 500, cart.file.seed);
        rows.push_back({"atlas-cocycle", coc.cocycle_defect < 1e-12 && coc.constancy_defect < 1e-10,
                        "defect " + fmt(coc.cocycle_defect) + " over " +
                            std::to_string(coc.triple_samples) + " triple samples"});

        auto pts = sample_points(polar.bundle.phase_sample_domain, 100, polar.file.seed);
        Localization loc = localize(polar.bundle, polar.H, polar.atlas.patches[0], pts, 1e-8);
        double glue = glue_invariance(polar.bundle, polar.H, polar.atlas.patches[0], pts, Gauge::MinNorm);
        rows.push_back({"atlas-localize-glue", loc.closedness_residual < 1e-8 && glue < 1e-8,
                        "d(omega_alpha) " + fmt(loc.closedness_residual) + ", glue " + fmt(glue)});

        if (k == 1) {
            ChartMap lift = cotangent_lift(polar.atlas.patches[0].to_reference.value(), k);
            double cross = cross_coordinate_match(polar.bundle, polar.H, cart.bundle, cart.H, lift, pts,
                                                  Gauge::MinNorm);
            rows.push_back({"cross-coordinate", cross < 1e-7, "solution match " + fmt(cross)});
        }
    }

    if (k == 1) {  // vanishing Lee form reduces to classical mechanics
        ProblemInstance flat = compile_problem(builtin_problem("darboux-free", 1));
        auto X = hdw_field(flat.bundle, flat.H, Gauge::MinNorm);
        MultiTimeGrid g = integrate_section(*X, as_span(flat.start), flat.grid, flat.bundle.phase_domain);
        double drift = energy_drift(g, flat.H);
        double line = straight_line_defect(g);
        auto base_pts = sample_points(flat.bundle.base_domain, 50, flat.file.seed);
        HjResiduals hj = hj_residual(flat.bundle, flat.H, *flat.section, base_pts);
        bool ok = drift <= 1e-9 && line <= 1e-9 && hj.residual <= 1e-12;
        rows.push_back({"flat-regression", ok,
                        "energy drift " + fmt(drift) + ", line defect " + fmt(line) + ", d(H.gamma) " +
                            fmt(hj.residual)});
    }

    demo_print(rows);
    for (const auto& r : rows)
        if (!r.pass) return 1;
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"locally conformal multi-symplectic field dynamics toolkit"};
    app.require_subcommand(1);

    CommonOpts o;
    std::string demo_name;
    int demo_k = 1;

    auto add_common = [&](CLI::App* sub, bool needs_problem) {
        if (needs_problem) sub->add_option("--problem", o.problem_path, "problem file (JSON)")->required();
        sub->add_option("--points", o.points, "number of sample points");
        sub->add_option("--seed", o.seed, "sample seed")->each([&](const std::string&) { o.seed_set = true; });
        sub->add_option("--tol", o.tol, "tolerance override");
        sub->add_option("--gauge", o.gauge, "min-norm | darboux");
        sub->add_option("--out", o.out_path, "output path (default stdout)");
        sub->add_option("--format", o.format, "json | csv");
    };

    CLI::App* structure = app.add_subcommand("check-structure", "verify the structure axioms");
    add_common(structure, true);

    CLI::App* hdw = app.add_subcommand("hdw", "solve the field equation at points");
    add_common(hdw, true);
    hdw->add_option("--point", o.point_flag, "phase point as comma-separated values");

    CLI::App* integrate = app.add_subcommand("integrate", "integrate a multi-time section to CSV");
    add_common(integrate, true);
    integrate->add_option("--grid", o.grid_flag, "steps@size[,steps@size...] per axis");
    integrate->add_option("--order", o.order_flag, "axis sweep order, 1-based");
    integrate->add_option("--start", o.start_flag, "start point as comma-separated values");

    CLI::App* hj = app.add_subcommand("hj-verify", "check the section conditions");
    add_common(hj, true);
    hj->add_option("--grid", o.grid_flag, "steps@size[,steps@size...] per axis");
    hj->add_option("--order", o.order_flag, "axis sweep order, 1-based");
    hj->add_option("--start", o.start_flag, "start point as comma-separated values");

    CLI::App* atlas = app.add_subcommand("atlas-check", "cocycle, localization and glueing checks");
    add_common(atlas, true);

    CLI::App* demo = app.add_subcommand("demo", "run the built-in example pipeline");
    demo->add_option("name", demo_name, "built-in problem name")->required();
    demo->add_option("--k", demo_k, "multiplicity");
    demo->add_option("--seed", o.seed, "sample seed")->each([&](const std::string&) { o.seed_set = true; });

    std::vector<const char*> argv;
    argv.push_back("lckstool");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (demo->parsed()) {
            if (demo_name != "punctured-plane" || demo_k < 1) {
                std::cerr << "input error: unknown demo '" << demo_name << "' (available: punctured-plane)\n";
                return 2;
            }
            return cmd_demo(demo_name, demo_k, o.seed_set ? o.seed : 0);
        }

        ProblemInstance inst;
        try {
            ProblemFile file = load_problem(o.problem_path);
            inst = compile_problem(file);
            apply_overrides(inst, o);
        } catch (const std::exception& e) {
            std::cerr << "input error: " << e.what() << "\n";
            return 2;
        }

        if (structure->parsed()) return cmd_check_structure(inst, o);
        if (hdw->parsed()) return cmd_hdw(inst, o);
        if (integrate->parsed()) return cmd_integrate(inst, o);
        if (hj->parsed()) return cmd_hj_verify(inst, o);
        if (atlas->parsed()) return cmd_atlas_check(inst, o);
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace lcks
