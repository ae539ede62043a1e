#include "lcks/problem.hpp"

#include <cmath>
#include <fstream>

namespace lcks {

namespace {

constexpr double kPi = 3.14159265358979323846264338328;

Json sector_to_json(const SectorSpec& s) {
    Json j;
    j["phi_lo"] = s.phi_lo;
    j["phi_hi"] = s.phi_hi;
    j["r_lo"] = s.r_lo;
    if (std::isfinite(s.r_hi)) j["r_hi"] = s.r_hi;
    return j;
}

SectorSpec sector_from_json(const Json& j) {
    SectorSpec s;
    s.phi_lo = j.at("phi_lo").get<double>();
    s.phi_hi = j.at("phi_hi").get<double>();
    s.r_lo = j.value("r_lo", 0.0);
    s.r_hi = j.value("r_hi", std::numeric_limits<double>::infinity());
    return s;
}

}  // namespace

Json problem_to_json(const ProblemFile& p) {
    Json j;
    j["name"] = p.name;
    j["n"] = p.n;
    j["k"] = p.k;
    j["seed"] = p.seed;
    j["domain"] = Json{{"lo", p.lo}, {"hi", p.hi}};
    if (p.exclude_origin_radius > 0.0) j["domain"]["exclude_origin_radius"] = p.exclude_origin_radius;
    j["momentum_radius"] = p.momentum_radius;
    j["vartheta"] = p.vartheta;
    j["hamiltonian"] = p.hamiltonian;
    if (!p.sections.empty()) j["sections"] = p.sections;
    if (!p.atlas.empty()) {
        Json patches = Json::array();
        for (const auto& a : p.atlas) {
            Json pj;
            pj["name"] = a.name;
            if (a.sector) pj["sector"] = sector_to_json(*a.sector);
            if (a.box) pj["box"] = Json{{"lo", a.box->first}, {"hi", a.box->second}};
            if (!a.sigma_expr.empty()) pj["sigma"] = a.sigma_expr;
            if (a.sigma_angle_factor != 0.0) pj["sigma_angle_factor"] = a.sigma_angle_factor;
            if (!a.coord_map.empty()) pj["coord_map"] = a.coord_map;
            patches.push_back(std::move(pj));
        }
        j["atlas"] = std::move(patches);
    }
    Json s;
    s["gauge"] = p.solver.gauge;
    s["tolerance"] = p.solver.tolerance;
    if (!p.solver.grid.steps.empty())
        s["grid"] = Json{{"steps", p.solver.grid.steps}, {"sizes", p.solver.grid.sizes}};
    if (!p.solver.grid.order.empty()) s["grid"]["order"] = p.solver.grid.order;
    if (!p.solver.start.empty()) s["start"] = p.solver.start;
    j["solver"] = std::move(s);
    return j;
}

ProblemFile problem_from_json(const Json& j) {
    ProblemFile p;
    p.name = j.value("name", std::string("unnamed"));
    p.n = j.at("n").get<int>();
    p.k = j.at("k").get<int>();
    p.seed = j.value("seed", std::uint64_t{42});
    const Json& dom = j.at("domain");
    p.lo = dom.at("lo").get<std::vector<double>>();
    p.hi = dom.at("hi").get<std::vector<double>>();
    p.exclude_origin_radius = dom.value("exclude_origin_radius", 0.0);
    p.momentum_radius = j.value("momentum_radius", 10.0);
    p.vartheta = j.at("vartheta").get<std::vector<std::string>>();
    p.hamiltonian = j.at("hamiltonian").get<std::string>();
    if (j.contains("sections")) p.sections = j.at("sections").get<std::vector<std::vector<std::string>>>();
    if (j.contains("atlas")) {
        for (const auto& pj : j.at("atlas")) {
            PatchSpec a;
            a.name = pj.value("name", std::string("patch"));
            if (pj.contains("sector")) a.sector = sector_from_json(pj.at("sector"));
            if (pj.contains("box"))
                a.box = std::make_pair(pj.at("box").at("lo").get<std::vector<double>>(),
                                       pj.at("box").at("hi").get<std::vector<double>>());
            a.sigma_expr = pj.value("sigma", std::string());
            a.sigma_angle_factor = pj.value("sigma_angle_factor", 0.0);
            if (pj.contains("coord_map")) a.coord_map = pj.at("coord_map").get<std::vector<std::string>>();
            p.atlas.push_back(std::move(a));
        }
    }
    if (j.contains("solver")) {
        const Json& s = j.at("solver");
        p.solver.gauge = s.value("gauge", std::string("min-norm"));
        p.solver.tolerance = s.value("tolerance", 1e-8);
        if (s.contains("grid")) {
            p.solver.grid.steps = s.at("grid").at("steps").get<std::vector<int>>();
            p.solver.grid.sizes = s.at("grid").at("sizes").get<std::vector<double>>();
            if (s.at("grid").contains("order")) p.solver.grid.order = s.at("grid").at("order").get<std::vector<int>>();
        }
        if (s.contains("start")) p.solver.start = s.at("start").get<std::vector<double>>();
    }
    return p;
}

ProblemFile load_problem(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open problem file '" + path + "'");
    Json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw Error("cannot parse problem file '" + path + "': " + e.what());
    }
    return problem_from_json(j);
}

void save_problem(const ProblemFile& p, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write problem file '" + path + "'");
    out << problem_to_json(p).dump(2) << "\n";
}

ProblemInstance compile_problem(const ProblemFile& p) {
    if (p.n < 1 || p.k < 1) throw Error("problem needs n >= 1 and k >= 1");
    if (static_cast<int>(p.vartheta.size()) != p.n)
        throw Error("vartheta needs exactly n coefficient expressions");
    if (static_cast<int>(p.lo.size()) != p.n || static_cast<int>(p.hi.size()) != p.n)
        throw Error("domain bounds need n entries");

    ProblemInstance inst;
    inst.file = p;

    ScopePtr base_scope = make_scope(base_coordinate_names(p.n));
    ScopePtr phase_scope = make_scope(phase_coordinate_names(p.n, p.k));

    FormField vartheta(p.n, 1);
    for (int i = 0; i < p.n; ++i)
        vartheta.set({i}, Coeff::from_expr(parse(p.vartheta[i], base_scope)));

    Domain base;
    base.lo = Eigen::Map<const Eigen::VectorXd>(p.lo.data(), p.n);
    base.hi = Eigen::Map<const Eigen::VectorXd>(p.hi.data(), p.n);
    if (p.exclude_origin_radius > 0.0) {
        base.puncture_dims = p.n;
        base.puncture_radius = p.exclude_origin_radius;
    }

    inst.bundle = build_phase_bundle(p.n, p.k, vartheta, base, p.momentum_radius, 1e-8, 100, p.seed);
    inst.H = Coeff::from_expr(parse(p.hamiltonian, phase_scope));

    if (!p.sections.empty()) {
        if (static_cast<int>(p.sections.size()) != p.k)
            throw Error("sections need k rows of n expressions");
        std::vector<FormField> forms;
        for (const auto& row : p.sections) {
            if (static_cast<int>(row.size()) != p.n) throw Error("sections need k rows of n expressions");
            FormField f(p.n, 1);
            for (int i = 0; i < p.n; ++i) f.set({i}, Coeff::from_expr(parse(row[i], base_scope)));
            forms.push_back(std::move(f));
        }
        inst.section = Section::from_forms(std::move(forms));
    }

    for (const auto& a : p.atlas) {
        ChartPatch patch;
        patch.name = a.name;
        if (a.sector) {
            SectorBounds sb;
            sb.phi_lo = a.sector->phi_lo;
            sb.phi_hi = a.sector->phi_hi;
            sb.r_lo = a.sector->r_lo;
            sb.r_hi = a.sector->r_hi;
            patch.sector = sb;
        }
        if (a.box) {
            Domain d;
            d.lo = Eigen::Map<const Eigen::VectorXd>(a.box->first.data(), a.box->first.size());
            d.hi = Eigen::Map<const Eigen::VectorXd>(a.box->second.data(), a.box->second.size());
            patch.box = d;
        }
        if (a.sigma_angle_factor != 0.0) {
            if (!a.sector) throw Error("sigma_angle_factor needs a sector patch");
            patch.sigma = Coeff::branch_angle(0, 1, a.sector->phi_lo, a.sector->phi_hi, a.sigma_angle_factor);
        } else if (!a.sigma_expr.empty()) {
            patch.sigma = Coeff::from_expr(parse(a.sigma_expr, base_scope));
        } else {
            throw Error("patch '" + a.name + "' needs sigma or sigma_angle_factor");
        }
        ChartMap base_map;
        if (!a.coord_map.empty()) {
            if (static_cast<int>(a.coord_map.size()) != p.n) throw Error("coord_map needs n expressions");
            std::vector<Coeff> comps;
            for (const auto& e : a.coord_map) comps.push_back(Coeff::from_expr(parse(e, base_scope)));
            base_map = ChartMap(p.n, p.n, std::move(comps));
            patch.to_reference = base_map;
        }
        inst.patch_base_maps.push_back(base_map);
        inst.atlas.patches.push_back(std::move(patch));
    }

    inst.gauge = p.solver.gauge == "darboux" ? Gauge::DarbouxDiagonal : Gauge::MinNorm;
    inst.tolerance = p.solver.tolerance;
    if (!p.solver.grid.steps.empty()) {
        inst.grid.steps = p.solver.grid.steps;
        inst.grid.sizes = p.solver.grid.sizes;
        for (int o : p.solver.grid.order) inst.grid.order.push_back(o - 1);
    } else {
        inst.grid.steps.assign(p.k, 100);
        inst.grid.sizes.assign(p.k, 1e-2);
    }
    if (static_cast<int>(inst.grid.steps.size()) != p.k)
        throw Error("grid needs one steps/sizes entry per axis (k of them)");
    if (!p.solver.start.empty()) {
        if (static_cast<int>(p.solver.start.size()) != inst.bundle.N)
            throw Error("start point needs n + n*k coordinates");
        inst.start = Eigen::Map<const Eigen::VectorXd>(p.solver.start.data(), inst.bundle.N);
    } else {
        inst.start = Eigen::VectorXd::Zero(inst.bundle.N);
    }
    return inst;
}

std::vector<std::string> builtin_problem_names() {
    return {"punctured-plane", "punctured-plane-polar", "darboux-free"};
}

namespace {

std::string cartesian_hamiltonian(int k) {
    std::string h;
    for (int kappa = 1; kappa <= k; ++kappa) {
        if (kappa > 1) h += " + ";
        std::string px = "p_" + std::to_string(kappa) + "_1";
        std::string py = "p_" + std::to_string(kappa) + "_2";
        h += "(" + px + "^2 + " + py + "^2)/2";
    }
    return h;
}

std::string polar_hamiltonian(int k) {
    std::string h;
    for (int kappa = 1; kappa <= k; ++kappa) {
        if (kappa > 1) h += " + ";
        std::string pr = "p_" + std::to_string(kappa) + "_1";
        std::string pphi = "p_" + std::to_string(kappa) + "_2";
        h += "(" + pr + "^2 + " + pphi + "^2/q1^2)/2";
    }
    return h;
}

ProblemFile punctured_plane(int k) {
    ProblemFile p;
    p.name = "punctured-plane";
    p.n = 2;
    p.k = k;
    p.lo = {-6.0, -6.0};
    p.hi = {6.0, 6.0};
    p.exclude_origin_radius = 0.1;
    p.momentum_radius = 10.0;
    p.vartheta = {"-2*q2/(q1^2+q2^2)", "2*q1/(q1^2+q2^2)"};
    p.hamiltonian = cartesian_hamiltonian(k);
    if (k == 1) p.sections = {{"exp(2*atan2(q2,q1))", "0"}};  // closed but not a solution

    // three angular patches; triple overlaps stay two-branch so transition
    // products pair up exactly
    PatchSpec east{"east", SectorSpec{-0.75 * kPi, 0.75 * kPi, 0.1, 20.0}, {}, "", 2.0, {}};
    PatchSpec north{"north", SectorSpec{0.25 * kPi, 1.75 * kPi, 0.1, 20.0}, {}, "", 2.0, {}};
    PatchSpec south{"south", SectorSpec{-1.75 * kPi, -0.25 * kPi, 0.1, 20.0}, {}, "", 2.0, {}};
    p.atlas = {east, north, south};

    p.solver.gauge = "min-norm";
    p.solver.tolerance = 1e-8;
    if (k == 1) {
        p.solver.grid.steps = {1000};
        p.solver.grid.sizes = {1e-3};
    } else {
        p.solver.grid.steps.assign(k, 100);
        p.solver.grid.sizes.assign(k, 1e-2);
    }
    p.solver.start.assign(2 + 2 * k, 0.0);
    p.solver.start[0] = 1.0;  // (1, 0, 1, 0, ...) with p^kappa = (1, 0)
    for (int kappa = 0; kappa < k; ++kappa) p.solver.start[2 + 2 * kappa] = 1.0;
    return p;
}

ProblemFile punctured_plane_polar(int k) {
    ProblemFile p;
    p.name = "punctured-plane-polar";
    p.n = 2;
    p.k = k;
    p.lo = {0.3, -2.0};
    p.hi = {3.0, 2.0};
    p.momentum_radius = 10.0;
    p.vartheta = {"0", "2"};
    p.hamiltonian = polar_hamiltonian(k);
    for (int kappa = 1; kappa <= k; ++kappa) {
        std::string a = std::to_string(kappa);
        p.sections.push_back({a + "*exp(q2)", "-" + a + "*q1*exp(q2)"});
    }
    PatchSpec patch;
    patch.name = "polar";
    patch.box = std::make_pair(p.lo, p.hi);
    patch.sigma_expr = "2*q2";
    patch.coord_map = {"q1*cos(q2)", "q1*sin(q2)"};
    p.atlas = {patch};

    p.solver.gauge = "min-norm";
    p.solver.tolerance = 1e-8;
    if (k == 1) {
        p.solver.grid.steps = {1000};
        p.solver.grid.sizes = {1e-3};
    } else if (k == 2) {
        p.solver.grid.steps.assign(k, 200);
        p.solver.grid.sizes.assign(k, 5e-3);
    } else {
        // higher multiplicities need a short, fine grid: the section flow is
        // stiff along the large-coefficient axes and the grid has k dimensions
        p.solver.grid.steps.assign(k, 40);
        p.solver.grid.sizes.assign(k, 2.5e-3);
    }
    // start over the base point (1, 0); the sections put p^kappa = (kappa, -kappa)
    p.solver.start.assign(2 + 2 * k, 0.0);
    p.solver.start[0] = 1.0;
    for (int kappa = 1; kappa <= k; ++kappa) {
        p.solver.start[2 + 2 * (kappa - 1)] = kappa;
        p.solver.start[2 + 2 * (kappa - 1) + 1] = -kappa;
    }
    return p;
}

ProblemFile darboux_free(int k) {
    ProblemFile p;
    p.name = "darboux-free";
    p.n = 2;
    p.k = k;
    p.lo = {-10.0, -10.0};
    p.hi = {10.0, 10.0};
    p.momentum_radius = 10.0;
    p.vartheta = {"0", "0"};
    p.hamiltonian = cartesian_hamiltonian(k);
    for (int kappa = 1; kappa <= k; ++kappa) {
        std::string a = std::to_string(kappa);
        p.sections.push_back({"0.3*" + a, "0.7*" + a});  // gamma = d(0.3 a q1 + 0.7 a q2)
    }
    p.solver.gauge = "min-norm";
    p.solver.tolerance = 1e-8;
    p.solver.grid.steps = std::vector<int>(k, k == 1 ? 1000 : 100);
    p.solver.grid.sizes = std::vector<double>(k, k == 1 ? 1e-3 : 1e-2);
    p.solver.start.assign(2 + 2 * k, 0.0);
    p.solver.start[2] = 1.0;
    if (2 + 2 * k > 3) p.solver.start[3] = 0.5;
    return p;
}

}  // namespace

ProblemFile builtin_problem(const std::string& name, int k) {
    if (k < 1) throw Error("k must be at least 1");
    if (name == "punctured-plane") return punctured_plane(k);
    if (name == "punctured-plane-polar") return punctured_plane_polar(k);
    if (name == "darboux-free") return darboux_free(k);
    throw Error("unknown built-in problem '" + name + "'");
}

}  // namespace lcks
