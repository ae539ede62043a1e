#pragma once

/* Problem files: JSON descriptions of a chart geometry (dimensions, Lee
 * form, Hamiltonian, optional sections and atlas) plus solver options, and
 * the built-in problem registry.
 */

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "lcks/atlas.hpp"
#include "lcks/hj.hpp"

namespace lcks {

using Json = nlohmann::ordered_json;

struct SectorSpec {
    double phi_lo = 0.0;
    double phi_hi = 0.0;
    double r_lo = 0.0;
    double r_hi = std::numeric_limits<double>::infinity();
};

struct PatchSpec {
    std::string name;
    std::optional<SectorSpec> sector;
    std::optional<std::pair<std::vector<double>, std::vector<double>>> box;
    std::string sigma_expr;           // used when nonempty
    double sigma_angle_factor = 0.0;  // used when nonzero: sigma = factor * branch angle
    std::vector<std::string> coord_map;
};

struct GridFileSpec {
    std::vector<int> steps;
    std::vector<double> sizes;
    std::vector<int> order;  // 1-based in files; empty means natural order
};

struct SolverSpec {
    std::string gauge = "min-norm";  // "min-norm" | "darboux"
    double tolerance = 1e-8;
    GridFileSpec grid;
    std::vector<double> start;  // phase-space start point
};

struct ProblemFile {
    std::string name;
    int n = 0;
    int k = 0;
    std::uint64_t seed = 42;
    std::vector<double> lo, hi;  // base box
    double exclude_origin_radius = 0.0;
    double momentum_radius = 10.0;
    std::vector<std::string> vartheta;
    std::string hamiltonian;
    std::vector<std::vector<std::string>> sections;  // k rows of n expressions
    std::vector<PatchSpec> atlas;
    SolverSpec solver;
};

Json problem_to_json(const ProblemFile& p);
ProblemFile problem_from_json(const Json& j);
ProblemFile load_problem(const std::string& path);
void save_problem(const ProblemFile& p, const std::string& path);

struct ProblemInstance {
    ProblemFile file;
    PhaseBundle bundle;
    Coeff H;
    std::optional<Section> section;
    Atlas atlas;
    std::vector<ChartMap> patch_base_maps;  // aligned with atlas.patches; empty map if none
    GridSpec grid;  // order compiled to 0-based
    Gauge gauge = Gauge::MinNorm;
    Eigen::VectorXd start;
    double tolerance = 1e-8;
};

ProblemInstance compile_problem(const ProblemFile& p);

std::vector<std::string> builtin_problem_names();
ProblemFile builtin_problem(const std::string& name, int k);

}  // namespace lcks
