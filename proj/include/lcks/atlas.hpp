#pragma once

/* Open covers with conformal factors sigma_alpha.  Transition scalars are
 * lambda_{beta alpha} = e^{sigma_alpha - sigma_beta}; the cocycle and
 * local-constancy diagnostics sample pairwise and triple overlaps.
 */

#include <optional>
#include <string>

#include "lcks/hdw.hpp"

namespace lcks {

struct SectorBounds {
    double phi_lo = 0.0;
    double phi_hi = 0.0;  // phi_hi - phi_lo < 2*pi
    double r_lo = 0.0;
    double r_hi = std::numeric_limits<double>::infinity();

    bool contains(double x, double y) const;
};

struct ChartPatch {
    std::string name;
    // angular sector on the reference base (first two coordinates), or a
    // coordinate box in the patch's own chart
    std::optional<SectorBounds> sector;
    std::optional<Domain> box;
    Coeff sigma;  // conformal factor on the patch's base chart
    // base-coordinate map patch -> reference, when the patch uses its own
    // coordinates (e.g. polar); empty for reference-chart patches
    std::optional<ChartMap> to_reference;

    bool on_reference_chart() const { return !to_reference.has_value(); }
    bool contains_base_point(std::span<const double> q) const;
};

struct Atlas {
    std::vector<ChartPatch> patches;
};

struct CocycleReport {
    double cocycle_defect = 0.0;     // max |lambda_db lambda_ba - lambda_da| over distinct triples
    double constancy_defect = 0.0;   // max |log lambda(z) - log lambda(z')| over nearby overlap samples
    int triple_samples = 0;
    int pair_samples = 0;
    int covered_samples = 0;  // samples inside at least one patch
    int total_samples = 0;
};

// Rejection-samples the base domain; throws EmptyOverlap when the atlas has
// three or more patches but no sample lands in three of them at once.
CocycleReport cocycle_defect(const Atlas& atlas, const Domain& base_domain, int budget, std::uint64_t seed,
                             double neighbor_radius = 0.05);

// max || vartheta - d sigma ||_inf over base points inside the patch
double patch_exactness(const FormField& vartheta, const ChartPatch& patch,
                       const std::vector<Eigen::VectorXd>& base_points);

struct Localization {
    std::vector<FormField> omega_alpha;  // e^{-sigma} OmegaTheta per kappa
    Coeff H_alpha;                       // e^{-sigma} H on the phase chart
    double closedness_residual = 0.0;    // max || d omega_alpha ||_inf over the sample
};

// Throws NotExactOnPatch when vartheta - d sigma exceeds tol on the patch.
Localization localize(const PhaseBundle& b, const Coeff& H, const ChartPatch& patch,
                      const std::vector<Eigen::VectorXd>& phase_points, double tol = 1e-8);

// Solves the field equation at each point twice, globally (OmegaTheta,
// d_theta H) and locally (omega_alpha, d H_alpha), and returns the max
// componentwise discrepancy.
double glue_invariance(const PhaseBundle& b, const Coeff& H, const ChartPatch& patch,
                       const std::vector<Eigen::VectorXd>& phase_points, Gauge gauge, double tol = 1e-8);

// Phase-space lift of a base coordinate change: q' = f(q) and each momentum
// block transforms by (Df)^{-T}.  Supports base dimension up to 3.
ChartMap cotangent_lift(const ChartMap& base_map, int k);

// max || Dphi(z) X_src(z) - X_dst(phi(z)) ||_inf in a fixed gauge; meaningful
// for k = 1 where the solution is unique
double cross_coordinate_match(const PhaseBundle& src, const Coeff& H_src, const PhaseBundle& dst,
                              const Coeff& H_dst, const ChartMap& phase_map,
                              const std::vector<Eigen::VectorXd>& src_points, Gauge gauge);

}  // namespace lcks
