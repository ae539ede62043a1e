#pragma once

/* Sections of the phase bundle and the three-way equivalence check:
 * (1) integral sections of the projected field lift to solutions,
 * (2) X o gamma - T^k gamma (X^gamma) lies in ker flat,
 * (3) d_vartheta (H o gamma) = 0.
 */

#include "lcks/hdw.hpp"

namespace lcks {

// Ordered family (gamma^1, ..., gamma^k) of one-forms on the base chart,
// viewed as the map q -> (q, gamma^1(q), ..., gamma^k(q)).
struct Section {
    int n = 0;
    int k = 0;
    std::vector<std::vector<Coeff>> gamma;  // [kappa][i]

    static Section from_forms(std::vector<FormField> one_forms);

    FormField form(int kappa) const;            // gamma^kappa as a one-form on the base
    ChartMap induced(const PhaseBundle& b) const;  // q -> (q, gamma(q))
};

// max over kappa and points of || d_vartheta gamma^kappa ||_inf
double section_closedness(const Section& s, const FormField& vartheta,
                          const std::vector<Eigen::VectorXd>& base_points);

// base components of X at gamma(q); throws DomainEscape if gamma(q) leaves the chart
Eigen::MatrixXd project_field(const KVectorField& X, const Section& s, const PhaseBundle& b,
                              std::span<const double> q);

// X^gamma as a k-vector field on the base chart
std::shared_ptr<KVectorField> projected_base_field(std::shared_ptr<const KVectorField> X, const Section& s,
                                                   const PhaseBundle& b);

struct HjResiduals {
    double residual = 0.0;     // max || d(H o gamma) - (H o gamma) vartheta ||_inf
    double cross_check = 0.0;  // max difference against gamma^*(d_theta H)
};

HjResiduals hj_residual(const PhaseBundle& b, const Coeff& H, const Section& s,
                        const std::vector<Eigen::VectorXd>& base_points);

struct RelatednessResult {
    double flat_defect = 0.0;  // max || flat(X o gamma - T^k gamma (X^gamma)) ||_inf
    double verticality = 0.0;  // max base component of the difference
};

RelatednessResult relatedness_defect(const PhaseBundle& b, const KVectorField& X, const Section& s,
                                     const std::vector<Eigen::VectorXd>& base_points);

struct HJReport {
    double closedness = 0.0;
    double hj = 0.0;
    double hj_cross_check = 0.0;
    double relatedness = 0.0;
    double verticality = 0.0;
    double lift = 0.0;
    int lift_measured_points = 0;
    bool lift_grid_escaped = false;
    double solver_residual = 0.0;
    double integrability = 0.0;
    bool hj_pass = false;
    bool relatedness_pass = false;
    bool lift_pass = false;
    std::string verdict;  // "PASS" (co-vanish or co-fail) or "VIOLATION"
    double tol_algebraic = 0.0;
    double tol_integration = 0.0;
};

// Runs all three conditions; condition (1) is tested constructively by
// integrating the projected field from base_start and measuring the lifted
// grid's flat-map residual.  Preconditions (X solves the field equation,
// gamma is d_vartheta-closed) throw PreconditionFailed.
HJReport verify_hj_theorem(const PhaseBundle& b, const Coeff& H, std::shared_ptr<const KVectorField> X,
                           const Section& s, std::span<const double> base_start, const GridSpec& grid,
                           const std::vector<Eigen::VectorXd>& base_points, double tol_algebraic = 1e-8,
                           double tol_integration = 1e-6);

}  // namespace lcks
