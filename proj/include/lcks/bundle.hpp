#pragma once

/* Chart model of the phase bundle: coordinates (q^1..q^n, p^1_1..p^k_n),
 * a closed Lee form pulled up from the base, the canonical one- and
 * two-form families and their conformally twisted versions
 *     OmegaTheta[kappa] = Omega[kappa] + theta ^ Theta[kappa].
 */

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "lcks/forms.hpp"
#include "lcks/sampling.hpp"

namespace lcks {

struct PhaseBundle {
    int n = 0;  // base dimension
    int k = 0;  // multiplicity
    int N = 0;  // n + n*k

    ScopePtr base_scope;   // q1..qn
    ScopePtr phase_scope;  // q1..qn, p_1_1..p_k_n

    Domain base_domain;
    Domain phase_domain;         // escape checks; momenta loosely bounded
    Domain phase_sample_domain;  // sampling: momentum ball of the declared radius

    FormField vartheta;               // degree 1 on the base chart
    FormField theta;                  // semi-basic pull-up to the phase chart
    std::vector<FormField> Theta;     // canonical one-forms, per kappa
    std::vector<FormField> Omega;     // Darboux two-forms dq^i ^ dp^kappa_i
    std::vector<FormField> OmegaTheta;

    int momentum_index(int kappa, int i) const { return n + kappa * n + i; }

    // lift a coefficient function on the base to the phase chart
    Coeff promote(const Coeff& base_coeff) const;
    FormField promote_form(const FormField& base_form) const;

    std::vector<int> vertical_indices() const;
};

std::vector<std::string> base_coordinate_names(int n);
std::vector<std::string> phase_coordinate_names(int n, int k);

// Builds the bundle after checking d(vartheta) = 0 on sampled base points;
// throws NotClosed with the worst sample otherwise.
PhaseBundle build_phase_bundle(int n, int k, const FormField& vartheta, const Domain& base_domain,
                               double momentum_radius, double closedness_tol = 1e-8,
                               int closedness_samples = 100, std::uint64_t seed = 42);

struct StructureReport {
    struct Row {
        Eigen::VectorXd z;
        double axiom_i = 0.0;        // |d Omega_theta - theta ^ Omega_theta|, max over kappa
        int stacked_kernel_dim = 0;  // dim of the intersection of the kernels
        double axiom_iii = 0.0;      // max |Omega_theta(V, V)|
        std::vector<int> single_kernel_dims;
    };
    std::vector<Row> rows;
    double max_axiom_i = 0.0;
    double max_axiom_iii = 0.0;
    int max_stacked_kernel_dim = 0;
    int expected_single_kernel_dim = 0;
    bool single_kernel_dims_ok = true;
    bool darboux_pattern_mismatch = false;  // literal coefficient-pattern cross-check
    double tolerance = 0.0;

    bool all_pass() const {
        return max_axiom_i < tolerance && max_stacked_kernel_dim == 0 && max_axiom_iii < tolerance &&
               single_kernel_dims_ok && !darboux_pattern_mismatch;
    }
};

StructureReport verify_structure(const PhaseBundle& b, const std::vector<Eigen::VectorXd>& points,
                                 double tol);

// e^{-sigma} Omega_theta per kappa; sigma is a coefficient on the phase chart
std::vector<FormField> conformal_rescale(const PhaseBundle& b, const Coeff& sigma);

struct LiouvilleResult {
    Eigen::MatrixXd Z;             // N x k, column kappa solves i_{Z_kappa} OmegaTheta[kappa] = Upsilon[kappa]
    Eigen::VectorXd residuals;     // per kappa
    Eigen::VectorXd contractions;  // Upsilon[kappa](Z_kappa) where the exactness precondition holds
    std::vector<bool> exact;       // whether OmegaTheta[kappa] = d_theta Upsilon[kappa] at the point
};

// Per-kappa minimum-norm solve at one point; throws Inconsistent when a
// residual exceeds tol (Upsilon not in the range of the contraction map).
LiouvilleResult liouville_fields_at(const PhaseBundle& b, const std::vector<FormField>& upsilon,
                                    std::span<const double> z, double tol = 1e-8);

// The same solve packaged as a k-vector field.
std::shared_ptr<KVectorField> liouville_fields(const PhaseBundle& b, std::vector<FormField> upsilon);

}  // namespace lcks
