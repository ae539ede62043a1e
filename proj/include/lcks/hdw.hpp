#pragma once

/* Field equations on the phase chart: the musical map sending a k-vector
 * value (X_1, ..., X_k) to sum_kappa i_{X_kappa} OmegaTheta[kappa], the
 * pointwise solve of  flat(X) = dH - H theta  in a chosen gauge, kernel
 * bases, an integrability diagnostic, and multi-time grid integration.
 */

#include <iosfwd>
#include <memory>
#include <optional>

#include "lcks/bundle.hpp"
#include "lcks/linalg.hpp"

namespace lcks {

struct FlatMatrix {
    Eigen::MatrixXd B;  // N x (k*N); block kappa acts on X_kappa
    Eigen::VectorXd z;
};

FlatMatrix assemble_flat(const PhaseBundle& b, std::span<const double> z);

// d_theta H = dH - H theta as a one-form field on the phase chart
FormField d_theta_hamiltonian(const PhaseBundle& b, const Coeff& H);

enum class Gauge { MinNorm, DarbouxDiagonal };

struct HdwSolution {
    Eigen::MatrixXd X;  // N x k
    double residual = 0.0;
};

// Solves flat(X) = d_theta H at z.  MinNorm picks the least-Euclidean-norm
// representative; DarbouxDiagonal zeroes off-diagonal momentum blocks and
// spreads the momentum trace equally over kappa.  Throws OutOfRange when the
// residual cannot be brought below tol.
HdwSolution solve_hdw(const PhaseBundle& b, const Coeff& H, std::span<const double> z, Gauge gauge,
                      double tol = 1e-9);

// The same solutions packaged as k-vector fields (exact directional
// derivatives in both gauges).
std::shared_ptr<KVectorField> hdw_field(const PhaseBundle& b, const Coeff& H, Gauge gauge);

// orthonormal basis of ker flat at z, as columns of a (k*N) x m matrix
Eigen::MatrixXd kernel_basis(const PhaseBundle& b, std::span<const double> z);

// max over pairs of || [X_kappa, X_lambda](z) ||_inf
double integrability_defect(const KVectorField& X, std::span<const double> z);

struct GridSpec {
    std::vector<int> steps;      // per axis
    std::vector<double> sizes;   // per axis
    std::vector<int> order;      // axis sweep order (permutation of 0..k-1)
};

struct MultiTimeGrid {
    int k = 0;
    int dim = 0;
    std::vector<int> shape;     // steps + 1 per axis
    std::vector<double> sizes;
    std::vector<Eigen::VectorXd> values;  // row-major over the multi-index; empty slots stay NaN
    Eigen::VectorXd start;
    std::optional<std::vector<int>> escape_index;

    std::size_t flat_index(const std::vector<int>& idx) const;
    bool valid_at(const std::vector<int>& idx) const;
    const Eigen::VectorXd& at(const std::vector<int>& idx) const;
    std::vector<double> time_of(const std::vector<int>& idx) const;
};

// Ordered axis sweeps with classical fourth-order steps; a trajectory point
// leaving the domain stops the fill and records the escape index.
MultiTimeGrid integrate_section(const KVectorField& X, std::span<const double> start, const GridSpec& spec,
                                const Domain& domain);

// max_{interior t, kappa} | D_t^kappa phi - X_kappa(phi(t)) | with grid
// tangents estimated by high-order central differences
double grid_hdw_residual(const MultiTimeGrid& grid, const KVectorField& X);

// || B(phi(t)) . (grid tangents) - d_theta H(phi(t)) ||_inf over the interior;
// the gauge-free version of the grid residual.  measured_points reports how
// many grid points admitted a full tangent stencil.
double grid_flat_residual(const MultiTimeGrid& grid, const PhaseBundle& b, const Coeff& H,
                          int* measured_points = nullptr);

// distance between the grids produced with the given and the reversed sweep order
double path_independence_defect(const KVectorField& X, std::span<const double> start, const GridSpec& spec,
                                const Domain& domain);

void write_grid_csv(const MultiTimeGrid& grid, const std::vector<std::string>& coord_names,
                    std::ostream& out);

}  // namespace lcks
