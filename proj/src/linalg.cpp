#include "lcks/linalg.hpp"

namespace lcks {

Eigen::VectorXd min_norm_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
    cod.setThreshold(kRankRelTol);
    cod.compute(A);
    return cod.solve(b);
}

int numerical_rank(const Eigen::MatrixXd& A, double rel_tol) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0) return 0;
    double cut = rel_tol * sv(0);
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > cut) ++rank;
    return rank;
}

Eigen::MatrixXd kernel_basis_of(const Eigen::MatrixXd& A, double rel_tol) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    double cut = sv.size() ? rel_tol * sv(0) : 0.0;
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > cut) ++rank;
    return svd.matrixV().rightCols(A.cols() - rank);
}

}  // namespace lcks
