#include "lcks/diagnostics.hpp"

#include <cmath>

namespace lcks {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

double conformal_energy_drift(const MultiTimeGrid& grid, const Coeff& H, double factor) {
    if (grid.k != 1) throw Error("conformal energy drift expects a single-axis trajectory");
    bool first = true;
    double phi_prev = 0.0, q0 = 0.0, drift = 0.0;
    for (int j = 0; j < grid.shape[0]; ++j) {
        if (!grid.valid_at({j})) break;
        const Eigen::VectorXd& z = grid.at({j});
        double phi_raw = std::atan2(z(1), z(0));
        double phi = first ? phi_raw : phi_raw + kTwoPi * std::round((phi_prev - phi_raw) / kTwoPi);
        phi_prev = phi;
        double q = std::exp(-factor * phi) * H(as_span(z));
        if (first) {
            q0 = q;
            first = false;
        } else {
            drift = std::max(drift, std::abs(q - q0));
        }
    }
    return drift;
}

double energy_drift(const MultiTimeGrid& grid, const Coeff& H) {
    if (grid.k != 1) throw Error("energy drift expects a single-axis trajectory");
    bool first = true;
    double h0 = 0.0, drift = 0.0;
    for (int j = 0; j < grid.shape[0]; ++j) {
        if (!grid.valid_at({j})) break;
        double h = H(as_span(grid.at({j})));
        if (first) {
            h0 = h;
            first = false;
        } else {
            drift = std::max(drift, std::abs(h - h0));
        }
    }
    return drift;
}

double straight_line_defect(const MultiTimeGrid& grid) {
    if (grid.k != 1) throw Error("straight line defect expects a single-axis trajectory");
    int last = grid.shape[0] - 1;
    while (last > 0 && !grid.valid_at({last})) --last;
    if (last < 2) return 0.0;
    const Eigen::VectorXd& a = grid.at({0});
    const Eigen::VectorXd& b = grid.at({last});
    double worst = 0.0;
    for (int j = 1; j < last; ++j) {
        if (!grid.valid_at({j})) continue;
        double s = static_cast<double>(j) / last;
        worst = std::max(worst, (grid.at({j}) - ((1.0 - s) * a + s * b)).lpNorm<Eigen::Infinity>());
    }
    return worst;
}

}  // namespace lcks
