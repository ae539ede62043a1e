#pragma once

#include "lcks/coeff.hpp"
#include "lcks/hdw.hpp"

namespace lcks {

// Drift of e^{-factor * phi} H along a k = 1 trajectory, where phi is the
// angle of the first two coordinates unwrapped along the path.  On a chart
// where the Lee form is d(factor * phi) this quantity is conserved.
double conformal_energy_drift(const MultiTimeGrid& grid, const Coeff& H, double factor = 2.0);

// max_t | H(z_t) - H(z_0) |
double energy_drift(const MultiTimeGrid& grid, const Coeff& H);

// max deviation of a k = 1 trajectory from the straight line through its
// endpoints (chord test for free motion)
double straight_line_defect(const MultiTimeGrid& grid);

}  // namespace lcks
