#pragma once

#include "cyldtn/boundary.hpp"
#include "cyldtn/model.hpp"

namespace cyldtn {

/// The exterior problem is free (no potential outside B_1), so the exterior
/// DtN is exactly diagonal in the mode basis and is stored as such.
struct ExteriorDtN {
    std::vector<ModeIndex> basis;
    Eigen::VectorXcd diagonal;
};

/// Diagonal of Lambda^+(k, E) over an admissible basis.
/// Negative class: (1 - n/2)/R + z_j K_nu'(z_j R)/K_nu(z_j R),
/// nu = n/2 + ell - 1, z_j = principal sqrt(-E_j(k)), Re z_j > 0.
/// Zero class (ell >= ell0): (2 - n - ell)/R from the power-law solution.
/// Positive-class indices are rejected (no L^2 exterior solution).
ExteriorDtN exterior_dtn_diag(Complex k, double E, const std::vector<ModeIndex>& basis,
                              int n, double R);

struct ExteriorPoint {
    double r = 0.0;    // > R
    double ang1 = 0.0; // theta (n=2) or polar angle (n=3)
    double ang2 = 0.0; // azimuth (n=3)
    double y = 0.0;
};

/// Exterior solution values at r > R for admissible boundary data.
std::vector<Complex> exterior_field(const BoundaryData& f, Complex k, double E, int n,
                                    double R, const std::vector<ExteriorPoint>& points);

}  // namespace cyldtn
