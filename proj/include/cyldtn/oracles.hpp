#pragma once

#include <vector>

#include "cyldtn/interior.hpp"
#include "cyldtn/model.hpp"

namespace cyldtn {

/// Radial eigenvalue problem
///   -u'' - ((n-1)/r) u' + ell(ell+n-2)/r^2 u + v(r) u = mu u
/// on (0, r_inf) with regularity at 0 and u(r_inf) = 0, discretized by an
/// independent low-order method (P1 finite elements + Sturm bisection).
struct RadialProblem {
    int n = 2;
    int ell = 0;
    PotentialSpec potential;  // evaluated at y = 0 (y-independent required)
    double r_inf = 12.0;
    double mesh = 1.0 / 320.0;
};

/// Ascending negative eigenvalues (bound states), Richardson-extrapolated
/// from meshes h and h/2. Empty when no bound state exists.
std::vector<double> radial_bound_states(const RadialProblem& problem, int count);

struct SeparableBand {
    int j = 0;
    int ell = 0;
    int p = 0;       // radial level within (ell)
    double mu = 0.0; // radial eigenvalue
    double lambda = 0.0;  // mu + (k + 2 pi j)^2
};

/// Exact fiber eigenvalues of H(k) for a y-independent radial potential:
/// lambda = mu_{ell,p} + (k + 2 pi j)^2, aggregated over ell <= ell_max and
/// |j| <= j_max, ascending in lambda.
std::vector<SeparableBand> separable_bands(const PotentialSpec& v, int n, double k,
                                           int ell_max, int j_max, int count,
                                           double r_inf = 12.0);

/// Lowest eigenvalues of H(k) on B_L x T with Dirichlet walls at |x| = L,
/// via the interior assembly reused at R = L with the potential included.
std::vector<double> box_eigs(const WaveguideConfig& cfg, double k, double L,
                             const Discretization& disc, int count);

}  // namespace cyldtn
