#pragma once

#include <Eigen/Dense>
#include <memory>

#include "cyldtn/boundary.hpp"
#include "cyldtn/model.hpp"

namespace cyldtn {

struct DirichletProximityError : std::runtime_error {
    double smallest_pivot;
    explicit DirichletProximityError(double pivot)
        : std::runtime_error("interior factorization near-singular (smallest pivot " +
                             std::to_string(pivot) + "); E is close to the Dirichlet spectrum"),
          smallest_pivot(pivot) {}
};

/// Radial collocation layout: a parity-folded Chebyshev element on (0, s]
/// (s = potential discontinuity radius) and a mapped element on [s, R],
/// joined with C^1 interface conditions. A single element is used when
/// R - s is negligible (Dirichlet boxes with R = 1).
struct Discretization {
    int n_r = 40;
    int Q = 10;
    int J = 4;
    bool stiffness_refine = true;

    static Discretization from(const Truncation& t) {
        return Discretization{t.n_r, t.q_disc, t.j_disc, t.stiffness_refine};
    }
};

/// Factorized interior problem H(k) - E on B_R x T with Dirichlet rows.
/// One instance per (k, E, R); back-substitutions are const and reusable.
class InteriorOperator {
  public:
    InteriorOperator(const WaveguideConfig& cfg, Complex k, double E, double R,
                     const Discretization& disc);
    ~InteriorOperator();
    InteriorOperator(InteriorOperator&&) noexcept;
    InteriorOperator& operator=(InteriorOperator&&) noexcept;

    Complex k() const;
    double energy() const;
    double radius() const;

    /// Interior DtN matrix over the given admissible basis (one
    /// back-substitution per basis element, factorization reused).
    Eigen::MatrixXcd dtn(const std::vector<ModeIndex>& basis) const;

    /// Interior solution for boundary data f, evaluated at radii r <= R
    /// (values per (angular index, torus index) radial coefficient).
    /// Returned values u(r, ang, y) on the tensor grid.
    Eigen::MatrixXcd field(const BoundaryData& f, const std::vector<double>& r,
                           const BoundaryGrid& grid) const;

    double smallest_pivot() const;

    /// min over blocks of sigma_min(A_red - E), an estimate of (and a lower
    /// bound on) the distance from E to the Dirichlet spectrum of H_D(k, R).
    double dirichlet_clearance() const;

    /// Same certificate evaluated at an arbitrary energy, reusing the
    /// condensed blocks of this instance.
    double dirichlet_clearance_at(double E) const;

    /// Eigenvalues of the reduced Dirichlet operator, ascending, real parts,
    /// with angular multiplicity included.
    std::vector<double> dirichlet_spectrum(int count) const;

    /// All reduced-operator eigenvalues below emax (ascending); computed
    /// without factorizing the solve blocks.
    std::vector<double> dirichlet_spectrum_below(double emax) const;

    /// Radial node set (both elements, descending within each element).
    std::vector<double> radial_nodes() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    friend class RationalDtn;
};

/// Resolvent (rational-in-E) representation of the interior DtN at fixed
/// (k, R): one eigendecomposition of each statically condensed block makes
/// Lambda^-(E) evaluable in O(size) per energy. The poles are the discrete
/// Dirichlet eigenvalues. Scanning machinery; accepted results should be
/// re-evaluated through InteriorOperator.
class RationalDtn {
  public:
    RationalDtn(const WaveguideConfig& cfg, double k, double R, const Discretization& disc,
                double e_ref);

    Eigen::MatrixXcd interior_dtn(const std::vector<ModeIndex>& basis, double E) const;
    /// real-axis poles below emax, ascending
    std::vector<double> poles_below(double emax) const;
    double radius() const;

    struct Impl;

  private:
    std::shared_ptr<const Impl> impl_;
};

/// Closed-form interior DtN diagonal for V = 0:
/// (1 - n/2)/R + z_j I_nu'(z_j R)/I_nu(z_j R).
Eigen::VectorXcd free_interior_dtn_diag(Complex k, double E,
                                        const std::vector<ModeIndex>& basis, int n, double R);

/// Lowest `count` Dirichlet eigenvalues of H_D(k) on B_R x T.
std::vector<double> dirichlet_eigs(const WaveguideConfig& cfg, double k, double R, int count,
                                   const Discretization& disc);

/// Smallest R on a fine grid in [R0, R0 + 0.5] with Dirichlet clearance
/// above `margin` at (k, E). Throws when no grid point qualifies.
double choose_radius(const WaveguideConfig& cfg, double k, double E, double R0, double margin);

}  // namespace cyldtn
