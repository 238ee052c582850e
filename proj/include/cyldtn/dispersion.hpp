#pragma once

#include <optional>
#include <string>

#include "cyldtn/boundary.hpp"
#include "cyldtn/exterior.hpp"
#include "cyldtn/interior.hpp"
#include "cyldtn/model.hpp"

namespace cyldtn {

/// Assembled two-sided map Lambda(k,E) = Lambda^- - Lambda^+ over the
/// admissible basis, with the Sobolev weights used for singular-value
/// normalization (H^{3/2} -> H^{1/2}).
struct DtNMatrix {
    double k = 0.0;
    double E = 0.0;
    double R_used = 0.0;
    std::vector<ModeIndex> basis;
    Eigen::MatrixXcd matrix;
    Eigen::VectorXd weight;  // 1 + ell^2 + j^2 per index
};

DtNMatrix assemble_dtn(const WaveguideConfig& cfg, double k, double E, bool exact_zero = false);

/// Variant that skips the R-selection loop (used inside refinement where the
/// radius has been frozen for a bracket).
DtNMatrix assemble_dtn_fixed_radius(const WaveguideConfig& cfg, double k, double E, double R,
                                    bool exact_zero = false);

struct WeightedSVD {
    Eigen::VectorXd sigma;   // descending
    Eigen::MatrixXcd V;      // right singular vectors of the weighted matrix
    double norm = 0.0;       // sigma_max
    double sigma_min = 0.0;  // sigma.tail(1)
};

/// SVD of diag(w^{1/4}) Lambda diag(w^{-3/4}).
WeightedSVD weighted_svd(const DtNMatrix& dtn);

/// Smallest weighted singular value at (k, E); deterministic.
double sigma_min(const WaveguideConfig& cfg, double k, double E);

struct BandPoint {
    double k = 0.0;
    double lambda = 0.0;
    double sigma_min = 0.0;
    double norm = 0.0;       // weighted |Lambda|
    double residual = 0.0;   // = sigma_min for the stored kernel vector
    int multiplicity = 0;
    double R_used = 0.0;
    std::vector<BoundaryData> kernel;  // orthonormal kernel vectors
};

struct LocateStats {
    int radius_shifts = 0;  // Dirichlet-pole zones rescanned at a shifted R
};

/// Kernel search over (e_lo, e_hi) at fixed k. The window is split at
/// hypersurface guard bands; within each piece the Dirichlet poles of the
/// initial radius partition the scan, inertia jumps of the Hermitian DtN
/// bracket each kernel crossing, and golden-section refinement narrows it
/// to width refine_tol. Pole neighborhoods are rescanned at a shifted
/// radius. Accepts points with sigma_min < kernel_tol * |Lambda|_w; an
/// empty result is valid.
std::vector<BandPoint> locate_eigenvalues(const WaveguideConfig& cfg, double k, double e_lo,
                                          double e_hi, int grid_count, int threads = 1,
                                          LocateStats* stats = nullptr);

struct Band {
    std::vector<BandPoint> points;           // ascending in k
    std::vector<double> gradient;            // dlambda/dk per point
    std::vector<bool> zero_gradient_flag;
    std::string truncation_reason;           // empty when the grid was exhausted
};

/// Predictor-corrector continuation of a seed kernel point across a k-grid.
Band trace_band(const WaveguideConfig& cfg, const std::vector<double>& k_grid,
                const BandPoint& seed, double window_width = 0.5, int threads = 1);

/// Orthonormal kernel vectors of an accepted point (stored copy).
std::vector<BoundaryData> kernel_boundary_data(const BandPoint& point);

/// Centered finite-difference gradient samples (one-sided at the ends);
/// fills Band::gradient and flags zero-gradient points.
void band_gradient(Band& band, double zero_tol_rel = 1e-6);

struct EigenfunctionField {
    std::vector<double> r;     // ascending sample radii, interior + exterior
    BoundaryGrid grid;         // angular/torus layout
    Eigen::MatrixXcd values;   // (r.size() * angular_points) x n_y, L2-normalized
    double trace_mismatch = 0.0;   // two-sided trace gap at r = R, relative
    double deriv_mismatch = 0.0;   // |Lambda f| / |f| at the accepted point
};

EigenfunctionField reconstruct_eigenfunction(const WaveguideConfig& cfg, const BandPoint& point,
                                             double r_max, int n_r, int n_ang, int n_y);

struct ThomasScan {
    std::vector<double> t;
    std::vector<double> sigma_min;  // weighted free diagonal minima
    double exponent = 0.0;          // least-squares slope of log sigma vs log t
};

/// Free-DtN growth along the complexified quasimomentum k0 + i t e_1 at
/// fixed E0; the admissible basis is frozen at t = 0.
ThomasScan thomas_scan(const WaveguideConfig& cfg, double k0, double E0,
                       const std::vector<double>& t_list);

}  // namespace cyldtn
