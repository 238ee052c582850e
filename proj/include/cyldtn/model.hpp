#pragma once

#include <complex>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace cyldtn {

using Complex = std::complex<double>;

// ---------------------------------------------------------------------------
// Potential: finite sums of (radial profile on [0,1]) x (torus Fourier factor).
// The profiles vanish identically for r >= 1, so the support assumption
// holds by construction, as does y-periodicity.
// ---------------------------------------------------------------------------

enum class RadialProfile { Well, Gaussian };

struct PotentialTerm {
    RadialProfile profile = RadialProfile::Well;
    double amplitude = 1.0;
    double well_radius = 1.0;           // support edge for Well, in (0, 1]
    double sigma = 0.5;                 // Gaussian width
    std::vector<Complex> coeff{1.0};    // c_w for w = 0..W; c_{-w} = conj(c_w)

    double radial_value(double r) const;
    int max_fourier() const { return int(coeff.size()) - 1; }
    Complex fourier(int w) const;       // c_w for any integer w
};

struct PotentialSpec {
    std::vector<PotentialTerm> terms;

    double evaluate(double r, double y) const;
    int max_coupling() const;           // largest |w| with c_w != 0 over terms
    bool y_independent() const { return max_coupling() == 0; }
    bool radially_symmetric_in_x() const { return true; }  // by construction
    /// single interior discontinuity radius shared by all Well terms, or 1.0
    double discontinuity_radius() const;
    void validate() const;
};

/// Contract form: the angular coordinate is accepted but the potential is
/// radial in x, so it does not enter.
double evaluate_potential(const PotentialSpec& spec, double r, double angular, double y);

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct Truncation {
    int ell_max = 8;   // boundary-basis angular cutoff
    int j_max = 4;     // boundary-basis torus cutoff
    int n_r = 40;      // radial collocation count (both elements together)
    int q_disc = 10;   // interior angular truncation Q >= ell_max + 2
    int j_disc = 4;    // interior torus truncation J >= j_max
    bool stiffness_refine = true;  // bump radial counts for large |z_j| R
};

struct Tolerances {
    double eps_cross_rel = 1e-4;        // hypersurface guard, scaled by (1+|E|)
    double kernel_tol = 1e-6;           // sigma_min acceptance, relative
    double dirichlet_margin_rel = 1e-3; // choose_radius clearance, scaled by (1+|E|)
    double refine_tol = 1e-10;          // golden-section window width in E
};

struct WaveguideConfig {
    int n = 2;            // transverse dimension, 2 or 3
    double radius = 1.5;  // cutoff R > 1
    PotentialSpec potential;
    Truncation trunc;
    Tolerances tol;

    void validate() const;  // throws std::invalid_argument naming the field
    double eps_cross(double E) const { return tol.eps_cross_rel * (1.0 + std::abs(E)); }
    double dirichlet_margin(double E) const {
        return tol.dirichlet_margin_rel * (1.0 + std::abs(E));
    }
};

// ---------------------------------------------------------------------------
// Modes
// ---------------------------------------------------------------------------

/// Boundary-basis label. For n=2 the angular part is e^{i m theta} with
/// ell = |m|; for n=3 a real spherical harmonic (ell, m), |m| <= ell.
struct ModeIndex {
    int j = 0;
    int ell = 0;
    int m = 0;

    double sobolev_weight() const { return 1.0 + double(ell) * ell + double(j) * j; }
    friend bool operator==(const ModeIndex& a, const ModeIndex& b) {
        return a.j == b.j && a.ell == b.ell && a.m == b.m;
    }
    friend bool operator<(const ModeIndex& a, const ModeIndex& b) {
        if (a.j != b.j) return a.j < b.j;
        if (a.ell != b.ell) return a.ell < b.ell;
        return a.m < b.m;
    }
};

enum class ModeSign { Negative, Zero, Positive };

struct ModeClass {
    ModeSign sign = ModeSign::Negative;
    Complex shifted{0.0, 0.0};  // E_j(k)
    bool near_crossing = false;
};

struct NearCrossingError : std::runtime_error {
    int j;
    explicit NearCrossingError(int j_, double value)
        : std::runtime_error("mode j=" + std::to_string(j_) +
                             " lies within the crossing band (E_j = " +
                             std::to_string(value) +
                             "); shift E or k, or request exact-zero handling"),
          j(j_) {}
};

/// E_j(k) = E - (k + 2 pi j)^2 with the complex square when k is complex.
Complex shifted_energy(Complex k, double E, int j);

/// Smallest angular index with an L^2 decaying power-law mode: 2, 1, 1, 0
/// for n = 2, 3, 4, >= 5.
int min_angular_index(int n);

/// Sign classification of E_j(k) for |j| <= J against the absolute guard
/// eps_cross. Zero is assigned only within 1e-12 * (1+|E|) of the surface.
std::map<int, ModeClass> classify_modes(double k, double E, int J, double eps_cross);

/// Ordered basis of the truncated admissible subspace. Negative-class j
/// carry all ell <= ell_max; exact-zero j only ell0(n) <= ell <= ell_max;
/// Positive-class j are excluded. Throws NearCrossingError when a mode sits
/// inside the guard band (unless it is an exact zero and exact_zero is set).
std::vector<ModeIndex> admissible_basis(double k, double E, int n, const Truncation& trunc,
                                        double eps_cross, bool exact_zero = false);

}  // namespace cyldtn
