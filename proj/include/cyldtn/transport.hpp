#pragma once

#include <array>

#include "cyldtn/dispersion.hpp"

namespace cyldtn {

struct TransportParams {
    double envelope_center = 0.8;
    double envelope_width = 0.15;
    double t_max = 1000.0;
    int t_count = 12;
    int k_points_min = 128;  // full-zone uniform quadrature grid, power of two
    int cell_cap = 20000;    // hard cap on the cell window
    int field_nr = 12;       // Gauss nodes per radial panel
    int field_nang = 8;
    int field_ny = 4;
    double mass_tol = 1e-6;
};

/// Fixed unit-cell evaluation grid shared by all cached eigenfunctions.
struct SpatialGrid {
    int n = 2;
    double R = 1.5;
    std::vector<double> r, wr;  // radial nodes / weights including r^{n-1}
    BoundaryGrid bg;            // angular and torus layout (weights included)
    int points() const { return int(r.size()) * bg.angular_points() * int(bg.y.size()); }
};

/// Single-band wavepacket: envelope samples on a uniform full-zone k-grid
/// (only bins inside the support are materialized) with gauge-aligned
/// eigenfunctions cached on the spatial grid.
struct WavepacketSpec {
    int K = 0;                     // full-zone grid size (power of two)
    double dk = 0.0;               // 2 pi / K
    std::vector<int> bins;         // materialized k-grid indices
    std::vector<double> kvals;
    std::vector<Complex> g;
    std::vector<double> lambda;
    std::vector<double> gradient;  // dlambda/dk at the bins
    std::vector<Eigen::MatrixXcd> phi;  // unit-norm fields, (nr*na) x ny
    SpatialGrid grid;
    double norm_target = 0.0;      // (2pi)^{-1} sum |g|^2 dk
    double mean_velocity = 0.0;    // |g|^2-weighted average of the gradient
};

/// Real-space samples over a window of K consecutive unit cells.
struct FieldSamples {
    double t = 0.0;
    int cell0 = 0;  // physical index of the first cell in the window
    int K = 0;
    const WavepacketSpec* packet = nullptr;
    std::vector<Complex> psi;  // cell-major: [(cell)(ir*na+a)*ny + b]
};

struct Moments {
    std::array<double, 3> X{0.0, 0.0, 0.0};
    double Y = 0.0;
    double norm = 0.0;
    double edge_mass = 0.0;  // fraction of mass in the outer 5% of the window
};

struct TransportRecord {
    std::vector<double> t;
    std::vector<std::array<double, 3>> X;
    std::vector<double> Y;
    std::vector<double> norm;
    int n = 2;
};

struct VelocityFit {
    double v_y = 0.0;
    double intercept = 0.0;
    double v_x_max = 0.0;      // max_t |<X>(t) - <X>(0)| / t
    double v_y_expected = 0.0; // band-gradient quadrature average
    double max_linear_dev = 0.0;
};

/// Build the packet from a traced band: Gaussian-times-bump envelope on the
/// transport grid, eigenfunctions reconstructed at every materialized bin
/// and phase-aligned along k.
WavepacketSpec build_packet(const WaveguideConfig& cfg, const Band& band,
                            const TransportParams& par, int threads = 1);

/// Fiberwise-exact evolution: envelope phases e^{-i t lambda(k)}.
FieldSamples evolve(const WavepacketSpec& packet, double t);

/// Position moments and norm over the cell window.
Moments moments(const FieldSamples& samples);

/// Evolve at t_count uniform times over [0, t_max] and collect moments.
TransportRecord transport_record(const WavepacketSpec& packet, const TransportParams& par);

/// Least-squares slope of <Y>(t); v_x from the maximum drift ratio.
VelocityFit velocity_fit(const TransportRecord& record, const WavepacketSpec& packet);

}  // namespace cyldtn
