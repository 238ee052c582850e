#pragma once

#include <Eigen/Dense>

#include "cyldtn/model.hpp"

namespace cyldtn {

/// Coefficient vector over the orthonormal boundary basis
/// Y_{ell,m}(x/R) xi_j(y) / R^{(n-1)/2} on dB_R x T.
struct BoundaryData {
    std::vector<ModeIndex> basis;
    Eigen::VectorXcd coeff;

    BoundaryData() = default;
    BoundaryData(std::vector<ModeIndex> b, Eigen::VectorXcd c);
    int size() const { return int(basis.size()); }
};

/// sqrt( sum (1 + ell^2 + j^2)^s |f_i|^2 )
double sobolev_norm(const BoundaryData& f, double s);

/// Restriction onto a target basis; every target index must be present in f.
BoundaryData project_admissible(const BoundaryData& f, const std::vector<ModeIndex>& target);

/// Boundary evaluation grid. For n=2: uniform theta; for n=3:
/// Gauss-Legendre in cos(polar) x uniform azimuth so that analyze() inverts
/// synthesize() exactly on resolved data. The torus grid is uniform.
struct BoundaryGrid {
    int n = 2;
    double R = 1.5;
    std::vector<double> ang1;     // theta (n=2) or polar angle (n=3)
    std::vector<double> ang1_w;   // angular quadrature weights (unit sphere)
    std::vector<double> ang2;     // azimuth (n=3 only)
    std::vector<double> y;
    int angular_points() const {
        return int(ang1.size()) * (n == 3 ? int(ang2.size()) : 1);
    }
};

BoundaryGrid make_boundary_grid(int n, double R, int n_ang, int n_y);

/// Basis function value at a grid point (includes the R^{-(n-1)/2} factor).
Complex basis_value(const ModeIndex& idx, int n, double R, double a1, double a2, double yv);

/// Pointwise sums sum_i f_i * basisfunction; rows = angular points
/// (n=3: polar-major), cols = torus points.
Eigen::MatrixXcd synthesize(const BoundaryData& f, const BoundaryGrid& grid);

/// Coefficients of grid values against the given basis (discrete
/// orthogonality; exact for resolved data).
BoundaryData analyze(const Eigen::MatrixXcd& values, const std::vector<ModeIndex>& basis,
                     const BoundaryGrid& grid);

/// JSON export: {"basis": [[j,ell,m],...], "coeff": [[re,im],...]}
std::string boundary_to_json(const BoundaryData& f);
BoundaryData boundary_from_json(const std::string& text);

/// Real orthonormal spherical harmonic Y_{ell,m}(polar, azimuth), n=3.
double real_sph_harm(int ell, int m, double polar, double azimuth);

}  // namespace cyldtn
