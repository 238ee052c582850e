#include "cyldtn/exterior.hpp"

#include <cmath>

#include "cyldtn/specfun.hpp"

namespace cyldtn {

namespace {

// z_j with Re z > 0, rejecting arguments on the branch cut [0, inf) of -E_j.
Complex principal_root(Complex k, double E, int j) {
    const Complex ej = shifted_energy(k, E, j);
    if (ej.imag() == 0.0 && ej.real() >= 0.0)
        throw std::domain_error(
            "exterior: mode j=" + std::to_string(j) +
            " has E_j in [0, inf); no L^2 exterior solution (Rellich)");
    return std::sqrt(-ej);
}

}  // namespace

ExteriorDtN exterior_dtn_diag(Complex k, double E, const std::vector<ModeIndex>& basis,
                              int n, double R) {
    const int ell0 = min_angular_index(n);
    ExteriorDtN out;
    out.basis = basis;
    out.diagonal.resize(basis.size());
    for (int i = 0; i < int(basis.size()); ++i) {
        const ModeIndex& idx = basis[i];
        const Complex ej = shifted_energy(k, E, idx.j);
        const bool zero_class = (std::abs(ej) <= 1e-12 * (1.0 + std::abs(E)));
        if (zero_class) {
            if (idx.ell < ell0)
                throw std::domain_error("exterior: zero-class mode with ell < ell0(n)");
            out.diagonal[i] = Complex((2.0 - n - idx.ell) / R, 0.0);
            continue;
        }
        const Complex z = principal_root(k, E, idx.j);
        if (!(z.real() > 0.0))
            throw std::domain_error("exterior: principal root has Re z <= 0");
        const double nu = 0.5 * n + idx.ell - 1.0;
        const auto d = log_derivatives(nu, z * R);
        out.diagonal[i] = (1.0 - 0.5 * n) / R + z * d.k_ratio;
    }
    return out;
}

std::vector<Complex> exterior_field(const BoundaryData& f, Complex k, double E, int n,
                                    double R, const std::vector<ExteriorPoint>& points) {
    for (const auto& p : points)
        if (p.r <= R) throw std::invalid_argument("exterior_field: points must have r > R");

    const int ell0 = min_angular_index(n);
    // Per-index radial factors cache: the angular/torus part varies per point.
    std::vector<Complex> out(points.size(), Complex(0.0, 0.0));
    for (int i = 0; i < f.size(); ++i) {
        const ModeIndex& idx = f.basis[i];
        if (f.coeff[i] == Complex(0.0, 0.0)) continue;
        const Complex ej = shifted_energy(k, E, idx.j);
        const bool zero_class = (std::abs(ej) <= 1e-12 * (1.0 + std::abs(E)));
        Complex z;
        double nu = 0.0;
        ScaledBessel kR;
        if (zero_class) {
            if (idx.ell < ell0)
                throw std::domain_error("exterior_field: zero-class mode with ell < ell0(n)");
        } else {
            z = principal_root(k, E, idx.j);
            nu = 0.5 * n + idx.ell - 1.0;
            kR = bessel_k(nu, z * R);
        }
        for (std::size_t p = 0; p < points.size(); ++p) {
            const auto& pt = points[p];
            Complex radial;
            if (zero_class) {
                radial = std::pow(pt.r / R, 2.0 - n - idx.ell);
            } else {
                const ScaledBessel kr = bessel_k(nu, z * pt.r);
                radial = std::pow(pt.r / R, 1.0 - 0.5 * n) * (kr.value / kR.value) *
                         std::exp(kr.log_scale - kR.log_scale);
            }
            out[p] += f.coeff[i] * radial *
                      basis_value(idx, n, R, pt.ang1, pt.ang2, pt.y);
        }
    }
    return out;
}

}  // namespace cyldtn
