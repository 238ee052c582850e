#pragma once

#include <complex>

namespace cyldtn {

using Complex = std::complex<double>;

/// Bessel value in split representation: result = value * exp(log_scale).
/// |value| is kept within [1e-2, 1e2] so products and ratios of far
/// under/overflowing quantities stay representable.
struct ScaledBessel {
    Complex value{0.0, 0.0};
    double log_scale = 0.0;

    Complex unscaled() const { return value * std::exp(log_scale); }
};

/// Modified Bessel function of the first kind, real order nu >= 0,
/// complex argument with Re z > 0. Relative accuracy ~1e-13 for
/// nu <= 200, |z| <= 1e4.
ScaledBessel bessel_i(double nu, Complex z);

/// Modified Bessel function of the second kind, same domain as bessel_i.
ScaledBessel bessel_k(double nu, Complex z);

struct BesselLogDerivatives {
    Complex k_ratio;  // K_nu'(z) / K_nu(z)
    Complex i_ratio;  // I_nu'(z) / I_nu(z)
};

/// Logarithmic derivatives of K and I, computed from scaled internals
/// without forming unscaled values.
BesselLogDerivatives log_derivatives(double nu, Complex z);

/// P_nu(z) = I_nu(z) * K_nu(z). The scale factors of the two pieces
/// cancel exactly in this product.
Complex p_product(double nu, Complex z);

}  // namespace cyldtn
