#include "cyldtn/specfun.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

// Modified Bessel functions I_nu, K_nu of real order and complex argument,
// restricted to Re z > 0.
//
// Scheme (Temme / Thompson-Barnett):
//   1. Split nu = mu + nl with mu in [-1/2, 1/2).
//   2. K_mu, K_{mu+1}: Temme's series for |z| <= 2, Steed's continued
//      fraction CF2 for |z| > 2 (valid in the right half-plane).
//   3. Upward recurrence K_{m+1} = K_{m-1} + (2m/z) K_m to order nu,
//      renormalizing into a log scale as magnitudes grow.
//   4. r = I_{nu+1}/I_nu from the continued fraction CF1 (Lentz).
//   5. I_nu from the Wronskian  I_nu K_{nu+1} + I_{nu+1} K_nu = 1/z.
//
// K is carried scaled by e^{+Re z} through CF2 so no intermediate value
// over- or underflows for |z| up to ~1e4.

namespace cyldtn {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kEulerGamma = 0.57721566490153286061;
constexpr double kZeta3 = 1.20205690315959428540;
constexpr double kSeriesEps = 1e-17;
constexpr int kMaxIter = 200000;

void renormalize(Complex& value, double& log_scale) {
    double a = std::abs(value);
    if (a == 0.0 || !std::isfinite(a)) return;
    if (a < 1e-2 || a > 1e2) {
        double s = std::round(std::log(a));
        value *= std::exp(-s);
        log_scale += s;
    }
}

// gam1 = [1/Gamma(1-mu) - 1/Gamma(1+mu)] / (2 mu),  gam2 = the mean.
// Near mu = 0 the difference is evaluated by its Taylor expansion.
void gamma_pair(double mu, double& gam1, double& gam2, double& gampl, double& gammi) {
    gampl = 1.0 / std::tgamma(1.0 + mu);
    gammi = 1.0 / std::tgamma(1.0 - mu);
    if (std::abs(mu) < 1e-4) {
        const double c3 = kEulerGamma * kEulerGamma * kEulerGamma / 6.0
                          - kEulerGamma * kPi * kPi / 12.0 + kZeta3 / 3.0;
        gam1 = kEulerGamma + mu * mu * c3;
    } else {
        gam1 = (gammi - gampl) / (2.0 * mu);
    }
    gam2 = 0.5 * (gammi + gampl);
}

// Temme's series for K_mu(z), K_{mu+1}(z), |z| <= 2, |mu| <= 1/2.
void temme_k(double mu, Complex z, Complex& kmu, Complex& kmu1) {
    const double mu2 = mu * mu;
    const Complex d = -std::log(0.5 * z);
    const Complex e = mu * d;
    double fact = 1.0;
    if (mu != 0.0) {
        const double pimu = kPi * mu;
        fact = pimu / std::sin(pimu);
    }
    Complex fact2 = (std::abs(e) < 1e-4) ? 1.0 + e * e / 6.0 : std::sinh(e) / e;
    double gam1, gam2, gampl, gammi;
    gamma_pair(mu, gam1, gam2, gampl, gammi);

    Complex ff = fact * (gam1 * std::cosh(e) + gam2 * fact2 * d);
    Complex sum = ff;
    const Complex ee = std::exp(e);
    Complex p = 0.5 * ee / gampl;
    Complex q = 0.5 / (ee * gammi);
    Complex c = 1.0;
    const Complex z24 = 0.25 * z * z;
    Complex sum1 = p;
    for (int i = 1; i < 1000; ++i) {
        ff = (double(i) * ff + p + q) / (double(i) * i - mu2);
        c *= z24 / double(i);
        p /= (double(i) - mu);
        q /= (double(i) + mu);
        const Complex del = c * ff;
        sum += del;
        sum1 += c * (p - double(i) * ff);
        if (std::abs(del) < std::abs(sum) * kSeriesEps) break;
    }
    kmu = sum;
    kmu1 = sum1 * (2.0 / z);
}

// Steed's CF2 for K_mu(z) e^{+z}, |z| > 2, Re z > 0.
void cf2_k_scaled(double mu, Complex z, Complex& kmu_scaled, Complex& kmu1_scaled) {
    const double mu2 = mu * mu;
    Complex b = 2.0 * (1.0 + z);
    Complex d = 1.0 / b;
    Complex h = d, delh = d;
    Complex q1 = 0.0, q2 = 1.0;
    const double a1 = 0.25 - mu2;
    Complex q = a1, c = a1;
    double a = -a1;
    Complex s = 1.0 + q * delh;
    int i = 2;
    for (; i <= kMaxIter; ++i) {
        a -= 2.0 * (i - 1);
        c = -a * c / double(i);
        const Complex qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        const Complex dels = q * delh;
        s += dels;
        if (std::abs(dels) <= std::numeric_limits<double>::epsilon() * std::abs(s)) break;
    }
    if (i > kMaxIter) throw std::runtime_error("bessel_k: CF2 did not converge");
    h = a1 * h;
    kmu_scaled = std::sqrt(kPi / (2.0 * z)) / s;
    kmu1_scaled = kmu_scaled * (mu + z + 0.5 - h) / z;
}

// CF1 (Lentz) for the ratio I_{nu+1}(z) / I_nu(z).
Complex cf1_i_ratio(double nu, Complex z) {
    const double tiny = 1e-300;
    Complex f = tiny, C = f, D = 0.0;
    int i = 1;
    for (; i <= kMaxIter; ++i) {
        const Complex b = 2.0 * (nu + i) / z;
        D = b + D;
        if (D == Complex(0.0)) D = tiny;
        C = b + 1.0 / C;
        if (C == Complex(0.0)) C = tiny;
        D = 1.0 / D;
        const Complex delta = C * D;
        f *= delta;
        if (std::abs(delta - 1.0) < 4.0 * std::numeric_limits<double>::epsilon()) break;
    }
    if (i > kMaxIter) throw std::runtime_error("bessel_i: CF1 did not converge");
    return f;
}

struct BesselIKCore {
    Complex i_value;   // I_nu = i_value * exp(i_scale)
    double i_scale;
    Complex k_value;   // K_nu = k_value * exp(k_scale)
    Complex k1_value;  // K_{nu+1} = k1_value * exp(k_scale)
    double k_scale;
    Complex ratio;     // I_{nu+1} / I_nu
};

BesselIKCore besselik(double nu, Complex z) {
    if (nu < 0.0) throw std::invalid_argument("besselik: order must be >= 0");
    if (!(z.real() > 0.0)) throw std::domain_error("besselik: requires Re z > 0");

    const int nl = int(nu + 0.5);
    const double mu = nu - nl;  // in [-1/2, 1/2)

    Complex kmu, kmu1;
    double kscale = 0.0;
    if (std::abs(z) <= 2.0) {
        temme_k(mu, z, kmu, kmu1);
    } else {
        cf2_k_scaled(mu, z, kmu, kmu1);
        // carried as K * e^{z}; fold the oscillatory part into the value
        kscale = -z.real();
        const Complex osc = std::exp(Complex(0.0, -z.imag()));
        kmu *= osc;
        kmu1 *= osc;
    }
    // keep the (K_mu, K_{mu+1}) pair on one shared scale
    {
        const double a = std::max(std::abs(kmu), std::abs(kmu1));
        if (a > 0.0 && std::isfinite(a) && (a < 1e-2 || a > 1e2)) {
            const double s = std::round(std::log(a));
            const double f = std::exp(-s);
            kmu *= f;
            kmu1 *= f;
            kscale += s;
        }
    }
    for (int l = 1; l <= nl; ++l) {
        const double m = mu + l;
        const Complex knext = kmu + kmu1 * (2.0 * m / z);
        kmu = kmu1;
        kmu1 = knext;
        double a = std::abs(kmu1);
        if (a > 1e2) {
            const double s = std::round(std::log(a));
            const double f = std::exp(-s);
            kmu *= f;
            kmu1 *= f;
            kscale += s;
        }
    }

    const Complex r = cf1_i_ratio(nu, z);

    // Wronskian: I_nu K_{nu+1} + I_{nu+1} K_nu = 1/z
    const Complex denom = z * (kmu1 + r * kmu);
    BesselIKCore core;
    core.i_value = 1.0 / denom;
    core.i_scale = -kscale;
    core.k_value = kmu;
    core.k1_value = kmu1;
    core.k_scale = kscale;
    core.ratio = r;
    renormalize(core.i_value, core.i_scale);
    return core;
}

}  // namespace

ScaledBessel bessel_i(double nu, Complex z) {
    const BesselIKCore core = besselik(nu, z);
    return ScaledBessel{core.i_value, core.i_scale};
}

ScaledBessel bessel_k(double nu, Complex z) {
    const BesselIKCore core = besselik(nu, z);
    ScaledBessel out{core.k_value, core.k_scale};
    renormalize(out.value, out.log_scale);
    return out;
}

BesselLogDerivatives log_derivatives(double nu, Complex z) {
    const BesselIKCore core = besselik(nu, z);
    BesselLogDerivatives d;
    // K_nu' = (nu/z) K_nu - K_{nu+1};  I_nu' = (nu/z) I_nu + I_{nu+1}
    d.k_ratio = nu / z - core.k1_value / core.k_value;
    d.i_ratio = nu / z + core.ratio;
    return d;
}

Complex p_product(double nu, Complex z) {
    const BesselIKCore core = besselik(nu, z);
    // I_nu K_nu = K_nu / (z (K_{nu+1} + r K_nu)); scales cancel exactly.
    return core.k_value / (z * (core.k1_value + core.ratio * core.k_value));
}

}  // namespace cyldtn
