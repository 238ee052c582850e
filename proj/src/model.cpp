#include "cyldtn/model.hpp"

#include <algorithm>
#include <cmath>

namespace cyldtn {

namespace {
constexpr double kTwoPi = 6.28318530717958647692;
}

double PotentialTerm::radial_value(double r) const {
    if (r >= 1.0) return 0.0;
    switch (profile) {
        case RadialProfile::Well:
            return (r < well_radius) ? amplitude : 0.0;
        case RadialProfile::Gaussian: {
            // Gaussian times a C^inf cutoff vanishing at r = 1
            const double bump = std::exp(1.0 - 1.0 / (1.0 - r * r));
            return amplitude * std::exp(-(r * r) / (sigma * sigma)) * bump;
        }
    }
    return 0.0;
}

Complex PotentialTerm::fourier(int w) const {
    const int a = std::abs(w);
    if (a >= int(coeff.size())) return {0.0, 0.0};
    return (w >= 0) ? coeff[a] : std::conj(coeff[a]);
}

double PotentialSpec::evaluate(double r, double y) const {
    if (r >= 1.0) return 0.0;
    double v = 0.0;
    for (const auto& t : terms) {
        const double p = t.radial_value(r);
        if (p == 0.0) continue;
        double f = t.coeff.empty() ? 0.0 : t.coeff[0].real();
        for (int w = 1; w < int(t.coeff.size()); ++w) {
            const Complex phase(std::cos(kTwoPi * w * y), std::sin(kTwoPi * w * y));
            f += 2.0 * (t.coeff[w] * phase).real();
        }
        v += p * f;
    }
    return v;
}

int PotentialSpec::max_coupling() const {
    int w = 0;
    for (const auto& t : terms)
        for (int a = 1; a < int(t.coeff.size()); ++a)
            if (std::abs(t.coeff[a]) != 0.0) w = std::max(w, a);
    return w;
}

double PotentialSpec::discontinuity_radius() const {
    double edge = 1.0;
    bool found = false;
    for (const auto& t : terms) {
        if (t.profile != RadialProfile::Well || t.amplitude == 0.0) continue;
        if (!found) {
            edge = t.well_radius;
            found = true;
        } else if (t.well_radius != edge) {
            return 1.0;  // multiple distinct edges: fall back to the support edge
        }
    }
    return found ? edge : 1.0;
}

void PotentialSpec::validate() const {
    for (const auto& t : terms) {
        if (t.coeff.empty()) throw std::invalid_argument("potential term has no coefficients");
        if (std::abs(t.coeff[0].imag()) > 0.0)
            throw std::invalid_argument("coeff_0 must be real for a real-valued potential");
        if (t.profile == RadialProfile::Well &&
            (t.well_radius <= 0.0 || t.well_radius > 1.0))
            throw std::invalid_argument("well_radius must lie in (0, 1]");
        if (t.profile == RadialProfile::Gaussian && t.sigma <= 0.0)
            throw std::invalid_argument("sigma must be positive");
    }
}

double evaluate_potential(const PotentialSpec& spec, double r, double /*angular*/, double y) {
    return spec.evaluate(r, y - std::floor(y));
}

void WaveguideConfig::validate() const {
    if (n != 2 && n != 3) throw std::invalid_argument("n: transverse dimension must be 2 or 3");
    if (!(radius > 1.0)) throw std::invalid_argument("radius: cutoff must satisfy R > 1");
    if (trunc.ell_max < 1 || trunc.j_max < 1 || trunc.n_r < 8 || trunc.q_disc < 1 ||
        trunc.j_disc < 1)
        throw std::invalid_argument("truncation counts must be >= 1 (n_r >= 8)");
    if (trunc.q_disc < trunc.ell_max + 2)
        throw std::invalid_argument("q_disc: interior angular truncation must be >= ell_max + 2");
    if (trunc.j_disc < trunc.j_max)
        throw std::invalid_argument("j_disc: interior torus truncation must be >= j_max");
    if (tol.eps_cross_rel <= 0.0 || tol.kernel_tol <= 0.0 || tol.refine_tol <= 0.0)
        throw std::invalid_argument("tolerances must be positive");
    potential.validate();
}

Complex shifted_energy(Complex k, double E, int j) {
    const Complex shift = k + kTwoPi * double(j);
    return Complex(E, 0.0) - shift * shift;
}

int min_angular_index(int n) {
    if (n < 2) throw std::invalid_argument("min_angular_index: requires n >= 2");
    if (n == 2) return 2;
    if (n <= 4) return 1;
    return 0;
}

std::map<int, ModeClass> classify_modes(double k, double E, int J, double eps_cross) {
    if (eps_cross <= 0.0) throw std::invalid_argument("classify_modes: eps_cross must be > 0");
    std::map<int, ModeClass> out;
    const double exact_eps = 1e-12 * (1.0 + std::abs(E));
    for (int j = -J; j <= J; ++j) {
        const Complex ej = shifted_energy(Complex(k, 0.0), E, j);
        ModeClass mc;
        mc.shifted = ej;
        const double v = ej.real();
        if (std::abs(v) <= exact_eps) {
            mc.sign = ModeSign::Zero;
            mc.near_crossing = true;
        } else {
            mc.sign = (v < 0.0) ? ModeSign::Negative : ModeSign::Positive;
            mc.near_crossing = std::abs(v) <= eps_cross;
        }
        out.emplace(j, mc);
    }
    return out;
}

namespace {

void push_angular(std::vector<ModeIndex>& basis, int n, int j, int ell_lo, int ell_hi) {
    for (int ell = ell_lo; ell <= ell_hi; ++ell) {
        if (n == 2) {
            if (ell == 0) {
                basis.push_back({j, 0, 0});
            } else {
                basis.push_back({j, ell, -ell});
                basis.push_back({j, ell, ell});
            }
        } else {
            for (int m = -ell; m <= ell; ++m) basis.push_back({j, ell, m});
        }
    }
}

}  // namespace

std::vector<ModeIndex> admissible_basis(double k, double E, int n, const Truncation& trunc,
                                        double eps_cross, bool exact_zero) {
    const auto classes = classify_modes(k, E, trunc.j_max, eps_cross);
    int zero_count = 0;
    for (const auto& [j, mc] : classes)
        if (mc.sign == ModeSign::Zero) ++zero_count;
    if (zero_count > 1)
        throw std::runtime_error(
            "admissible_basis: two or more hypersurfaces meet at this (k, E); not supported");

    std::vector<ModeIndex> basis;
    const int ell0 = min_angular_index(n);
    for (const auto& [j, mc] : classes) {
        switch (mc.sign) {
            case ModeSign::Negative:
                if (mc.near_crossing) throw NearCrossingError(j, mc.shifted.real());
                push_angular(basis, n, j, 0, trunc.ell_max);
                break;
            case ModeSign::Zero:
                if (!exact_zero) throw NearCrossingError(j, mc.shifted.real());
                push_angular(basis, n, j, ell0, trunc.ell_max);
                break;
            case ModeSign::Positive:
                if (mc.near_crossing) throw NearCrossingError(j, mc.shifted.real());
                break;  // no L^2 exterior solution on these modes
        }
    }
    std::sort(basis.begin(), basis.end());
    return basis;
}

}  // namespace cyldtn
