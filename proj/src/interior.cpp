#include "cyldtn/interior.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "chebutil.hpp"
#include "cyldtn/specfun.hpp"

namespace cyldtn {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

int refine_count(double arg, int fallback) {
    // resolve e^{z r} on an element: point count ~ arg + 6 arg^{1/3}
    const int need = int(std::ceil(0.5 * (arg + 6.0 * std::cbrt(std::max(arg, 0.0))))) + 4;
    return std::max(fallback, need);
}

struct Elements {
    bool two = true;
    double a = 1.0;  // interface radius
    double R = 1.5;
    int NA = 24, NB = 16;
    Eigen::VectorXd rA, rB;
    Eigen::MatrixXd D1A_even, D2A_even, D1A_odd, D2A_odd;  // d/dr on (0, a]
    Eigen::MatrixXd D1B, D2B;                              // d/dr on [a, R]
    Eigen::VectorXd xfullA;                                // full [-1,1] grid
    Eigen::VectorXd baryA, baryB;

    int ntot() const { return two ? NA + NB : NA; }
};

Elements build_elements(const WaveguideConfig& cfg, Complex k, double E, double R,
                        const Discretization& disc) {
    Elements el;
    el.R = R;
    el.a = std::min(cfg.potential.discontinuity_radius(), R);
    el.two = (R - el.a) > 1e-8;

    int NA = std::max(8, int(std::lround(0.6 * disc.n_r)));
    int NB = std::max(8, disc.n_r - NA);
    if (!el.two) NA = std::max(8, disc.n_r);

    if (disc.stiffness_refine) {
        double z2max = 0.0;
        for (int j = -disc.J; j <= disc.J; ++j)
            z2max = std::max(z2max, std::abs(-shifted_energy(k, E, j)));
        double pot = 0.0;
        for (const auto& t : cfg.potential.terms) {
            double f = t.coeff.empty() ? 0.0 : std::abs(t.coeff[0]);
            for (int w = 1; w < int(t.coeff.size()); ++w) f += 2.0 * std::abs(t.coeff[w]);
            pot += std::abs(t.amplitude) * f;
        }
        const double zmax = std::sqrt(z2max);
        const double zA = std::sqrt(z2max + pot);
        if (el.two) {
            NA = refine_count(zA * el.a, NA);
            const double h = 0.5 * (R - el.a);
            NB = std::max(
                NB, int(std::ceil(zmax * h + 6.0 * std::cbrt(std::max(zmax * h, 0.0)))) + 4);
        } else {
            NA = refine_count(zA * R, NA);
        }
        NA = std::max(NA, disc.Q / 2 + 6);
    }
    el.NA = NA;
    el.NB = el.two ? NB : 0;

    const int mf = 2 * el.NA;
    el.xfullA = cheb::nodes(mf);
    const Eigen::MatrixXd D = cheb::diff_matrix(mf);
    const Eigen::MatrixXd D2 = D * D;
    const double sa = el.two ? el.a : R;  // element A covers (0, sa]
    el.D1A_even = cheb::fold(D, el.NA, +1) / sa;
    el.D1A_odd = cheb::fold(D, el.NA, -1) / sa;
    el.D2A_even = cheb::fold(D2, el.NA, +1) / (sa * sa);
    el.D2A_odd = cheb::fold(D2, el.NA, -1) / (sa * sa);
    el.rA = sa * el.xfullA.head(el.NA);
    el.baryA = cheb::bary_weights(el.xfullA);

    if (el.two) {
        const Eigen::VectorXd xb = cheb::nodes(el.NB);
        const double c1 = 0.5 * (R - el.a);
        const Eigen::MatrixXd Db = cheb::diff_matrix(el.NB) / c1;
        el.D1B = Db;
        el.D2B = Db * Db;
        el.rB.resize(el.NB);
        for (int i = 0; i < el.NB; ++i) el.rB[i] = 0.5 * (R + el.a) + c1 * xb[i];
        el.rB[0] = R;
        el.rB[el.NB - 1] = el.a;
        el.baryB = cheb::bary_weights(el.rB);
    }
    return el;
}

// Fourier coefficient of the potential at torus offset w, evaluated at r.
Complex potential_coupling(const PotentialSpec& pot, int w, double r) {
    Complex v(0.0, 0.0);
    for (const auto& t : pot.terms) {
        const Complex c = t.fourier(w);
        if (c == Complex(0.0, 0.0)) continue;
        const double p = t.radial_value(r);
        if (p != 0.0) v += p * c;
    }
    return v;
}

}  // namespace

struct InteriorOperator::Impl {
    WaveguideConfig cfg;
    Complex k;
    double E;
    double R;
    Discretization disc;
    Elements el;
    int n = 2;
    bool decoupled = false;  // no torus coupling: solve per (ell, j)
    mutable bool factorized = false;
    mutable std::vector<Eigen::PartialPivLU<Eigen::MatrixXcd>> lu_big;                // [ell]
    mutable std::vector<std::vector<Eigen::PartialPivLU<Eigen::MatrixXcd>>> lu_small; // [ell][jj]
    mutable double min_pivot = 0.0;
    mutable double max_pivot = 0.0;
    mutable std::map<int, Eigen::MatrixXcd> reduced_cache;  // key ell*4096 + jj (or jj=4095)

    int nj() const { return 2 * disc.J + 1; }
    int block_dim() const { return nj() * el.ntot(); }
    int dirichlet_node() const { return el.two ? el.NA : 0; }

    const Eigen::MatrixXd& D1A(int ell) const { return (ell % 2 == 0) ? el.D1A_even : el.D1A_odd; }
    const Eigen::MatrixXd& D2A(int ell) const { return (ell % 2 == 0) ? el.D2A_even : el.D2A_odd; }

    Eigen::MatrixXd radial_operator_A(int ell) const {
        const int NA = el.NA;
        Eigen::MatrixXd L = -D2A(ell);
        const Eigen::MatrixXd& D1 = D1A(ell);
        const double cl = double(ell) * (ell + n - 2);
        for (int i = 0; i < NA; ++i) {
            const double r = el.rA[i];
            L.row(i) -= ((n - 1.0) / r) * D1.row(i);
            L(i, i) += cl / (r * r);
        }
        return L;
    }
    Eigen::MatrixXd radial_operator_B(int ell) const {
        const int NB = el.NB;
        Eigen::MatrixXd L = -el.D2B;
        const double cl = double(ell) * (ell + n - 2);
        for (int i = 0; i < NB; ++i) {
            const double r = el.rB[i];
            L.row(i) -= ((n - 1.0) / r) * el.D1B.row(i);
            L(i, i) += cl / (r * r);
        }
        return L;
    }

    // Writes one torus mode's rows into S at offsets (rbase, cbase); the
    // potential coupling columns land at the caller-supplied stride.
    void fill_single_mode(Eigen::MatrixXcd& S, int rbase, int cbase, int ell, int j,
                          bool with_energy) const {
        const Eigen::MatrixXd LA = radial_operator_A(ell);
        const Complex tau = -shifted_energy(k, 0.0, j);
        const Complex shift = with_energy ? tau - E : tau;
        for (int i = 1; i < el.NA; ++i) {
            for (int c = 0; c < el.NA; ++c) S(rbase + i, cbase + c) += LA(i, c);
            S(rbase + i, cbase + i) += shift;
        }
        if (el.two) {
            const Eigen::MatrixXd LB = radial_operator_B(ell);
            for (int i = 1; i < el.NB - 1; ++i) {
                for (int c = 0; c < el.NB; ++c)
                    S(rbase + el.NA + i, cbase + el.NA + c) += LB(i, c);
                S(rbase + el.NA + i, cbase + el.NA + i) += shift;
            }
            S(rbase + 0, cbase + 0) += 1.0;                          // continuity
            S(rbase + 0, cbase + el.NA + el.NB - 1) -= 1.0;
            const int drow = rbase + el.NA + el.NB - 1;              // derivative match
            for (int c = 0; c < el.NA; ++c) S(drow, cbase + c) += D1A(ell)(0, c);
            for (int c = 0; c < el.NB; ++c) S(drow, cbase + el.NA + c) -= el.D1B(el.NB - 1, c);
            S(rbase + el.NA, cbase + el.NA) += 1.0;                  // Dirichlet at R
        } else {
            S(rbase + 0, cbase + 0) += 1.0;                          // Dirichlet at R
        }
    }

    void add_potential(Eigen::MatrixXcd& S, int ell, int jrow, int rbase, int stride) const {
        (void)ell;
        const int J = disc.J;
        const int wmax = cfg.potential.max_coupling();
        auto add_node = [&](int i, double r, int node) {
            for (int j2 = std::max(-J, jrow - wmax); j2 <= std::min(J, jrow + wmax); ++j2) {
                const Complex vw = potential_coupling(cfg.potential, jrow - j2, r);
                if (vw != Complex(0.0, 0.0)) S(rbase + i, (j2 + J) * stride + node) += vw;
            }
        };
        for (int i = 1; i < el.NA; ++i) add_node(i, el.rA[i], i);
        if (el.two)
            for (int i = 1; i < el.NB - 1; ++i)
                if (el.rB[i] < 1.0) add_node(el.NA + i, el.rB[i], el.NA + i);
    }

    // Diagonal part of the separable potential (w = 0 Fourier coefficient).
    void add_potential_diag(Eigen::MatrixXcd& S, int base) const {
        for (int i = 1; i < el.NA; ++i)
            S(base + i, base + i) += potential_coupling(cfg.potential, 0, el.rA[i]);
        if (el.two)
            for (int i = 1; i < el.NB - 1; ++i)
                if (el.rB[i] < 1.0)
                    S(base + el.NA + i, base + el.NA + i) +=
                        potential_coupling(cfg.potential, 0, el.rB[i]);
    }

    Eigen::MatrixXcd assemble_small(int ell, int j, bool with_energy) const {
        const int Nt = el.ntot();
        Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(Nt, Nt);
        fill_single_mode(S, 0, 0, ell, j, with_energy);
        add_potential_diag(S, 0);
        return S;
    }

    Eigen::MatrixXcd assemble_big(int ell, bool with_energy) const {
        const int NJ = nj(), Nt = el.ntot();
        Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(NJ * Nt, NJ * Nt);
        for (int jj = 0; jj < NJ; ++jj) {
            fill_single_mode(S, jj * Nt, jj * Nt, ell, jj - disc.J, with_energy);
            add_potential(S, ell, jj - disc.J, jj * Nt, Nt);
        }
        return S;
    }

    // Eliminate the constraint rows/unknowns of a block holding `njj` torus
    // modes; the result is the plain (energy-free) Dirichlet operator.
    Eigen::MatrixXcd reduce(const Eigen::MatrixXcd& S, int njj) const {
        const int Nt = el.ntot();
        std::vector<int> fr, cr;
        for (int jj = 0; jj < njj; ++jj) {
            const int base = jj * Nt;
            for (int i = 1; i < el.NA; ++i) fr.push_back(base + i);
            if (el.two) {
                for (int i = 1; i < el.NB - 1; ++i) fr.push_back(base + el.NA + i);
                cr.push_back(base + 0);
                cr.push_back(base + el.NA);
                cr.push_back(base + el.NA + el.NB - 1);
            } else {
                cr.push_back(base + 0);
            }
        }
        const int nf = int(fr.size()), nc = int(cr.size());
        Eigen::MatrixXcd Aff(nf, nf), Afc(nf, nc), Ccf(nc, nf), Ccc(nc, nc);
        for (int r = 0; r < nf; ++r) {
            for (int c = 0; c < nf; ++c) Aff(r, c) = S(fr[r], fr[c]);
            for (int c = 0; c < nc; ++c) Afc(r, c) = S(fr[r], cr[c]);
        }
        for (int r = 0; r < nc; ++r) {
            for (int c = 0; c < nf; ++c) Ccf(r, c) = S(cr[r], fr[c]);
            for (int c = 0; c < nc; ++c) Ccc(r, c) = S(cr[r], cr[c]);
        }
        return Aff - Afc * Ccc.partialPivLu().solve(Ccf);
    }

    const Eigen::MatrixXcd& reduced_block(int ell, int jj) const {
        const int key = ell * 4096 + jj;
        auto it = reduced_cache.find(key);
        if (it != reduced_cache.end()) return it->second;
        Eigen::MatrixXcd red = decoupled ? reduce(assemble_small(ell, jj - disc.J, false), 1)
                                         : reduce(assemble_big(ell, false), nj());
        return reduced_cache.emplace(key, std::move(red)).first->second;
    }

    // Solve the full constrained block (columns of rhs laid out over the
    // (jj, node) index), reusing the per-mode factorizations when decoupled.
    Eigen::MatrixXcd solve_block(int ell, const Eigen::MatrixXcd& rhs) const {
        if (!decoupled) return lu_big[ell].solve(rhs);
        const int Nt = el.ntot();
        Eigen::MatrixXcd sol(rhs.rows(), rhs.cols());
        for (int jj = 0; jj < nj(); ++jj)
            sol.middleRows(jj * Nt, Nt) = lu_small[ell][jj].solve(rhs.middleRows(jj * Nt, Nt));
        return sol;
    }

    void track_pivots(const Eigen::PartialPivLU<Eigen::MatrixXcd>& lu) const {
        const auto diag = lu.matrixLU().diagonal();
        for (int i = 0; i < diag.size(); ++i) {
            const double a = std::abs(diag[i]);
            min_pivot = std::min(min_pivot, a);
            max_pivot = std::max(max_pivot, a);
        }
    }

    // Factorize the constrained solve blocks on first use; near-singular
    // pivots signal Dirichlet-spectrum proximity.
    void ensure_factorized() const {
        if (factorized) return;
        min_pivot = std::numeric_limits<double>::max();
        max_pivot = 0.0;
        if (decoupled) {
            lu_small.resize(disc.Q + 1);
            for (int ell = 0; ell <= disc.Q; ++ell) {
                lu_small[ell].clear();
                lu_small[ell].reserve(nj());
                for (int jj = 0; jj < nj(); ++jj) {
                    lu_small[ell].emplace_back(assemble_small(ell, jj - disc.J, true));
                    track_pivots(lu_small[ell].back());
                }
            }
        } else {
            lu_big.clear();
            lu_big.reserve(disc.Q + 1);
            for (int ell = 0; ell <= disc.Q; ++ell) {
                lu_big.emplace_back(assemble_big(ell, true));
                track_pivots(lu_big.back());
            }
        }
        factorized = true;
        if (min_pivot < 1e-10 * max_pivot) throw DirichletProximityError(min_pivot);
    }
};

InteriorOperator::InteriorOperator(const WaveguideConfig& cfg, Complex k, double E, double R,
                                   const Discretization& disc)
    : impl_(std::make_unique<Impl>()) {
    impl_->cfg = cfg;
    impl_->k = k;
    impl_->E = E;
    impl_->R = R;
    impl_->disc = disc;
    impl_->n = cfg.n;
    impl_->el = build_elements(cfg, k, E, R, disc);
    impl_->decoupled = cfg.potential.max_coupling() == 0;
}

InteriorOperator::~InteriorOperator() = default;
InteriorOperator::InteriorOperator(InteriorOperator&&) noexcept = default;
InteriorOperator& InteriorOperator::operator=(InteriorOperator&&) noexcept = default;

Complex InteriorOperator::k() const { return impl_->k; }
double InteriorOperator::energy() const { return impl_->E; }
double InteriorOperator::radius() const { return impl_->R; }
double InteriorOperator::smallest_pivot() const {
    impl_->ensure_factorized();
    return impl_->min_pivot;
}

std::vector<double> InteriorOperator::radial_nodes() const {
    std::vector<double> r(impl_->el.rA.data(), impl_->el.rA.data() + impl_->el.NA);
    if (impl_->el.two)
        r.insert(r.end(), impl_->el.rB.data(), impl_->el.rB.data() + impl_->el.NB);
    return r;
}

Eigen::MatrixXcd InteriorOperator::dtn(const std::vector<ModeIndex>& basis) const {
    impl_->ensure_factorized();
    const auto& im = *impl_;
    const int J = im.disc.J, Nt = im.el.ntot(), NJ = im.nj();
    const int nb = int(basis.size());

    std::map<int, std::vector<int>> by_ell;
    for (int i = 0; i < nb; ++i) {
        if (basis[i].ell > im.disc.Q || std::abs(basis[i].j) > J)
            throw std::invalid_argument("interior dtn: basis exceeds discretization truncation");
        by_ell[basis[i].ell].push_back(i);
    }

    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(nb, nb);
    const int dnode = im.dirichlet_node();
    for (const auto& [ell, cols] : by_ell) {
        std::vector<int> jvals;
        for (int c : cols)
            if (std::find(jvals.begin(), jvals.end(), basis[c].j) == jvals.end())
                jvals.push_back(basis[c].j);
        Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(im.block_dim(), jvals.size());
        for (int c = 0; c < int(jvals.size()); ++c)
            rhs((jvals[c] + J) * Nt + dnode, c) = 1.0;
        const Eigen::MatrixXcd sol = im.solve_block(ell, rhs);
        Eigen::MatrixXcd du(NJ, jvals.size());
        for (int c = 0; c < int(jvals.size()); ++c) {
            for (int jj = 0; jj < NJ; ++jj) {
                Complex d(0.0, 0.0);
                if (im.el.two) {
                    for (int q = 0; q < im.el.NB; ++q)
                        d += im.el.D1B(0, q) * sol(jj * Nt + im.el.NA + q, c);
                } else {
                    const auto& D1 = im.D1A(ell);
                    for (int q = 0; q < im.el.NA; ++q) d += D1(0, q) * sol(jj * Nt + q, c);
                }
                du(jj, c) = d;
            }
        }
        for (int ci : cols) {
            const int jcol =
                int(std::find(jvals.begin(), jvals.end(), basis[ci].j) - jvals.begin());
            for (int ri = 0; ri < nb; ++ri) {
                if (basis[ri].ell != ell || basis[ri].m != basis[ci].m) continue;
                out(ri, ci) = du(basis[ri].j + J, jcol);
            }
        }
    }
    return out;
}

Eigen::MatrixXcd InteriorOperator::field(const BoundaryData& f, const std::vector<double>& r,
                                         const BoundaryGrid& grid) const {
    impl_->ensure_factorized();
    const auto& im = *impl_;
    const int J = im.disc.J, Nt = im.el.ntot();
    const double surf = std::pow(im.R, 0.5 * (im.n - 1));
    const int dnode = im.dirichlet_node();

    std::map<int, std::vector<int>> by_ell;
    for (int i = 0; i < f.size(); ++i) by_ell[f.basis[i].ell].push_back(i);

    const int na = grid.angular_points();
    const int ny = int(grid.y.size());
    const int n_az = grid.n == 3 ? int(grid.ang2.size()) : 1;
    Eigen::MatrixXcd vals = Eigen::MatrixXcd::Zero(int(r.size()) * na, ny);

    for (const auto& [ell, idxs] : by_ell) {
        std::map<int, Eigen::VectorXcd> rhs_by_m;
        for (int i : idxs) {
            auto it = rhs_by_m.find(f.basis[i].m);
            if (it == rhs_by_m.end())
                it = rhs_by_m.emplace(f.basis[i].m, Eigen::VectorXcd::Zero(im.block_dim()))
                         .first;
            it->second[(f.basis[i].j + J) * Nt + dnode] += f.coeff[i] / surf;
        }
        for (const auto& [m, rhs] : rhs_by_m) {
            const Eigen::VectorXcd sol = im.solve_block(ell, rhs);
            for (int jj = 0; jj < 2 * J + 1; ++jj) {
                const int j = jj - J;
                Eigen::VectorXcd wr(int(r.size()));
                Eigen::VectorXcd fullA(2 * im.el.NA);
                const double parity = (ell % 2 == 0) ? 1.0 : -1.0;
                for (int c = 0; c < im.el.NA; ++c) {
                    fullA[c] = sol(jj * Nt + c);
                    fullA[2 * im.el.NA - 1 - c] = parity * sol(jj * Nt + c);
                }
                const double sa = im.el.two ? im.el.a : im.R;
                for (int ir = 0; ir < int(r.size()); ++ir) {
                    const double rv = r[ir];
                    if (rv > im.R + 1e-12)
                        throw std::invalid_argument("interior field: r exceeds R");
                    if (im.el.two && rv >= im.el.a) {
                        Eigen::VectorXcd vb(im.el.NB);
                        for (int c = 0; c < im.el.NB; ++c) vb[c] = sol(jj * Nt + im.el.NA + c);
                        wr[ir] = cheb::bary_eval(im.el.rB, im.el.baryB, vb, rv);
                    } else {
                        wr[ir] = cheb::bary_eval(im.el.xfullA, im.el.baryA, fullA, rv / sa);
                    }
                }
                for (int ir = 0; ir < int(r.size()); ++ir) {
                    for (int a = 0; a < na; ++a) {
                        const double a1 = grid.ang1[a / n_az];
                        const double a2 = grid.n == 3 ? grid.ang2[a % n_az] : 0.0;
                        Complex ang;
                        if (grid.n == 2)
                            ang = std::exp(Complex(0.0, m * a1)) / std::sqrt(kTwoPi);
                        else
                            ang = real_sph_harm(ell, m, a1, a2);
                        for (int b = 0; b < ny; ++b) {
                            const Complex torus =
                                std::exp(Complex(0.0, kTwoPi * j * grid.y[b]));
                            vals(ir * na + a, b) += wr[ir] * ang * torus;
                        }
                    }
                }
            }
        }
    }
    return vals;
}

namespace {

double sigma_min_estimate(const Eigen::MatrixXcd& M) {
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(M);
    Eigen::VectorXcd x = Eigen::VectorXcd::Ones(M.rows()).normalized();
    double sigma = 0.0;
    for (int it = 0; it < 6; ++it) {
        const Eigen::VectorXcd y = lu.solve(x);
        const Eigen::VectorXcd w = lu.adjoint().solve(y);
        const double rho = w.norm();
        if (!(rho > 0.0) || !std::isfinite(rho)) return 0.0;
        sigma = 1.0 / std::sqrt(rho);
        x = w / rho;
    }
    return sigma;
}

}  // namespace

double InteriorOperator::dirichlet_clearance() const { return dirichlet_clearance_at(impl_->E); }

double InteriorOperator::dirichlet_clearance_at(double E) const {
    const auto& im = *impl_;
    double best = std::numeric_limits<double>::max();
    for (int ell = 0; ell <= im.disc.Q; ++ell) {
        if (im.decoupled) {
            for (int jj = 0; jj < im.nj(); ++jj) {
                Eigen::MatrixXcd M = im.reduced_block(ell, jj);
                M.diagonal().array() -= E;
                best = std::min(best, sigma_min_estimate(M));
            }
        } else {
            Eigen::MatrixXcd M = im.reduced_block(ell, 0);
            M.diagonal().array() -= E;
            best = std::min(best, sigma_min_estimate(M));
        }
    }
    return best;
}

std::vector<double> InteriorOperator::dirichlet_spectrum(int count) const {
    const auto& im = *impl_;
    std::vector<double> eigs;
    auto harvest = [&](const Eigen::MatrixXcd& red, int mult) {
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(red, false);
        double block_min = std::numeric_limits<double>::max();
        for (int i = 0; i < es.eigenvalues().size(); ++i) {
            const Complex ev = es.eigenvalues()[i];
            if (std::abs(ev.imag()) > 1e-6 * (1.0 + std::abs(ev.real()))) continue;
            for (int c = 0; c < mult; ++c) eigs.push_back(ev.real());
            block_min = std::min(block_min, ev.real());
        }
        return block_min;
    };
    for (int ell = 0; ell <= im.disc.Q; ++ell) {
        const int mult = (im.n == 2) ? (ell == 0 ? 1 : 2) : (2 * ell + 1);
        double block_min = std::numeric_limits<double>::max();
        if (im.decoupled) {
            for (int jj = 0; jj < im.nj(); ++jj)
                block_min = std::min(block_min, harvest(im.reduced_block(ell, jj), mult));
        } else {
            block_min = harvest(im.reduced_block(ell, 0), mult);
        }
        if (int(eigs.size()) >= count) {
            std::sort(eigs.begin(), eigs.end());
            if (block_min > eigs[count - 1]) break;  // centrifugal monotonicity
        }
    }
    std::sort(eigs.begin(), eigs.end());
    if (int(eigs.size()) > count) eigs.resize(count);
    return eigs;
}

std::vector<double> InteriorOperator::dirichlet_spectrum_below(double emax) const {
    const auto& im = *impl_;
    std::vector<double> eigs;
    auto harvest = [&](const Eigen::MatrixXcd& red, int mult) {
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(red, false);
        double block_min = std::numeric_limits<double>::max();
        for (int i = 0; i < es.eigenvalues().size(); ++i) {
            const Complex ev = es.eigenvalues()[i];
            block_min = std::min(block_min, ev.real());
            if (std::abs(ev.imag()) > 1e-6 * (1.0 + std::abs(ev.real()))) continue;
            if (ev.real() >= emax) continue;
            for (int c = 0; c < mult; ++c) eigs.push_back(ev.real());
        }
        return block_min;
    };
    for (int ell = 0; ell <= im.disc.Q; ++ell) {
        const int mult = (im.n == 2) ? (ell == 0 ? 1 : 2) : (2 * ell + 1);
        double block_min = std::numeric_limits<double>::max();
        if (im.decoupled) {
            for (int jj = 0; jj < im.nj(); ++jj)
                block_min = std::min(block_min, harvest(im.reduced_block(ell, jj), mult));
        } else {
            block_min = harvest(im.reduced_block(ell, 0), mult);
        }
        if (block_min > emax) break;  // centrifugal monotonicity in ell
    }
    std::sort(eigs.begin(), eigs.end());
    return eigs;
}

Eigen::VectorXcd free_interior_dtn_diag(Complex k, double E,
                                        const std::vector<ModeIndex>& basis, int n, double R) {
    Eigen::VectorXcd out(basis.size());
    for (int i = 0; i < int(basis.size()); ++i) {
        const Complex ej = shifted_energy(k, E, basis[i].j);
        if (ej.imag() == 0.0 && ej.real() >= 0.0)
            throw std::domain_error("free_interior_dtn_diag: E_j(k) in [0, inf)");
        const Complex z = std::sqrt(-ej);
        const double nu = 0.5 * n + basis[i].ell - 1.0;
        const auto d = log_derivatives(nu, z * R);
        out[i] = (1.0 - 0.5 * n) / R + z * d.i_ratio;
    }
    return out;
}

// ---------------------------------------------------------------------------
// RationalDtn
// ---------------------------------------------------------------------------
//
// Static condensation turns one DtN column solve into
//   (A_red - E) u_f = g,   du = alpha^T u_f + beta,
// with g, alpha, beta independent of E. With A_red = X D X^{-1},
//   Lambda^-(E)[out, in] = sum_m P(m,out) G(m,in) / (d_m - E) + beta(out,in),
// where P = X^T alpha and G = X^{-1} g.

struct RationalDtn::Impl {
    WaveguideConfig cfg;
    Complex k;
    double R;
    Discretization disc;
    int n = 2;
    struct Group {
        int ell;
        std::vector<int> jvals;  // torus modes carried by this solve group
        Eigen::VectorXcd d;      // eigenvalues of A_red
        Eigen::MatrixXcd num;    // nf x (nout*nin), column (out*nin + in)
        Eigen::MatrixXcd beta;   // nout x nin
    };
    std::vector<Group> groups;
    std::vector<double> real_poles;
};

namespace {

// Build the rational data for one condensed block. S0 is the E-free block
// holding `jvals.size()` torus modes with node stride Nt.
void build_group(RationalDtn::Impl::Group& grp, const Eigen::MatrixXcd& S0, int Nt, int NA,
                 int NB, bool two, const Eigen::RowVectorXd& drow_A,
                 const Eigen::RowVectorXd& drow_B) {
    const int njj = int(grp.jvals.size());
    std::vector<int> fr, cr_rows, cr_cols;
    std::vector<int> dir_row_of(njj);  // position of each mode's Dirichlet row in cr
    for (int jj = 0; jj < njj; ++jj) {
        const int base = jj * Nt;
        for (int i = 1; i < NA; ++i) fr.push_back(base + i);
        if (two) {
            for (int i = 1; i < NB - 1; ++i) fr.push_back(base + NA + i);
            dir_row_of[jj] = int(cr_rows.size()) + 1;
            cr_rows.push_back(base + 0);
            cr_rows.push_back(base + NA);
            cr_rows.push_back(base + NA + NB - 1);
            cr_cols.push_back(base + 0);            // uA(a)
            cr_cols.push_back(base + NA);           // uB(R)
            cr_cols.push_back(base + NA + NB - 1);  // uB(a)
        } else {
            dir_row_of[jj] = int(cr_rows.size());
            cr_rows.push_back(base + 0);
            cr_cols.push_back(base + 0);
        }
    }
    const int nf = int(fr.size()), nc = int(cr_rows.size());
    Eigen::MatrixXcd Aff(nf, nf), Afc(nf, nc), Ccf(nc, nf), Ccc(nc, nc);
    for (int r = 0; r < nf; ++r) {
        for (int c = 0; c < nf; ++c) Aff(r, c) = S0(fr[r], fr[c]);
        for (int c = 0; c < nc; ++c) Afc(r, c) = S0(fr[r], cr_cols[c]);
    }
    for (int r = 0; r < nc; ++r) {
        for (int c = 0; c < nf; ++c) Ccf(r, c) = S0(cr_rows[r], fr[c]);
        for (int c = 0; c < nc; ++c) Ccc(r, c) = S0(cr_rows[r], cr_cols[c]);
    }
    Eigen::PartialPivLU<Eigen::MatrixXcd> ccLU(Ccc);
    const Eigen::MatrixXcd CiCf = ccLU.solve(Ccf);      // C_c^{-1} C_f
    const Eigen::MatrixXcd Ared = Aff - Afc * CiCf;

    // datum vectors b_c (one per input mode) and the derivative functionals
    Eigen::MatrixXcd Bc = Eigen::MatrixXcd::Zero(nc, njj);
    for (int jj = 0; jj < njj; ++jj) Bc(dir_row_of[jj], jj) = 1.0;
    const Eigen::MatrixXcd CiBc = ccLU.solve(Bc);       // C_c^{-1} b_c
    const Eigen::MatrixXcd g = -Afc * CiBc;             // nf x njj

    // du(out) = w_f^T u_f + w_c^T u_c per output mode
    Eigen::MatrixXcd Wf = Eigen::MatrixXcd::Zero(nf, njj);
    Eigen::MatrixXcd Wc = Eigen::MatrixXcd::Zero(nc, njj);
    for (int jj = 0; jj < njj; ++jj) {
        if (two) {
            // derivative row at r = R lives on element B nodes
            Wc(jj * 3 + 1, jj) = drow_B(0);                       // uB(R)
            Wc(jj * 3 + 2, jj) = drow_B(NB - 1);                  // uB(a)
            const int fbase = jj * (NA - 1 + NB - 2) + (NA - 1);  // B free nodes offset
            for (int c = 1; c < NB - 1; ++c) Wf(fbase + c - 1, jj) = drow_B(c);
        } else {
            Wc(jj, jj) = drow_A(0);
            const int fbase = jj * (NA - 1);
            for (int c = 1; c < NA; ++c) Wf(fbase + c - 1, jj) = drow_A(c);
        }
    }
    const Eigen::MatrixXcd alpha = Wf - CiCf.transpose() * Wc;  // nf x njj
    grp.beta = (CiBc.transpose() * Wc).transpose();             // njj x njj: beta(out,in)

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(Ared, true);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("RationalDtn: eigendecomposition failed");
    grp.d = es.eigenvalues();
    const Eigen::MatrixXcd G = es.eigenvectors().partialPivLu().solve(g);
    const Eigen::MatrixXcd P = es.eigenvectors().transpose() * alpha;
    grp.num.resize(nf, njj * njj);
    for (int out = 0; out < njj; ++out)
        for (int in = 0; in < njj; ++in)
            grp.num.col(out * njj + in) = P.col(out).cwiseProduct(G.col(in));
}

}  // namespace

RationalDtn::RationalDtn(const WaveguideConfig& cfg, double k, double R,
                         const Discretization& disc, double e_ref) {
    auto impl = std::make_shared<Impl>();
    impl->cfg = cfg;
    impl->k = Complex(k, 0.0);
    impl->R = R;
    impl->disc = disc;
    impl->n = cfg.n;

    InteriorOperator host(cfg, Complex(k, 0.0), e_ref, R, disc);
    const auto& im = *host.impl_;
    const int Nt = im.el.ntot();
    Eigen::RowVectorXd drow_B;
    if (im.el.two) drow_B = im.el.D1B.row(0);

    for (int ell = 0; ell <= disc.Q; ++ell) {
        const Eigen::RowVectorXd dA = im.D1A(ell).row(0);
        if (im.decoupled) {
            for (int jj = 0; jj < im.nj(); ++jj) {
                Impl::Group grp;
                grp.ell = ell;
                grp.jvals = {jj - disc.J};
                build_group(grp, im.assemble_small(ell, jj - disc.J, false), Nt, im.el.NA,
                            im.el.NB, im.el.two, dA, drow_B);
                impl->groups.push_back(std::move(grp));
            }
        } else {
            Impl::Group grp;
            grp.ell = ell;
            for (int jj = 0; jj < im.nj(); ++jj) grp.jvals.push_back(jj - disc.J);
            build_group(grp, im.assemble_big(ell, false), Nt, im.el.NA, im.el.NB, im.el.two,
                        dA, drow_B);
            impl->groups.push_back(std::move(grp));
        }
    }
    for (const auto& grp : impl->groups)
        for (int m = 0; m < grp.d.size(); ++m)
            if (std::abs(grp.d[m].imag()) <= 1e-6 * (1.0 + std::abs(grp.d[m].real())))
                impl->real_poles.push_back(grp.d[m].real());
    std::sort(impl->real_poles.begin(), impl->real_poles.end());
    impl_ = std::move(impl);
}

double RationalDtn::radius() const { return impl_->R; }

std::vector<double> RationalDtn::poles_below(double emax) const {
    std::vector<double> out;
    for (double p : impl_->real_poles) {
        if (p >= emax) break;
        out.push_back(p);
    }
    return out;
}

Eigen::MatrixXcd RationalDtn::interior_dtn(const std::vector<ModeIndex>& basis,
                                           double E) const {
    const auto& im = *impl_;
    const int nb = int(basis.size());
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(nb, nb);
    for (const auto& grp : im.groups) {
        const int njj = int(grp.jvals.size());
        // M(E) for this group
        Eigen::MatrixXcd M(njj, njj);
        Eigen::VectorXcd resolvent = (grp.d.array() - Complex(E, 0.0)).inverse().matrix();
        for (int o = 0; o < njj; ++o)
            for (int in = 0; in < njj; ++in)
                M(o, in) = grp.beta(o, in) + grp.num.col(o * njj + in).cwiseProduct(resolvent).sum();
        // scatter to matching basis entries (same ell and angular sub-index)
        for (int ci = 0; ci < nb; ++ci) {
            if (basis[ci].ell != grp.ell) continue;
            const auto jin = std::find(grp.jvals.begin(), grp.jvals.end(), basis[ci].j);
            if (jin == grp.jvals.end()) continue;
            for (int ri = 0; ri < nb; ++ri) {
                if (basis[ri].ell != grp.ell || basis[ri].m != basis[ci].m) continue;
                const auto jout = std::find(grp.jvals.begin(), grp.jvals.end(), basis[ri].j);
                if (jout == grp.jvals.end()) continue;
                out(ri, ci) = M(int(jout - grp.jvals.begin()), int(jin - grp.jvals.begin()));
            }
        }
    }
    return out;
}

std::vector<double> dirichlet_eigs(const WaveguideConfig& cfg, double k, double R, int count,
                                   const Discretization& disc) {
    WaveguideConfig c = cfg;
    c.radius = R;  // allow R = 1 here (single-element box)
    InteriorOperator op(c, Complex(k, 0.0), 0.0, R, disc);
    return op.dirichlet_spectrum(count);
}

double choose_radius(const WaveguideConfig& cfg, double k, double E, double R0, double margin) {
    if (!(R0 > 1.0)) throw std::invalid_argument("choose_radius: requires R0 > 1");
    const Discretization disc = Discretization::from(cfg.trunc);
    const double step = 0.02;
    const int nsteps = int(0.5 / step);
    for (int i = 0; i <= nsteps; ++i) {
        const double R = R0 + i * step;
        try {
            InteriorOperator op(cfg, Complex(k, 0.0), E, R, disc);
            if (op.dirichlet_clearance() > margin) return R;
        } catch (const DirichletProximityError&) {
            continue;
        }
    }
    throw std::runtime_error(
        "choose_radius: no admissible R in [R0, R0+0.5]; margin too large");
}

}  // namespace cyldtn
