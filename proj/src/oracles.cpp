#include "cyldtn/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cyldtn {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

// Symmetric generalized tridiagonal pencil (A, M), both with diagonal d/dm
// and off-diagonal e/em (e[i] couples node i and i+1).
struct Tridiag {
    std::vector<double> d, e, dm, em;
    int size() const { return int(d.size()); }
};

// P1 finite elements for the radial form
//   a(u,u) = int r^{n-1} [ u'^2 + (ell(ell+n-2)/r^2 + v) u^2 ] dr
// against m(u,u) = int r^{n-1} u^2 dr. Nodes i*h, i = 0..M; u(r_inf) = 0 is
// essential; u(0) is kept for ell = 0 and dropped otherwise.
Tridiag assemble_radial_fem(const RadialProblem& pb, double h) {
    const int M = int(std::lround(pb.r_inf / h));
    const int i0 = (pb.ell == 0) ? 0 : 1;  // first retained node
    const int ndof = M - i0;               // nodes i0..M-1
    Tridiag T;
    T.d.assign(ndof, 0.0);
    T.e.assign(ndof - 1, 0.0);
    T.dm.assign(ndof, 0.0);
    T.em.assign(ndof - 1, 0.0);

    const double cl = double(pb.ell) * (pb.ell + pb.n - 2);
    // 3-point Gauss on each element
    static const double gx[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
    static const double gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};

    for (int el = 0; el < M; ++el) {
        const double r0 = el * h, r1 = (el + 1) * h;
        double k00 = 0, k01 = 0, k11 = 0, m00 = 0, m01 = 0, m11 = 0;
        for (int g = 0; g < 3; ++g) {
            const double r = 0.5 * (r0 + r1) + 0.5 * h * gx[g];
            const double w = 0.5 * h * gw[g];
            const double rw = std::pow(r, pb.n - 1) * w;
            const double phi0 = (r1 - r) / h, phi1 = (r - r0) / h;
            const double dphi0 = -1.0 / h, dphi1 = 1.0 / h;
            double pot = pb.potential.evaluate(r, 0.0);
            if (cl != 0.0) pot += cl / (r * r);
            k00 += rw * (dphi0 * dphi0 + pot * phi0 * phi0);
            k01 += rw * (dphi0 * dphi1 + pot * phi0 * phi1);
            k11 += rw * (dphi1 * dphi1 + pot * phi1 * phi1);
            m00 += rw * phi0 * phi0;
            m01 += rw * phi0 * phi1;
            m11 += rw * phi1 * phi1;
        }
        const int a = el - i0, b = el + 1 - i0;  // dof indices of the two nodes
        if (a >= 0 && a < ndof) T.d[a] += k00, T.dm[a] += m00;
        if (b >= 0 && b < ndof) T.d[b] += k11, T.dm[b] += m11;
        if (a >= 0 && b < ndof) T.e[a] += k01, T.em[a] += m01;
    }
    return T;
}

// Number of pencil eigenvalues below mu (Sylvester inertia of A - mu M).
int sturm_count(const Tridiag& T, double mu) {
    int count = 0;
    double dprev = 0.0;
    for (int i = 0; i < T.size(); ++i) {
        double di = T.d[i] - mu * T.dm[i];
        if (i > 0) {
            const double ei = T.e[i - 1] - mu * T.em[i - 1];
            di -= ei * ei / dprev;
        }
        if (di == 0.0) di = -1e-300;
        if (di < 0.0) ++count;
        dprev = di;
    }
    return count;
}

std::vector<double> pencil_eigs_below(const Tridiag& T, double upper, int count) {
    std::vector<double> out;
    double lo = -1e4;  // far below any physical bound state here
    const int below_up = sturm_count(T, upper);
    const int nfind = std::min(count, below_up);
    for (int idx = 1; idx <= nfind; ++idx) {
        double a = lo, b = upper;
        for (int it = 0; it < 200 && (b - a) > 1e-13 * (1.0 + std::abs(a)); ++it) {
            const double mid = 0.5 * (a + b);
            if (sturm_count(T, mid) >= idx) b = mid;
            else a = mid;
        }
        out.push_back(0.5 * (a + b));
    }
    return out;
}

}  // namespace

std::vector<double> radial_bound_states(const RadialProblem& problem, int count) {
    if (!problem.potential.y_independent())
        throw std::invalid_argument("radial_bound_states: potential must be y-independent");
    if (problem.r_inf < 10.0) throw std::invalid_argument("radial_bound_states: r_inf >= 10");

    auto run = [&](double h) {
        const Tridiag T = assemble_radial_fem(problem, h);
        return pencil_eigs_below(T, -1e-12, count);
    };
    const std::vector<double> mh = run(problem.mesh);
    const std::vector<double> mh2 = run(0.5 * problem.mesh);
    std::vector<double> out;
    for (std::size_t i = 0; i < mh2.size(); ++i) {
        if (i < mh.size())
            out.push_back((4.0 * mh2[i] - mh[i]) / 3.0);  // h^2 Richardson
        else
            out.push_back(mh2[i]);
    }
    // extrapolation can push a marginal state across 0; keep negatives only
    out.erase(std::remove_if(out.begin(), out.end(), [](double m) { return m >= 0.0; }),
              out.end());
    return out;
}

std::vector<SeparableBand> separable_bands(const PotentialSpec& v, int n, double k,
                                           int ell_max, int j_max, int count, double r_inf) {
    if (!v.y_independent())
        throw std::invalid_argument("separable_bands: potential must be y-independent");
    std::vector<SeparableBand> bands;
    for (int ell = 0; ell <= ell_max; ++ell) {
        RadialProblem pb;
        pb.n = n;
        pb.ell = ell;
        pb.potential = v;
        pb.r_inf = r_inf;
        const auto mus = radial_bound_states(pb, count);
        for (int p = 0; p < int(mus.size()); ++p) {
            for (int j = -j_max; j <= j_max; ++j) {
                const double shift = (k + kTwoPi * j) * (k + kTwoPi * j);
                bands.push_back({j, ell, p, mus[p], mus[p] + shift});
            }
        }
        if (mus.empty()) break;  // deeper centrifugal walls cannot bind either
    }
    std::sort(bands.begin(), bands.end(),
              [](const SeparableBand& a, const SeparableBand& b) { return a.lambda < b.lambda; });
    if (int(bands.size()) > count) bands.resize(count);
    return bands;
}

std::vector<double> box_eigs(const WaveguideConfig& cfg, double k, double L,
                             const Discretization& disc, int count) {
    if (L < 8.0) throw std::invalid_argument("box_eigs: L >= 8 required");
    WaveguideConfig box = cfg;
    box.radius = L;
    InteriorOperator op(box, Complex(k, 0.0), 0.0, L, disc);
    return op.dirichlet_spectrum(count);
}

}  // namespace cyldtn
