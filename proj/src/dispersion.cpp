#include "cyldtn/dispersion.hpp"

#include <algorithm>
#include <cmath>

#include "cyldtn/specfun.hpp"
#include "util.hpp"

namespace cyldtn {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

DtNMatrix finish_assembly(const WaveguideConfig& cfg, double k, double E, bool exact_zero,
                          const InteriorOperator& op) {
    const auto basis =
        admissible_basis(k, E, cfg.n, cfg.trunc, cfg.eps_cross(E), exact_zero);
    if (basis.empty())
        throw std::runtime_error("assemble_dtn: admissible basis is empty at this (k, E)");
    DtNMatrix out;
    out.k = k;
    out.E = E;
    out.R_used = op.radius();
    out.basis = basis;
    out.matrix = op.dtn(basis);
    const ExteriorDtN ext = exterior_dtn_diag(Complex(k, 0.0), E, basis, cfg.n, op.radius());
    for (int i = 0; i < int(basis.size()); ++i) out.matrix(i, i) -= ext.diagonal[i];
    out.weight.resize(basis.size());
    for (int i = 0; i < int(basis.size()); ++i) out.weight[i] = basis[i].sobolev_weight();
    return out;
}

Eigen::MatrixXcd weighted_matrix(const DtNMatrix& dtn) {
    const int n = int(dtn.basis.size());
    Eigen::MatrixXcd A(n, n);
    for (int i = 0; i < n; ++i) {
        const double wr = std::pow(dtn.weight[i], 0.25);
        for (int j = 0; j < n; ++j)
            A(i, j) = wr * dtn.matrix(i, j) * std::pow(dtn.weight[j], -0.75);
    }
    return A;
}

// sigma_min via inverse iteration on A^H A, sigma_max via power iteration;
// deterministic start vectors, fixed iteration counts.
void sigma_quick(const Eigen::MatrixXcd& A, double& smin, double& smax) {
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
    Eigen::VectorXcd x = Eigen::VectorXcd::Ones(A.rows()).normalized();
    smin = 0.0;
    for (int it = 0; it < 8; ++it) {
        const Eigen::VectorXcd y = lu.solve(x);
        const Eigen::VectorXcd w = lu.adjoint().solve(y);
        const double rho = w.norm();
        if (!(rho > 0.0) || !std::isfinite(rho)) {
            smin = 0.0;
            break;
        }
        smin = 1.0 / std::sqrt(rho);
        x = w / rho;
    }
    Eigen::VectorXcd v = Eigen::VectorXcd::Ones(A.rows()).normalized();
    smax = 0.0;
    for (int it = 0; it < 12; ++it) {
        const Eigen::VectorXcd y = A.adjoint() * (A * v);
        const double rho = y.norm();
        if (!(rho > 0.0)) break;
        smax = std::sqrt(rho);
        v = y / rho;
    }
}

// negative-eigenvalue count of the Hermitian part (inertia; congruence
// invariant, so no Sobolev weighting is needed)
int negative_count(const DtNMatrix& dtn) {
    Eigen::MatrixXcd H = 0.5 * (dtn.matrix + dtn.matrix.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H, Eigen::EigenvaluesOnly);
    int c = 0;
    for (int i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()[i] < 0.0) ++c;
    return c;
}

}  // namespace

DtNMatrix assemble_dtn_fixed_radius(const WaveguideConfig& cfg, double k, double E, double R,
                                    bool exact_zero) {
    const Discretization disc = Discretization::from(cfg.trunc);
    InteriorOperator op(cfg, Complex(k, 0.0), E, R, disc);
    return finish_assembly(cfg, k, E, exact_zero, op);
}

DtNMatrix assemble_dtn(const WaveguideConfig& cfg, double k, double E, bool exact_zero) {
    const double margin = cfg.dirichlet_margin(E);
    const Discretization disc = Discretization::from(cfg.trunc);
    const double step = 0.02;
    const int nsteps = int(0.5 / step);
    std::string last_error = "no admissible R";
    for (int i = 0; i <= nsteps; ++i) {
        const double R = cfg.radius + i * step;
        try {
            InteriorOperator op(cfg, Complex(k, 0.0), E, R, disc);
            if (op.dirichlet_clearance() <= margin) continue;
            return finish_assembly(cfg, k, E, exact_zero, op);
        } catch (const DirichletProximityError& e) {
            last_error = e.what();
            continue;
        }
    }
    throw std::runtime_error("assemble_dtn: Dirichlet spectrum blocks every R in [R0, R0+0.5] (" +
                             last_error + ")");
}

WeightedSVD weighted_svd(const DtNMatrix& dtn) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(weighted_matrix(dtn), Eigen::ComputeThinV);
    WeightedSVD out;
    out.sigma = svd.singularValues();
    out.V = svd.matrixV();
    out.norm = out.sigma.size() ? out.sigma[0] : 0.0;
    out.sigma_min = out.sigma.size() ? out.sigma[out.sigma.size() - 1] : 0.0;
    return out;
}

double sigma_min(const WaveguideConfig& cfg, double k, double E) {
    return weighted_svd(assemble_dtn(cfg, k, E)).sigma_min;
}

namespace {

BandPoint make_band_point(const WaveguideConfig& cfg, const DtNMatrix& dtn,
                          const WeightedSVD& svd) {
    BandPoint pt;
    pt.k = dtn.k;
    pt.lambda = dtn.E;
    pt.sigma_min = svd.sigma_min;
    pt.norm = svd.norm;
    pt.residual = svd.sigma_min;
    pt.R_used = dtn.R_used;
    const double accept = cfg.tol.kernel_tol * svd.norm;
    const int n = int(svd.sigma.size());
    for (int i = n - 1; i >= 0; --i) {
        if (svd.sigma[i] < 10.0 * accept) {
            Eigen::VectorXcd f(n);
            for (int r = 0; r < n; ++r)
                f[r] = std::pow(dtn.weight[r], -0.75) * svd.V(r, i);
            f.normalize();
            pt.kernel.emplace_back(dtn.basis, std::move(f));
        } else {
            break;
        }
    }
    pt.multiplicity = int(pt.kernel.size());
    return pt;
}

struct SubWindow {
    double lo, hi;
};

std::vector<SubWindow> split_window(const WaveguideConfig& cfg, double k, double lo, double hi) {
    std::vector<double> cuts;
    const double reach = std::sqrt(std::max(hi, 0.0)) + kTwoPi;
    const int jr = int(reach / kTwoPi) + 1;
    for (int j = -jr; j <= jr; ++j) {
        const double ehs = (k + kTwoPi * j) * (k + kTwoPi * j);
        if (ehs > lo && ehs < hi) cuts.push_back(ehs);
    }
    std::sort(cuts.begin(), cuts.end());
    std::vector<SubWindow> out;
    double cur = lo;
    for (double c : cuts) {
        const double band = cfg.eps_cross(c) * 1.5;  // guard factor off the surface
        if (c - band > cur) out.push_back({cur, c - band});
        cur = c + band;
    }
    if (hi > cur) out.push_back({cur, hi});
    return out;
}

// refine one inertia jump inside [a, b] at a frozen radius; appends the
// accepted point (if any) and recurses on the flanks for multi-jump cells
void refine_crossing(const WaveguideConfig& cfg, double k, double R, double a, double b,
                     int n_lo, int n_hi, int depth, std::vector<BandPoint>& found) {
    if (n_hi <= n_lo || depth > 6) return;
    auto count_at = [&](double E) -> int {
        try {
            return negative_count(assemble_dtn_fixed_radius(cfg, k, E, R));
        } catch (const std::exception&) {
            return -1;
        }
    };
    double lo = a, hi = b;
    int clo = n_lo;
    while (hi - lo > std::max(cfg.tol.refine_tol * 100.0, 1e-9 * (1.0 + std::abs(lo)))) {
        const double mid = 0.5 * (lo + hi);
        const int cm = count_at(mid);
        if (cm < 0) return;  // mid point unreachable; give up on this cell
        if (cm > clo) {
            hi = mid;
        } else {
            lo = mid;
            clo = cm;
        }
    }
    // golden-section polish of the singular-value dip inside the bracket
    const double pad = 50.0 * (hi - lo);
    auto sig_at = [&](double E) -> double {
        try {
            const DtNMatrix dtn = assemble_dtn_fixed_radius(cfg, k, E, R);
            double smin, smax;
            sigma_quick(weighted_matrix(dtn), smin, smax);
            return smin / std::max(smax, 1e-300);
        } catch (const std::exception&) {
            return std::numeric_limits<double>::max();
        }
    };
    const double emin =
        util::golden_min(sig_at, lo - pad, hi + pad, cfg.tol.refine_tol);
    try {
        const DtNMatrix dtn = assemble_dtn_fixed_radius(cfg, k, emin, R);
        const WeightedSVD svd = weighted_svd(dtn);
        if (svd.sigma_min < cfg.tol.kernel_tol * svd.norm)
            found.push_back(make_band_point(cfg, dtn, svd));
    } catch (const std::exception&) {
    }
    // isolate any remaining jumps on either flank
    const int cl = count_at(lo - pad), ch = count_at(hi + pad);
    if (cl >= 0 && cl > n_lo) refine_crossing(cfg, k, R, a, lo - pad, n_lo, cl, depth + 1, found);
    if (ch >= 0 && n_hi > ch) refine_crossing(cfg, k, R, hi + pad, b, ch, n_hi, depth + 1, found);
}

// inertia-jump and dip detection over one pole-free interval at a fixed R
void scan_interval(const WaveguideConfig& cfg, double k, double R, double a, double b,
                   int grid, int threads, std::vector<BandPoint>& found) {
    if (!(b > a)) return;
    const int g = std::max(3, grid);
    std::vector<double> Es(g);
    std::vector<double> sig(g, std::numeric_limits<double>::quiet_NaN());
    std::vector<int> nneg(g, -1);
    for (int i = 0; i < g; ++i) Es[i] = a + (b - a) * i / (g - 1.0);
    util::parallel_for(g, threads, [&](int i) {
        try {
            const DtNMatrix dtn = assemble_dtn_fixed_radius(cfg, k, Es[i], R);
            double smin, smax;
            sigma_quick(weighted_matrix(dtn), smin, smax);
            sig[i] = smin / std::max(smax, 1e-300);
            nneg[i] = negative_count(dtn);
        } catch (const std::exception&) {
        }
    });
    for (int i = 0; i + 1 < g; ++i) {
        if (nneg[i] < 0 || nneg[i + 1] < 0) continue;
        if (nneg[i + 1] > nneg[i])
            refine_crossing(cfg, k, R, Es[i], Es[i + 1], nneg[i], nneg[i + 1], 0, found);
    }
    // dips without an inertia change (conservative secondary detector)
    for (int i = 1; i + 1 < g; ++i) {
        if (!std::isfinite(sig[i]) || !std::isfinite(sig[i - 1]) || !std::isfinite(sig[i + 1]))
            continue;
        if (!(sig[i] < sig[i - 1] && sig[i] <= sig[i + 1])) continue;
        if (sig[i] > 0.25 * std::min(sig[i - 1], sig[i + 1])) continue;
        auto sig_at = [&](double E) -> double {
            try {
                const DtNMatrix dtn = assemble_dtn_fixed_radius(cfg, k, E, R);
                double smin, smax;
                sigma_quick(weighted_matrix(dtn), smin, smax);
                return smin / std::max(smax, 1e-300);
            } catch (const std::exception&) {
                return std::numeric_limits<double>::max();
            }
        };
        const double emin = util::golden_min(sig_at, Es[i - 1], Es[i + 1], cfg.tol.refine_tol);
        try {
            const DtNMatrix dtn = assemble_dtn_fixed_radius(cfg, k, emin, R);
            const WeightedSVD svd = weighted_svd(dtn);
            if (svd.sigma_min < cfg.tol.kernel_tol * svd.norm)
                found.push_back(make_band_point(cfg, dtn, svd));
        } catch (const std::exception&) {
        }
    }
}

std::vector<double> poles_in(const WaveguideConfig& cfg, double k, double R, double lo,
                             double hi) {
    const Discretization disc = Discretization::from(cfg.trunc);
    InteriorOperator op(cfg, Complex(k, 0.0), lo, R, disc);
    std::vector<double> poles;
    for (double p : op.dirichlet_spectrum_below(hi + 1.0))
        if (p > lo - 1.0 && p < hi + 1.0) poles.push_back(p);
    return poles;
}

}  // namespace

std::vector<BandPoint> locate_eigenvalues(const WaveguideConfig& cfg, double k, double e_lo,
                                          double e_hi, int grid_count, int threads,
                                          LocateStats* stats) {
    std::vector<BandPoint> found;
    if (!(e_hi > e_lo)) return found;
    const auto windows = split_window(cfg, k, e_lo, e_hi);
    const double total = e_hi - e_lo;
    const double R0 = cfg.radius;

    for (const auto& win : windows) {
        const int g = std::max(4, int(std::lround(grid_count * (win.hi - win.lo) / total)));
        auto gap = [&](double p) { return 2.0 * cfg.dirichlet_margin(p); };

        // partition the window at the Dirichlet poles of the initial radius
        std::vector<double> poles;
        for (double p : poles_in(cfg, k, R0, win.lo, win.hi))
            if (p > win.lo - gap(p) && p < win.hi + gap(p)) poles.push_back(p);

        double cursor = win.lo;
        std::vector<std::pair<double, double>> zones;
        for (double p : poles) {
            const double zl = std::max(win.lo, p - gap(p));
            const double zr = std::min(win.hi, p + gap(p));
            if (zl > cursor) {
                const int gi = std::max(3, int(std::lround(g * (zl - cursor) /
                                                           (win.hi - win.lo))));
                scan_interval(cfg, k, R0, cursor, zl, gi, threads, found);
            }
            if (!zones.empty() && zl <= zones.back().second)
                zones.back().second = std::max(zones.back().second, zr);
            else
                zones.emplace_back(zl, zr);
            cursor = std::max(cursor, zr);
        }
        if (win.hi > cursor) {
            const int gi =
                std::max(3, int(std::lround(g * (win.hi - cursor) / (win.hi - win.lo))));
            scan_interval(cfg, k, R0, cursor, win.hi, gi, threads, found);
        }

        // rescan each pole neighborhood at a radius whose own poles clear it
        for (const auto& [zl, zr] : zones) {
            const double pad = 2.0 * (zr - zl);
            double Rc = -1.0;
            for (double Rtry = R0 + 0.03; Rtry <= R0 + 0.5 + 1e-12; Rtry += 0.03) {
                bool clear = true;
                for (double p : poles_in(cfg, k, Rtry, zl - pad, zr + pad))
                    if (p > zl - pad && p < zr + pad) clear = false;
                if (clear) {
                    Rc = Rtry;
                    break;
                }
            }
            if (Rc < 0.0) continue;  // no clearing radius; zone reported unresolved
            if (stats) ++stats->radius_shifts;
            scan_interval(cfg, k, Rc, std::max(win.lo, zl - 0.5 * pad),
                          std::min(win.hi, zr + 0.5 * pad), 5, threads, found);
        }
    }
    std::sort(found.begin(), found.end(),
              [](const BandPoint& a, const BandPoint& b) { return a.lambda < b.lambda; });
    std::vector<BandPoint> unique;
    for (auto& p : found) {
        if (!unique.empty() && std::abs(p.lambda - unique.back().lambda) <
                                   std::max(1e-8, 100.0 * cfg.tol.refine_tol))
            continue;
        unique.push_back(std::move(p));
    }
    return unique;
}

std::vector<BoundaryData> kernel_boundary_data(const BandPoint& point) { return point.kernel; }

namespace {

std::optional<BandPoint> corrector(const WaveguideConfig& cfg, double k, double pred,
                                   double window, int threads) {
    const auto pts =
        locate_eigenvalues(cfg, k, pred - 0.5 * window, pred + 0.5 * window, 9, threads);
    if (pts.empty()) return std::nullopt;
    const BandPoint* best = &pts[0];
    for (const auto& p : pts)
        if (std::abs(p.lambda - pred) < std::abs(best->lambda - pred)) best = &p;
    return *best;
}

}  // namespace

Band trace_band(const WaveguideConfig& cfg, const std::vector<double>& k_grid,
                const BandPoint& seed, double window_width, int threads) {
    Band band;
    if (seed.multiplicity < 1 || seed.sigma_min >= cfg.tol.kernel_tol * seed.norm) {
        band.truncation_reason = "seed rejected: sigma_min above kernel tolerance";
        return band;
    }
    std::vector<double> grid = k_grid;
    std::sort(grid.begin(), grid.end());
    band.points.push_back(seed);

    auto advance = [&](double kf, double lf, double sl, double k_to,
                       std::vector<BandPoint>& out) -> bool {
        int halvings = 0;
        double target = k_to;
        while (true) {
            const double pred = lf + sl * (target - kf);
            auto pt = corrector(cfg, target, pred, window_width, threads);
            if (pt && std::abs(pt->lambda - lf) <
                          std::max(0.2 * window_width, 4.0 * std::abs(sl * (target - kf)))) {
                if (std::abs(target - kf) > 1e-14) sl = (pt->lambda - lf) / (target - kf);
                kf = target;
                lf = pt->lambda;
                out.push_back(*pt);
                if (target == k_to) return true;
                target = k_to;
                continue;
            }
            if (++halvings > 8) return false;
            target = kf + 0.5 * (target - kf);
        }
    };

    // forward sweep
    {
        double kf = seed.k, lf = seed.lambda, slope = 0.0;
        for (double kt : grid) {
            if (kt <= seed.k + 1e-14) continue;
            std::vector<BandPoint> got;
            if (!advance(kf, lf, slope, kt, got)) {
                band.truncation_reason = "continuation step failed after 8 halvings";
                break;
            }
            for (auto& p : got) band.points.push_back(std::move(p));
            const auto& last = band.points.back();
            const auto& prev = band.points[band.points.size() - 2];
            if (std::abs(last.k - prev.k) > 1e-14)
                slope = (last.lambda - prev.lambda) / (last.k - prev.k);
            kf = last.k;
            lf = last.lambda;
        }
    }
    // backward sweep
    {
        double kf = seed.k, lf = seed.lambda, slope = 0.0;
        std::vector<BandPoint> back;
        for (auto it = grid.rbegin(); it != grid.rend(); ++it) {
            const double kt = *it;
            if (kt >= seed.k - 1e-14) continue;
            std::vector<BandPoint> got;
            if (!advance(kf, lf, slope, kt, got)) {
                if (band.truncation_reason.empty())
                    band.truncation_reason = "continuation step failed after 8 halvings";
                break;
            }
            for (auto& p : got) back.push_back(std::move(p));
            const auto& last = back.back();
            const double kprev = back.size() >= 2 ? back[back.size() - 2].k : seed.k;
            const double lprev = back.size() >= 2 ? back[back.size() - 2].lambda : seed.lambda;
            if (std::abs(last.k - kprev) > 1e-14)
                slope = (last.lambda - lprev) / (last.k - kprev);
            kf = last.k;
            lf = last.lambda;
        }
        for (auto& p : back) band.points.push_back(std::move(p));
    }
    std::sort(band.points.begin(), band.points.end(),
              [](const BandPoint& a, const BandPoint& b) { return a.k < b.k; });
    band_gradient(band);
    return band;
}

void band_gradient(Band& band, double zero_tol_rel) {
    const int n = int(band.points.size());
    band.gradient.assign(n, 0.0);
    band.zero_gradient_flag.assign(n, false);
    if (n < 3) return;
    auto K = [&](int i) { return band.points[i].k; };
    auto L = [&](int i) { return band.points[i].lambda; };
    for (int i = 0; i < n; ++i) {
        double g;
        if (i == 0) {
            g = (L(1) - L(0)) / (K(1) - K(0));
        } else if (i == n - 1) {
            g = (L(n - 1) - L(n - 2)) / (K(n - 1) - K(n - 2));
        } else {
            const double hl = K(i) - K(i - 1), hr = K(i + 1) - K(i);
            g = ((L(i + 1) - L(i)) / hr) * (hl / (hl + hr)) +
                ((L(i) - L(i - 1)) / hl) * (hr / (hl + hr));
        }
        band.gradient[i] = g;
        band.zero_gradient_flag[i] =
            std::abs(g) < zero_tol_rel * (1.0 + std::abs(band.points[i].lambda));
    }
}

EigenfunctionField reconstruct_eigenfunction(const WaveguideConfig& cfg, const BandPoint& point,
                                             double r_max, int n_r, int n_ang, int n_y) {
    if (point.kernel.empty())
        throw std::invalid_argument("reconstruct_eigenfunction: point carries no kernel vector");
    const BoundaryData& f = point.kernel.front();
    const double R = point.R_used;
    if (r_max <= R) throw std::invalid_argument("reconstruct_eigenfunction: r_max must exceed R");

    EigenfunctionField out;
    out.grid = make_boundary_grid(cfg.n, R, n_ang, n_y);
    const int n_in = std::max(4, int(std::lround(n_r * R / r_max)));
    const int n_out = std::max(4, n_r - n_in);
    std::vector<double> r_in(n_in), r_out(n_out);
    for (int i = 0; i < n_in; ++i) r_in[i] = R * (i + 0.5) / n_in;
    for (int i = 0; i < n_out; ++i) r_out[i] = R + (r_max - R) * (i + 1.0) / n_out;

    const Discretization disc = Discretization::from(cfg.trunc);
    InteriorOperator op(cfg, Complex(point.k, 0.0), point.lambda, R, disc);
    Eigen::MatrixXcd vin = op.field(f, r_in, out.grid);

    const int na = out.grid.angular_points();
    const int n_az = cfg.n == 3 ? int(out.grid.ang2.size()) : 1;
    std::vector<ExteriorPoint> pts;
    pts.reserve(std::size_t(n_out) * na * n_y);
    for (int ir = 0; ir < n_out; ++ir)
        for (int a = 0; a < na; ++a)
            for (int b = 0; b < n_y; ++b)
                pts.push_back({r_out[ir], out.grid.ang1[a / n_az],
                               cfg.n == 3 ? out.grid.ang2[a % n_az] : 0.0, out.grid.y[b]});
    const auto vout = exterior_field(f, Complex(point.k, 0.0), point.lambda, cfg.n, R, pts);

    out.r = r_in;
    out.r.insert(out.r.end(), r_out.begin(), r_out.end());
    out.values.resize(int(out.r.size()) * na, n_y);
    for (int ir = 0; ir < n_in; ++ir)
        for (int a = 0; a < na; ++a)
            for (int b = 0; b < n_y; ++b) out.values(ir * na + a, b) = vin(ir * na + a, b);
    std::size_t q = 0;
    for (int ir = 0; ir < n_out; ++ir)
        for (int a = 0; a < na; ++a)
            for (int b = 0; b < n_y; ++b) out.values((n_in + ir) * na + a, b) = vout[q++];

    // L2 normalization over the sampled cylinder (trapezoid in r)
    double nrm2 = 0.0;
    for (int ir = 0; ir < int(out.r.size()); ++ir) {
        const double rl = (ir == 0) ? 0.0 : 0.5 * (out.r[ir - 1] + out.r[ir]);
        const double rr =
            (ir + 1 == int(out.r.size())) ? r_max : 0.5 * (out.r[ir] + out.r[ir + 1]);
        const double wr = (rr - rl) * std::pow(out.r[ir], cfg.n - 1);
        for (int a = 0; a < na; ++a) {
            double wa = out.grid.ang1_w[a / n_az];
            if (cfg.n == 3) wa *= kTwoPi / n_az;
            for (int b = 0; b < n_y; ++b)
                nrm2 += wr * wa / n_y * std::norm(out.values(ir * na + a, b));
        }
    }
    if (nrm2 > 0.0) out.values /= std::sqrt(nrm2);

    {
        Eigen::MatrixXcd tr_in = op.field(f, {R}, out.grid);
        Eigen::MatrixXcd tr_bd = synthesize(f, out.grid);
        out.trace_mismatch = (tr_in - tr_bd).norm() / std::max(tr_bd.norm(), 1e-300);
    }
    {
        const DtNMatrix dtn = assemble_dtn_fixed_radius(cfg, point.k, point.lambda, R);
        out.deriv_mismatch = (dtn.matrix * f.coeff).norm() / f.coeff.norm();
    }
    return out;
}

ThomasScan thomas_scan(const WaveguideConfig& cfg, double k0, double E0,
                       const std::vector<double>& t_list) {
    const double delta = 0.05;
    if (!(std::abs(k0) > delta && std::abs(k0 - kTwoPi) > delta))
        throw std::invalid_argument("thomas_scan: need |k0| > delta and |k0 - 2pi| > delta");
    const auto classes = classify_modes(k0, E0, cfg.trunc.j_max, cfg.eps_cross(E0));
    for (const auto& [j, mc] : classes)
        if (mc.near_crossing)
            throw std::invalid_argument("thomas_scan: E0 lies on a mode hypersurface (j=" +
                                        std::to_string(j) + ")");
    const auto basis = admissible_basis(k0, E0, cfg.n, cfg.trunc, cfg.eps_cross(E0), false);
    const double R = cfg.radius;

    ThomasScan out;
    out.t = t_list;
    out.sigma_min.resize(t_list.size());
    for (std::size_t it = 0; it < t_list.size(); ++it) {
        const Complex kc(k0, t_list[it]);
        double smin = std::numeric_limits<double>::max();
        for (const auto& idx : basis) {
            const Complex ej = shifted_energy(kc, E0, idx.j);
            const Complex z = std::sqrt(-ej);
            if (!(z.real() > 0.0))
                throw std::runtime_error("thomas_scan: branch violation Re z <= 0");
            const double nu = 0.5 * cfg.n + idx.ell - 1.0;
            const Complex entry = 1.0 / (R * p_product(nu, z * R));
            const double s = std::abs(entry) / std::sqrt(idx.sobolev_weight());
            smin = std::min(smin, s);
        }
        out.sigma_min[it] = smin;
    }
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < t_list.size(); ++i) {
        if (t_list[i] > 0.0) {
            lx.push_back(std::log(t_list[i]));
            ly.push_back(std::log(out.sigma_min[i]));
        }
    }
    if (lx.size() >= 2) {
        double icpt;
        util::linear_fit(lx, ly, out.exponent, icpt);
    }
    return out;
}

}  // namespace cyldtn
