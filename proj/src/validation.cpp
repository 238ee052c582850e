#include "cyldtn/validation.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "cyldtn/dispersion.hpp"
#include "cyldtn/oracles.hpp"
#include "cyldtn/specfun.hpp"

namespace cyldtn {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(3);
    s << v;
    return s.str();
}

}  // namespace

std::vector<CheckResult> run_validation(const WaveguideConfig& cfg, int threads) {
    std::vector<CheckResult> out;
    auto check = [&](const std::string& name, bool pass, const std::string& detail) {
        out.push_back({name, pass, detail});
    };

    // specfun: Wronskian samples
    {
        std::mt19937 rng(7);
        std::uniform_real_distribution<double> unu(0.0, 50.0), umag(0.3, 400.0),
            uarg(-1.3, 1.3);
        double worst = 0.0;
        for (int i = 0; i < 25; ++i) {
            const double nu = unu(rng);
            const Complex w = std::polar(umag(rng), uarg(rng));
            const auto d = log_derivatives(nu, w);
            const Complex res = p_product(nu, w) * (d.i_ratio - d.k_ratio) * w - 1.0;
            worst = std::max(worst, std::abs(res));
        }
        check("specfun.wronskian", worst < 1e-12, "residual " + fmt(worst));
    }
    // specfun: recurrence
    {
        double worst = 0.0;
        for (double nu : {0.5, 1.0, 3.3, 10.0}) {
            for (Complex z : {Complex(1.5, 0.4), Complex(8.0, 3.0), Complex(30.0, -9.0)}) {
                const auto km = bessel_k(nu - 0.5, z), k0 = bessel_k(nu + 0.5, z),
                           kp = bessel_k(nu + 1.5, z);
                const Complex lhs = kp.value * std::exp(kp.log_scale - k0.log_scale);
                const Complex rhs = km.value * std::exp(km.log_scale - k0.log_scale) +
                                    (2.0 * (nu + 0.5) / z) * k0.value;
                worst = std::max(worst, std::abs(lhs - rhs) / std::abs(lhs));
            }
        }
        check("specfun.recurrence", worst < 1e-10, "residual " + fmt(worst));
    }
    // free DtN triple identity
    {
        std::mt19937 rng(11);
        std::uniform_real_distribution<double> unu(0.0, 20.0), umag(0.5, 30.0), uarg(-1.2, 1.2);
        double worst = 0.0;
        const double R = cfg.radius;
        for (int i = 0; i < 20; ++i) {
            const double nu = unu(rng);
            const Complex z = std::polar(umag(rng), uarg(rng));
            const auto d = log_derivatives(nu, z * R);
            const Complex interior = (1.0 - 0.5 * cfg.n) / R + z * d.i_ratio;
            const Complex exterior = (1.0 - 0.5 * cfg.n) / R + z * d.k_ratio;
            const Complex third = 1.0 / (R * p_product(nu, z * R));
            const double scale = std::max({std::abs(interior), std::abs(exterior),
                                          std::abs(third)});
            worst = std::max(worst, std::abs(interior - exterior - third) / scale);
        }
        check("dispersion.free_triple_identity", worst < 1e-10, "residual " + fmt(worst));
    }
    // boundary: roundtrip + Parseval
    {
        const auto basis = admissible_basis(0.3, -2.0, cfg.n, cfg.trunc, 1e-4);
        std::mt19937 rng(3);
        std::normal_distribution<double> g;
        Eigen::VectorXcd c(basis.size());
        for (int i = 0; i < c.size(); ++i) c[i] = Complex(g(rng), g(rng));
        BoundaryData f(basis, c);
        const auto grid = make_boundary_grid(cfg.n, cfg.radius,
                                             cfg.n == 2 ? 4 * cfg.trunc.ell_max + 8
                                                        : 2 * cfg.trunc.ell_max + 4,
                                             4 * cfg.trunc.j_max + 6);
        const auto vals = synthesize(f, grid);
        const auto back = analyze(vals, basis, grid);
        const double rt = (back.coeff - f.coeff).norm() / f.coeff.norm();
        check("boundary.roundtrip", rt < 1e-12, "error " + fmt(rt));

        double quad = 0.0;
        const int n_az = cfg.n == 3 ? int(grid.ang2.size()) : 1;
        for (int a = 0; a < grid.angular_points(); ++a) {
            double wa = grid.ang1_w[a / n_az] * std::pow(grid.R, cfg.n - 1);
            if (cfg.n == 3) wa *= kTwoPi / n_az;
            for (int b = 0; b < int(grid.y.size()); ++b)
                quad += wa / grid.y.size() * std::norm(vals(a, b));
        }
        const double pv = std::abs(quad - std::pow(sobolev_norm(f, 0.0), 2)) / quad;
        check("boundary.parseval", pv < 1e-10, "error " + fmt(pv));
    }
    // exterior: zero-class continuity
    {
        const int ell = std::max(2, min_angular_index(cfg.n));
        double worst = 0.0;
        for (double z : {1e-4, 1e-5}) {
            const auto d = log_derivatives(0.5 * cfg.n + ell - 1.0, Complex(z * cfg.radius, 0.0));
            const double entry = (1.0 - 0.5 * cfg.n) / cfg.radius + z * d.k_ratio.real();
            const double limit = (2.0 - cfg.n - ell) / cfg.radius;
            worst = std::max(worst, std::abs(entry - limit));
        }
        check("exterior.zero_class_continuity", worst < 1e-3, "gap " + fmt(worst));
    }
    // interior: free-operator agreement at modest truncation
    {
        WaveguideConfig free_cfg = cfg;
        free_cfg.potential.terms.clear();
        const double k = 0.4, E = -1.5;
        const auto basis = admissible_basis(k, E, cfg.n, free_cfg.trunc, 1e-4);
        Discretization disc = Discretization::from(free_cfg.trunc);
        InteriorOperator op(free_cfg, Complex(k, 0.0), E, free_cfg.radius, disc);
        const Eigen::MatrixXcd lam = op.dtn(basis);
        const Eigen::VectorXcd diag =
            free_interior_dtn_diag(Complex(k, 0.0), E, basis, free_cfg.n, free_cfg.radius);
        double err = 0.0;
        for (int i = 0; i < int(basis.size()); ++i)
            err = std::max(err, std::abs(lam(i, i) - diag[i]));
        check("interior.free_agreement", err < 1e-8, "error " + fmt(err));
    }
    // interior: Hermiticity at one (k, E) with the configured potential
    {
        try {
            const DtNMatrix dtn = assemble_dtn(cfg, 0.9, -3.1);
            const double herm = (dtn.matrix - dtn.matrix.adjoint()).norm() / dtn.matrix.norm();
            check("interior.hermiticity", herm < 1e-8, "asymmetry " + fmt(herm));
        } catch (const std::exception& e) {
            check("interior.hermiticity", false, e.what());
        }
    }
    // interior: Dirichlet eigenvalue monotone decrease in R
    {
        Discretization disc = Discretization::from(cfg.trunc);
        double prev = 0.0;
        bool mono = true;
        for (int i = 0; i <= 3; ++i) {
            const double R = 1.2 + 0.25 * i;
            const auto eigs = dirichlet_eigs(cfg, 0.0, R, 1, disc);
            if (i > 0 && eigs[0] >= prev - 1e-8) mono = false;
            prev = eigs[0];
        }
        check("interior.dirichlet_monotone", mono, "");
    }
    // oracle: mesh convergence of the radial solver
    {
        if (cfg.potential.y_independent() && !cfg.potential.terms.empty()) {
            RadialProblem pb;
            pb.n = cfg.n;
            pb.potential = cfg.potential;
            pb.mesh = 1.0 / 160.0;
            const auto a = radial_bound_states(pb, 1);
            pb.mesh = 1.0 / 320.0;
            const auto b = radial_bound_states(pb, 1);
            if (a.empty() || b.empty()) {
                check("oracles.mesh_convergence", a.empty() == b.empty(),
                      "no bound state at this depth");
            } else {
                check("oracles.mesh_convergence", std::abs(a[0] - b[0]) < 1e-7,
                      "drift " + fmt(std::abs(a[0] - b[0])));
            }
        } else {
            check("oracles.mesh_convergence", true, "skipped: y-dependent potential");
        }
    }
    // dispersion: free operator has no spurious kernel
    {
        WaveguideConfig free_cfg = cfg;
        free_cfg.potential.terms.clear();
        const auto pts = locate_eigenvalues(free_cfg, 0.35, -5.0, -0.1, 12, threads);
        check("dispersion.free_no_kernel", pts.empty(),
              pts.empty() ? "" : "found " + std::to_string(pts.size()));
    }
    // dispersion: Thomas growth is monotone
    {
        try {
            std::vector<double> ts;
            for (double t = 5.0; t <= 50.0; t += 5.0) ts.push_back(t);
            const auto scan = thomas_scan(cfg, 1.0, -1.0, ts);
            bool mono = true;
            for (std::size_t i = 1; i < scan.sigma_min.size(); ++i)
                if (scan.sigma_min[i] <= scan.sigma_min[i - 1]) mono = false;
            check("dispersion.thomas_monotone", mono, "exponent " + fmt(scan.exponent));
        } catch (const std::exception& e) {
            check("dispersion.thomas_monotone", false, e.what());
        }
    }
    return out;
}

}  // namespace cyldtn
