#include "cyldtn/transport.hpp"

#include <algorithm>
#include <cmath>

#include "chebutil.hpp"
#include "util.hpp"

namespace cyldtn {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

double envelope_value(const TransportParams& par, double k) {
    const double u = (k - par.envelope_center) / (4.5 * par.envelope_width);
    if (std::abs(u) >= 1.0) return 0.0;
    const double bump = std::exp(1.0 - 1.0 / (1.0 - u * u));
    return std::exp(-0.5 * std::pow((k - par.envelope_center) / par.envelope_width, 2)) * bump;
}

SpatialGrid make_spatial_grid(const WaveguideConfig& cfg, double R, double r_cap,
                              const TransportParams& par) {
    SpatialGrid g;
    g.n = cfg.n;
    g.R = R;
    g.bg = make_boundary_grid(cfg.n, R, par.field_nang, par.field_ny);
    std::vector<double> gl_x, gl_w;
    cheb::gauss_legendre(par.field_nr, gl_x, gl_w);
    auto add_panel = [&](double a, double b) {
        for (int i = 0; i < par.field_nr; ++i) {
            const double r = 0.5 * (a + b) + 0.5 * (b - a) * gl_x[i];
            g.r.push_back(r);
            g.wr.push_back(0.5 * (b - a) * gl_w[i] * std::pow(r, cfg.n - 1));
        }
    };
    // panels inside [0, R]: width <= 0.5; outside: width <= 1
    int nin = std::max(3, int(std::ceil(R / 0.5)));
    for (int p = 0; p < nin; ++p) add_panel(R * p / nin, R * (p + 1) / nin);
    const int nout = std::max(2, int(std::ceil(r_cap - R)));
    for (int p = 0; p < nout; ++p)
        add_panel(R + (r_cap - R) * p / nout, R + (r_cap - R) * (p + 1) / nout);
    return g;
}

double grid_norm2(const SpatialGrid& g, const Eigen::MatrixXcd& field) {
    const int na = g.bg.angular_points();
    const int ny = int(g.bg.y.size());
    const int n_az = g.n == 3 ? int(g.bg.ang2.size()) : 1;
    double acc = 0.0;
    for (int ir = 0; ir < int(g.r.size()); ++ir) {
        for (int a = 0; a < na; ++a) {
            double wa = g.bg.ang1_w[a / n_az];
            if (g.n == 3) wa *= kTwoPi / n_az;
            for (int b = 0; b < ny; ++b)
                acc += g.wr[ir] * wa / ny * std::norm(field(ir * na + a, b));
        }
    }
    return acc;
}

Complex grid_inner(const SpatialGrid& g, const Eigen::MatrixXcd& u, const Eigen::MatrixXcd& v) {
    const int na = g.bg.angular_points();
    const int ny = int(g.bg.y.size());
    const int n_az = g.n == 3 ? int(g.bg.ang2.size()) : 1;
    Complex acc(0.0, 0.0);
    for (int ir = 0; ir < int(g.r.size()); ++ir) {
        for (int a = 0; a < na; ++a) {
            double wa = g.bg.ang1_w[a / n_az];
            if (g.n == 3) wa *= kTwoPi / n_az;
            for (int b = 0; b < ny; ++b)
                acc += g.wr[ir] * wa / ny * std::conj(u(ir * na + a, b)) * v(ir * na + a, b);
        }
    }
    return acc;
}

// Eigenfunction field on the shared grid at one band point.
Eigen::MatrixXcd point_field(const WaveguideConfig& cfg, const SpatialGrid& grid, double k,
                             double lambda, double R, BoundaryData& kernel_out) {
    const DtNMatrix dtn = assemble_dtn_fixed_radius(cfg, k, lambda, R);
    const WeightedSVD svd = weighted_svd(dtn);
    if (svd.sigma_min > 100.0 * cfg.tol.kernel_tol * svd.norm)
        throw std::runtime_error("transport: interpolated band energy lost the kernel at k=" +
                                 std::to_string(k));
    const int nb = int(dtn.basis.size());
    Eigen::VectorXcd f(nb);
    for (int r = 0; r < nb; ++r)
        f[r] = std::pow(dtn.weight[r], -0.75) * svd.V(r, nb - 1);
    f.normalize();
    kernel_out = BoundaryData(dtn.basis, f);

    // split radii into interior / exterior parts
    std::vector<double> r_in;
    std::vector<int> idx_in, idx_out;
    for (int i = 0; i < int(grid.r.size()); ++i) {
        if (grid.r[i] <= R) {
            r_in.push_back(grid.r[i]);
            idx_in.push_back(i);
        } else {
            idx_out.push_back(i);
        }
    }
    const Discretization disc = Discretization::from(cfg.trunc);
    InteriorOperator op(cfg, Complex(k, 0.0), lambda, R, disc);
    const Eigen::MatrixXcd vin = op.field(kernel_out, r_in, grid.bg);

    const int na = grid.bg.angular_points();
    const int ny = int(grid.bg.y.size());
    const int n_az = cfg.n == 3 ? int(grid.bg.ang2.size()) : 1;
    std::vector<ExteriorPoint> pts;
    pts.reserve(idx_out.size() * na * ny);
    for (int io : idx_out)
        for (int a = 0; a < na; ++a)
            for (int b = 0; b < ny; ++b)
                pts.push_back({grid.r[io], grid.bg.ang1[a / n_az],
                               cfg.n == 3 ? grid.bg.ang2[a % n_az] : 0.0, grid.bg.y[b]});
    const auto vout = exterior_field(kernel_out, Complex(k, 0.0), lambda, cfg.n, R, pts);

    Eigen::MatrixXcd field(int(grid.r.size()) * na, ny);
    for (int ii = 0; ii < int(idx_in.size()); ++ii)
        for (int a = 0; a < na; ++a)
            for (int b = 0; b < ny; ++b)
                field(idx_in[ii] * na + a, b) = vin(ii * na + a, b);
    std::size_t q = 0;
    for (int io : idx_out)
        for (int a = 0; a < na; ++a)
            for (int b = 0; b < ny; ++b) field(io * na + a, b) = vout[q++];

    field /= std::sqrt(grid_norm2(grid, field));
    return field;
}

}  // namespace

WavepacketSpec build_packet(const WaveguideConfig& cfg, const Band& band,
                            const TransportParams& par, int threads) {
    if (band.points.size() < 4) throw std::invalid_argument("build_packet: band too short");
    std::vector<double> bk, bl;
    for (const auto& p : band.points) {
        bk.push_back(p.k);
        bl.push_back(p.lambda);
    }
    const double support_lo = par.envelope_center - 4.5 * par.envelope_width;
    const double support_hi = par.envelope_center + 4.5 * par.envelope_width;

    // velocity spread over the support sets the cell budget at t_max
    double vmin = 1e300, vmax = -1e300;
    for (std::size_t i = 0; i < band.points.size(); ++i) {
        if (bk[i] < support_lo || bk[i] > support_hi) continue;
        vmin = std::min(vmin, band.gradient[i]);
        vmax = std::max(vmax, band.gradient[i]);
    }
    if (vmin > vmax)
        throw std::invalid_argument("build_packet: envelope support does not meet the band");
    const double spread = 0.75 * (vmax - vmin) * par.t_max + 16.0 / par.envelope_width + 64.0;
    int K = std::max(par.k_points_min, 128);
    while (K < 2.0 * spread) K *= 2;
    if (K > par.cell_cap)
        throw std::runtime_error("build_packet: required cell window exceeds the hard cap");

    WavepacketSpec pk;
    pk.K = K;
    pk.dk = kTwoPi / K;
    // envelope support must stay inside the band by two grid steps
    if (support_lo < bk.front() + 2.0 * pk.dk || support_hi > bk.back() - 2.0 * pk.dk)
        throw std::invalid_argument("build_packet: envelope touches the band endpoints");

    for (int i = 0; i < K; ++i) {
        const double k = i * pk.dk;
        const double gv = envelope_value(par, k);
        if (gv <= 1e-14) continue;
        pk.bins.push_back(i);
        pk.kvals.push_back(k);
        pk.g.push_back(Complex(gv, 0.0));
        pk.lambda.push_back(util::interp_cubic(bk, bl, k));
    }
    if (int(pk.bins.size()) < 8)
        throw std::invalid_argument("build_packet: envelope resolves into fewer than 8 bins");

    // gradient at the bins by central differences of the interpolant
    pk.gradient.resize(pk.bins.size());
    for (std::size_t i = 0; i < pk.bins.size(); ++i) {
        const double h = pk.dk;
        pk.gradient[i] = (util::interp_cubic(bk, bl, pk.kvals[i] + h) -
                          util::interp_cubic(bk, bl, pk.kvals[i] - h)) /
                         (2.0 * h);
    }

    // decay scale: slowest admissible mode over the support
    double zmin = 1e300;
    for (std::size_t i = 0; i < pk.bins.size(); ++i) {
        double best = 1e300;
        for (int j = -cfg.trunc.j_max; j <= cfg.trunc.j_max; ++j) {
            const double ej = pk.lambda[i] - std::pow(pk.kvals[i] + kTwoPi * j, 2);
            if (ej < 0.0) best = std::min(best, std::sqrt(-ej));
        }
        zmin = std::min(zmin, best);
    }
    const double r_cap = cfg.radius + std::min(30.0, 18.0 / std::max(zmin, 0.2));
    pk.grid = make_spatial_grid(cfg, cfg.radius, r_cap, par);

    // reconstruct eigenfunctions in parallel, then align phases sequentially
    pk.phi.resize(pk.bins.size());
    std::vector<std::string> errors(pk.bins.size());
    util::parallel_for(int(pk.bins.size()), threads, [&](int i) {
        try {
            BoundaryData kern;
            pk.phi[i] = point_field(cfg, pk.grid, pk.kvals[i], pk.lambda[i], cfg.radius, kern);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });
    for (const auto& e : errors)
        if (!e.empty()) throw std::runtime_error("build_packet: " + e);

    // gauge: make the largest component of the first field real positive,
    // then rotate each neighbor so successive overlaps are real positive
    {
        int imax = 0;
        double amax = 0.0;
        for (int r = 0; r < pk.phi[0].rows(); ++r)
            for (int c = 0; c < pk.phi[0].cols(); ++c)
                if (std::abs(pk.phi[0](r, c)) > amax) {
                    amax = std::abs(pk.phi[0](r, c));
                    imax = r * int(pk.phi[0].cols()) + c;
                }
        const Complex v0 = pk.phi[0](imax / int(pk.phi[0].cols()), imax % int(pk.phi[0].cols()));
        pk.phi[0] *= std::conj(v0) / std::abs(v0);
    }
    for (std::size_t i = 1; i < pk.phi.size(); ++i) {
        const Complex ov = grid_inner(pk.grid, pk.phi[i - 1], pk.phi[i]);
        if (std::abs(ov) < 0.5)
            throw std::runtime_error(
                "build_packet: gauge alignment failed (near-orthogonal neighbors at k=" +
                std::to_string(pk.kvals[i]) + ")");
        pk.phi[i] *= std::conj(ov) / std::abs(ov);
    }

    double w2 = 0.0, wv = 0.0;
    for (std::size_t i = 0; i < pk.g.size(); ++i) {
        w2 += std::norm(pk.g[i]);
        wv += std::norm(pk.g[i]) * pk.gradient[i];
    }
    pk.mean_velocity = wv / w2;
    pk.norm_target = pk.dk / kTwoPi * w2;
    return pk;
}

FieldSamples evolve(const WavepacketSpec& packet, double t) {
    const int K = packet.K;
    const int na = packet.grid.bg.angular_points();
    const int ny = int(packet.grid.bg.y.size());
    const int nr = int(packet.grid.r.size());
    const int nxy = nr * na * ny;

    FieldSamples out;
    out.t = t;
    out.K = K;
    out.packet = &packet;
    out.cell0 = int(std::llround(packet.mean_velocity * t)) - K / 2;
    out.psi.assign(std::size_t(K) * nxy, Complex(0.0, 0.0));

    std::vector<Complex> line(K);
    const double pref = packet.dk / kTwoPi;
    for (int ir = 0; ir < nr; ++ir) {
        for (int a = 0; a < na; ++a) {
            for (int b = 0; b < ny; ++b) {
                std::fill(line.begin(), line.end(), Complex(0.0, 0.0));
                const double yb = packet.grid.bg.y[b];
                for (std::size_t i = 0; i < packet.bins.size(); ++i) {
                    const Complex c = pref * packet.g[i] *
                                      std::exp(Complex(0.0, -t * packet.lambda[i])) *
                                      std::exp(Complex(0.0, -packet.kvals[i] * yb)) *
                                      packet.phi[i](ir * na + a, b);
                    line[packet.bins[i]] = c;
                }
                util::fft_pow2(line);
                // physical cell p = cell0 + q maps to DFT bin (p mod K)
                for (int q = 0; q < K; ++q) {
                    int p = out.cell0 + q;
                    int bin = ((p % K) + K) % K;
                    out.psi[std::size_t(q) * nxy + (ir * na + a) * ny + b] = line[bin];
                }
            }
        }
    }
    return out;
}

Moments moments(const FieldSamples& samples) {
    const WavepacketSpec& pk = *samples.packet;
    const SpatialGrid& g = pk.grid;
    const int na = g.bg.angular_points();
    const int ny = int(g.bg.y.size());
    const int nr = int(g.r.size());
    const int nxy = nr * na * ny;
    const int n_az = g.n == 3 ? int(g.bg.ang2.size()) : 1;

    Moments m;
    double edge = 0.0;
    const int edge_cells = std::max(1, samples.K / 20);
    for (int q = 0; q < samples.K; ++q) {
        const double p = samples.cell0 + q;
        double cell_mass = 0.0;
        for (int ir = 0; ir < nr; ++ir) {
            for (int a = 0; a < na; ++a) {
                double wa = g.bg.ang1_w[a / n_az];
                if (g.n == 3) wa *= kTwoPi / n_az;
                const double a1 = g.bg.ang1[a / n_az];
                const double a2 = g.n == 3 ? g.bg.ang2[a % n_az] : 0.0;
                double x1, x2, x3 = 0.0;
                if (g.n == 2) {
                    x1 = g.r[ir] * std::cos(a1);
                    x2 = g.r[ir] * std::sin(a1);
                } else {
                    x1 = g.r[ir] * std::sin(a1) * std::cos(a2);
                    x2 = g.r[ir] * std::sin(a1) * std::sin(a2);
                    x3 = g.r[ir] * std::cos(a1);
                }
                for (int b = 0; b < ny; ++b) {
                    const double w = g.wr[ir] * wa / ny;
                    const double d =
                        w * std::norm(samples.psi[std::size_t(q) * nxy + (ir * na + a) * ny + b]);
                    cell_mass += d;
                    m.Y += (g.bg.y[b] + p) * d;
                    m.X[0] += x1 * d;
                    m.X[1] += x2 * d;
                    m.X[2] += x3 * d;
                }
            }
        }
        m.norm += cell_mass;
        if (q < edge_cells || q >= samples.K - edge_cells) edge += cell_mass;
    }
    m.Y /= m.norm;
    for (auto& x : m.X) x /= m.norm;
    m.edge_mass = edge / m.norm;
    m.norm = std::sqrt(m.norm);
    return m;
}

TransportRecord transport_record(const WavepacketSpec& packet, const TransportParams& par) {
    TransportRecord rec;
    rec.n = packet.grid.n;
    for (int i = 0; i < par.t_count; ++i) {
        const double t = par.t_max * i / (par.t_count - 1);
        const FieldSamples s = evolve(packet, t);
        const Moments m = moments(s);
        if (m.edge_mass > par.mass_tol)
            throw std::runtime_error("transport: packet mass reached the cell window edge");
        rec.t.push_back(t);
        rec.X.push_back(m.X);
        rec.Y.push_back(m.Y);
        rec.norm.push_back(m.norm);
    }
    return rec;
}

VelocityFit velocity_fit(const TransportRecord& record, const WavepacketSpec& packet) {
    if (record.t.size() < 10) throw std::invalid_argument("velocity_fit: need >= 10 samples");
    if (record.t.back() < 100.0) throw std::invalid_argument("velocity_fit: need T >= 100");
    VelocityFit fit;
    util::linear_fit(record.t, record.Y, fit.v_y, fit.intercept);
    fit.v_y_expected = packet.mean_velocity;
    for (std::size_t i = 1; i < record.t.size(); ++i) {
        double d2 = 0.0;
        for (int c = 0; c < 3; ++c) d2 += std::pow(record.X[i][c] - record.X[0][c], 2);
        fit.v_x_max = std::max(fit.v_x_max, std::sqrt(d2) / record.t[i]);
        const double dev =
            std::abs(record.Y[i] - record.Y[0] - packet.mean_velocity * record.t[i]);
        fit.max_linear_dev = std::max(fit.max_linear_dev, dev);
    }
    return fit;
}

}  // namespace cyldtn
