#include "cyldtn/boundary.hpp"

#include <json.hpp>

#include <cmath>

#include "chebutil.hpp"

namespace cyldtn {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

/// Normalized associated Legendre \bar P_ell^m(cos t), orthonormal over the
/// sphere with the azimuthal factor split off (Condon-Shortley free).
double norm_assoc_legendre(int ell, int m, double x) {
    const double s2 = std::max(0.0, 1.0 - x * x);
    const double s = std::sqrt(s2);
    double pmm = 1.0 / std::sqrt(4.0 * kPi);
    for (int k = 1; k <= m; ++k)
        pmm *= -std::sqrt((2.0 * k + 1.0) / (2.0 * k)) * s;
    if (ell == m) return pmm;
    double pm1 = x * std::sqrt(2.0 * m + 3.0) * pmm;
    if (ell == m + 1) return pm1;
    double p = 0.0;
    for (int l = m + 2; l <= ell; ++l) {
        const double a = std::sqrt((4.0 * l * l - 1.0) / (double(l) * l - double(m) * m));
        const double b =
            std::sqrt((double(l - 1) * (l - 1) - double(m) * m) / (4.0 * double(l - 1) * (l - 1) - 1.0));
        p = a * (x * pm1 - b * pmm);
        pmm = pm1;
        pm1 = p;
    }
    return p;
}

}  // namespace

double real_sph_harm(int ell, int m, double polar, double azimuth) {
    const int am = std::abs(m);
    const double p = norm_assoc_legendre(ell, am, std::cos(polar));
    if (m == 0) return p;
    const double f = std::sqrt(2.0) * p;
    return (m > 0) ? f * std::cos(am * azimuth) : f * std::sin(am * azimuth);
}

BoundaryData::BoundaryData(std::vector<ModeIndex> b, Eigen::VectorXcd c)
    : basis(std::move(b)), coeff(std::move(c)) {
    if (int(basis.size()) != coeff.size())
        throw std::invalid_argument("BoundaryData: basis/coefficient length mismatch");
}

double sobolev_norm(const BoundaryData& f, double s) {
    double acc = 0.0;
    for (int i = 0; i < f.size(); ++i)
        acc += std::pow(f.basis[i].sobolev_weight(), s) * std::norm(f.coeff[i]);
    return std::sqrt(acc);
}

BoundaryData project_admissible(const BoundaryData& f, const std::vector<ModeIndex>& target) {
    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(target.size());
    for (int i = 0; i < int(target.size()); ++i) {
        bool found = false;
        for (int l = 0; l < f.size(); ++l) {
            if (f.basis[l] == target[i]) {
                c[i] = f.coeff[l];
                found = true;
                break;
            }
        }
        if (!found)
            throw std::invalid_argument("project_admissible: target index missing from source basis");
    }
    return BoundaryData(target, std::move(c));
}

BoundaryGrid make_boundary_grid(int n, double R, int n_ang, int n_y) {
    BoundaryGrid g;
    g.n = n;
    g.R = R;
    g.y.resize(n_y);
    for (int b = 0; b < n_y; ++b) g.y[b] = double(b) / n_y;
    if (n == 2) {
        g.ang1.resize(n_ang);
        g.ang1_w.assign(n_ang, kTwoPi / n_ang);
        for (int a = 0; a < n_ang; ++a) g.ang1[a] = kTwoPi * a / n_ang;
    } else {
        std::vector<double> x, w;
        cheb::gauss_legendre(n_ang, x, w);
        g.ang1.resize(n_ang);
        g.ang1_w.resize(n_ang);
        for (int a = 0; a < n_ang; ++a) {
            g.ang1[a] = std::acos(x[a]);
            g.ang1_w[a] = w[a];
        }
        const int n_az = 2 * n_ang;
        g.ang2.resize(n_az);
        for (int a = 0; a < n_az; ++a) g.ang2[a] = kTwoPi * a / n_az;
    }
    return g;
}

Complex basis_value(const ModeIndex& idx, int n, double R, double a1, double a2, double yv) {
    const Complex torus = std::exp(Complex(0.0, kTwoPi * idx.j * yv));
    if (n == 2) {
        const Complex ang = std::exp(Complex(0.0, idx.m * a1)) / std::sqrt(kTwoPi);
        return ang * torus / std::sqrt(R);
    }
    return real_sph_harm(idx.ell, idx.m, a1, a2) * torus / R;
}

Eigen::MatrixXcd synthesize(const BoundaryData& f, const BoundaryGrid& grid) {
    int ell_max = 0, j_max = 0;
    for (const auto& idx : f.basis) {
        ell_max = std::max(ell_max, idx.ell);
        j_max = std::max(j_max, std::abs(idx.j));
    }
    if (int(grid.y.size()) <= 2 * j_max)
        throw std::invalid_argument("synthesize: torus grid undersampled");
    if (grid.n == 2) {
        if (int(grid.ang1.size()) <= 2 * ell_max)
            throw std::invalid_argument("synthesize: angular grid undersampled");
    } else if (int(grid.ang1.size()) <= ell_max) {
        throw std::invalid_argument("synthesize: polar grid undersampled");
    }

    const int na = grid.angular_points();
    const int ny = int(grid.y.size());
    Eigen::MatrixXcd vals = Eigen::MatrixXcd::Zero(na, ny);
    const int n_az = grid.n == 3 ? int(grid.ang2.size()) : 1;
    for (int i = 0; i < f.size(); ++i) {
        for (int a = 0; a < na; ++a) {
            const double a1 = grid.ang1[a / n_az];
            const double a2 = grid.n == 3 ? grid.ang2[a % n_az] : 0.0;
            for (int b = 0; b < ny; ++b)
                vals(a, b) += f.coeff[i] *
                              basis_value(f.basis[i], grid.n, grid.R, a1, a2, grid.y[b]);
        }
    }
    return vals;
}

BoundaryData analyze(const Eigen::MatrixXcd& values, const std::vector<ModeIndex>& basis,
                     const BoundaryGrid& grid) {
    const int na = grid.angular_points();
    const int ny = int(grid.y.size());
    if (values.rows() != na || values.cols() != ny)
        throw std::invalid_argument("analyze: grid/value shape mismatch");
    const int n_az = grid.n == 3 ? int(grid.ang2.size()) : 1;
    const double surf = std::pow(grid.R, grid.n - 1);
    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(basis.size());
    for (int i = 0; i < int(basis.size()); ++i) {
        Complex acc(0.0, 0.0);
        for (int a = 0; a < na; ++a) {
            const double a1 = grid.ang1[a / n_az];
            const double a2 = grid.n == 3 ? grid.ang2[a % n_az] : 0.0;
            double wa = grid.ang1_w[a / n_az];
            if (grid.n == 3) wa *= kTwoPi / n_az;
            for (int b = 0; b < ny; ++b) {
                const Complex bv = basis_value(basis[i], grid.n, grid.R, a1, a2, grid.y[b]);
                acc += values(a, b) * std::conj(bv) * wa / double(ny);
            }
        }
        c[i] = acc * surf;
    }
    return BoundaryData(basis, std::move(c));
}

std::string boundary_to_json(const BoundaryData& f) {
    nlohmann::json j;
    j["basis"] = nlohmann::json::array();
    j["coeff"] = nlohmann::json::array();
    for (int i = 0; i < f.size(); ++i) {
        j["basis"].push_back({f.basis[i].j, f.basis[i].ell, f.basis[i].m});
        j["coeff"].push_back({f.coeff[i].real(), f.coeff[i].imag()});
    }
    return j.dump();
}

BoundaryData boundary_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    std::vector<ModeIndex> basis;
    Eigen::VectorXcd c(j["coeff"].size());
    for (std::size_t i = 0; i < j["basis"].size(); ++i) {
        basis.push_back({j["basis"][i][0].get<int>(), j["basis"][i][1].get<int>(),
                         j["basis"][i][2].get<int>()});
        c[long(i)] = Complex(j["coeff"][i][0].get<double>(), j["coeff"][i][1].get<double>());
    }
    return BoundaryData(std::move(basis), std::move(c));
}

}  // namespace cyldtn
