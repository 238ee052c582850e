#include "chebutil.hpp"

#include <cmath>
#include <stdexcept>

namespace cyldtn::cheb {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

Eigen::VectorXd nodes(int m) {
    if (m < 2) throw std::invalid_argument("cheb::nodes: need m >= 2");
    Eigen::VectorXd x(m);
    for (int j = 0; j < m; ++j) x[j] = std::cos(kPi * j / (m - 1));
    return x;
}

Eigen::MatrixXd diff_matrix(int m) {
    const Eigen::VectorXd x = nodes(m);
    const int N = m - 1;
    Eigen::VectorXd c(m);
    for (int i = 0; i < m; ++i) {
        c[i] = (i == 0 || i == N) ? 2.0 : 1.0;
        if (i % 2 == 1) c[i] = -c[i];
    }
    Eigen::MatrixXd D(m, m);
    for (int i = 0; i < m; ++i) {
        double rowsum = 0.0;
        for (int j = 0; j < m; ++j) {
            if (i == j) continue;
            D(i, j) = (c[i] / c[j]) / (x[i] - x[j]);
            rowsum += D(i, j);
        }
        D(i, i) = -rowsum;  // negative-sum trick for the diagonal
    }
    return D;
}

Eigen::VectorXd clenshaw_curtis(int m) {
    const int N = m - 1;
    Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
    if (N == 0) throw std::invalid_argument("clenshaw_curtis: need m >= 2");
    std::vector<double> theta(m);
    for (int j = 0; j < m; ++j) theta[j] = kPi * j / N;
    std::vector<double> v(N - 1, 1.0);
    if (N % 2 == 0) {
        w[0] = w[N] = 1.0 / (N * N - 1.0);
        for (int k = 1; k <= N / 2 - 1; ++k)
            for (int i = 1; i < N; ++i)
                v[i - 1] -= 2.0 * std::cos(2.0 * k * theta[i]) / (4.0 * k * k - 1.0);
        for (int i = 1; i < N; ++i) v[i - 1] -= std::cos(N * theta[i]) / (N * N - 1.0);
    } else {
        w[0] = w[N] = 1.0 / (N * N);
        for (int k = 1; k <= (N - 1) / 2; ++k)
            for (int i = 1; i < N; ++i)
                v[i - 1] -= 2.0 * std::cos(2.0 * k * theta[i]) / (4.0 * k * k - 1.0);
    }
    for (int i = 1; i < N; ++i) w[i] = 2.0 * v[i - 1] / N;
    return w;
}

Eigen::MatrixXd fold(const Eigen::MatrixXd& full, int half, int parity) {
    const int m = int(full.rows());
    if (m % 2 != 0 || half != m / 2)
        throw std::invalid_argument("cheb::fold: full grid must have even count = 2*half");
    Eigen::MatrixXd out(half, half);
    for (int i = 0; i < half; ++i)
        for (int j = 0; j < half; ++j)
            out(i, j) = full(i, j) + parity * full(i, m - 1 - j);
    return out;
}

Eigen::VectorXd bary_weights(const Eigen::VectorXd& x) {
    const int m = int(x.size());
    Eigen::VectorXd w = Eigen::VectorXd::Ones(m);
    for (int i = 0; i < m; ++i) {
        double p = 1.0;
        for (int j = 0; j < m; ++j) {
            if (j == i) continue;
            p *= (x[i] - x[j]);
        }
        w[i] = 1.0 / p;
    }
    // rescale to avoid under/overflow for larger m
    const double s = w.cwiseAbs().maxCoeff();
    return w / s;
}

std::complex<double> bary_eval(const Eigen::VectorXd& x, const Eigen::VectorXd& w,
                               const Eigen::VectorXcd& v, double t) {
    std::complex<double> num(0.0, 0.0);
    double den = 0.0;
    for (int i = 0; i < x.size(); ++i) {
        const double d = t - x[i];
        if (d == 0.0) return v[i];
        const double q = w[i] / d;
        num += q * v[i];
        den += q;
    }
    return num / den;
}

void gauss_legendre(int m, std::vector<double>& x, std::vector<double>& w) {
    x.assign(m, 0.0);
    w.assign(m, 0.0);
    const int half = (m + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (m + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < m; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            pp = m * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        x[i] = -z;
        x[m - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[m - 1 - i] = w[i];
    }
}

}  // namespace cyldtn::cheb
