#pragma once

#include <complex>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <string>
#include <thread>
#include <vector>

// Small shared helpers: deterministic parallel loops, hashing, fitting,
// and a radix-2 FFT for the wavepacket cell sums.

namespace cyldtn::util {

/// Parallel loop with deterministic results: each index is computed
/// independently and written to caller-owned storage.
inline void parallel_for(int n, int threads, const std::function<void(int)>& body) {
    if (threads <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    const int nt = std::min(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (int t = 0; t < nt; ++t) {
        pool.emplace_back([=, &body] {
            for (int i = t; i < n; i += nt) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Least-squares slope and intercept of y against x.
inline void linear_fit(const std::vector<double>& x, const std::vector<double>& y,
                       double& slope, double& intercept) {
    const int n = int(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double det = n * sxx - sx * sx;
    slope = (n * sxy - sx * sy) / det;
    intercept = (sy * sxx - sx * sxy) / det;
}

/// Golden-section minimization of f on [a, b] down to interval width tol.
inline double golden_min(const std::function<double(double)>& f, double a, double b,
                         double tol) {
    const double gr = 0.6180339887498948482;
    double x1 = b - gr * (b - a);
    double x2 = a + gr * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > tol) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

/// In-place radix-2 FFT, sign convention X_p = sum_i x_i e^{-2 pi i * i p / N}.
inline void fft_pow2(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0) throw std::invalid_argument("fft: size must be 2^k");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * 3.14159265358979323846 / double(len);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                const auto u = a[i + j];
                const auto v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

/// Local cubic (4-point Lagrange) interpolation on a sorted abscissa grid.
inline double interp_cubic(const std::vector<double>& xs, const std::vector<double>& ys,
                           double x) {
    const int n = int(xs.size());
    if (n < 2) return ys.empty() ? 0.0 : ys[0];
    int lo = 0, hi = n - 1;
    while (hi - lo > 1) {
        const int mid = (lo + hi) / 2;
        if (xs[mid] <= x) lo = mid;
        else hi = mid;
    }
    int i0 = lo - 1;
    if (i0 < 0) i0 = 0;
    if (i0 + 3 > n - 1) i0 = n - 4;
    if (i0 < 0) i0 = 0;  // fewer than 4 points: fall back to what exists
    const int m = std::min(4, n - i0);
    double acc = 0.0;
    for (int i = 0; i < m; ++i) {
        double l = 1.0;
        for (int j = 0; j < m; ++j) {
            if (i == j) continue;
            l *= (x - xs[i0 + j]) / (xs[i0 + i] - xs[i0 + j]);
        }
        acc += l * ys[i0 + i];
    }
    return acc;
}

}  // namespace cyldtn::util
