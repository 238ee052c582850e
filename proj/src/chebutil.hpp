#pragma once

#include <Eigen/Dense>
#include <vector>

// Chebyshev collocation pieces shared by the interior solver and the
// field quadratures.

namespace cyldtn::cheb {

/// Chebyshev points x_j = cos(j pi / (m-1)), j = 0..m-1, descending.
Eigen::VectorXd nodes(int m);

/// Spectral differentiation matrix on the node set above.
Eigen::MatrixXd diff_matrix(int m);

/// Clenshaw-Curtis weights for the same node set (integrates over [-1,1]).
Eigen::VectorXd clenshaw_curtis(int m);

/// Fold a full-grid operator onto the positive half-grid for functions of
/// parity p (p = +1 even, -1 odd) about x = 0. The full grid must have an
/// even point count so that x = 0 is not a node.
Eigen::MatrixXd fold(const Eigen::MatrixXd& full, int half, int parity);

/// Barycentric weights for an arbitrary node set.
Eigen::VectorXd bary_weights(const Eigen::VectorXd& x);

/// Barycentric interpolation of values at nodes x to point t.
std::complex<double> bary_eval(const Eigen::VectorXd& x, const Eigen::VectorXd& w,
                               const Eigen::VectorXcd& v, double t);

/// Gauss-Legendre nodes and weights on [-1,1].
void gauss_legendre(int m, std::vector<double>& x, std::vector<double>& w);

}  // namespace cyldtn::cheb
