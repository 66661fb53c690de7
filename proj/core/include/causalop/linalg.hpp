#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

/// Small dense eigen-solvers used by the structural dynamics module.
/// Sized for n <= 64; all routines are O(n^3) per sweep/iteration.
namespace causalop::linalg {

struct SymmetricEigen {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // column k pairs with values[k], unit 2-norm
  int sweeps = 0;
};

/// Cyclic Jacobi rotations. Throws Errc::eigen_failure if the off-diagonal
/// mass has not vanished after `max_sweeps` full sweeps.
SymmetricEigen jacobi_eigen(Eigen::MatrixXd a, int max_sweeps = 100);

bool is_symmetric(const Eigen::MatrixXd& a, double rel_tol = 1e-12);

/// Orthogonal (Householder) reduction to upper Hessenberg form.
Eigen::MatrixXd hessenberg(Eigen::MatrixXd a);

/// Francis double-shift QR on an upper Hessenberg matrix. The total number of
/// QR sweeps is capped at `max_iterations`; exceeding it throws eigen_failure.
std::vector<std::complex<double>> hessenberg_qr(Eigen::MatrixXd h, int max_iterations);

/// Eigenvalues of a general real matrix: balancing, Hessenberg reduction and
/// shifted QR with an iteration budget of 30 * n.
std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXd& a);

/// Right eigenvector for an (approximate) eigenvalue by inverse iteration,
/// normalised to unit 2-norm.
Eigen::VectorXcd inverse_iteration(const Eigen::MatrixXd& a, std::complex<double> lambda,
                                   int iterations = 4);

}  // namespace causalop::linalg
