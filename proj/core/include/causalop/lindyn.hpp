#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "causalop/signal.hpp"

/// Exact causal response of linear multi-degree-of-freedom systems
///
///     M x'' + C x' + K x = -M iota a_g(t),   x(0) = x'(0) = 0,
///
/// via modal Green's functions (classical damping), complex state-space
/// eigenpairs (non-classical damping) and a Newmark-beta integrator that
/// serves as an independent oracle. All functions are pure.
namespace causalop::lindyn {

struct MdofSystem {
  Eigen::MatrixXd mass;       // kg
  Eigen::MatrixXd damping;    // N s / m
  Eigen::MatrixXd stiffness;  // N / m
  Eigen::VectorXd influence;  // dimensionless

  Eigen::Index dofs() const noexcept { return mass.rows(); }

  /// Shapes agree, M and K symmetric to 1e-12 relative, M positive definite.
  /// Throws Errc::invalid_system otherwise.
  void validate() const;
};

/// Undamped modes plus externally supplied modal damping, ascending in omega.
struct ClassicalModes {
  Eigen::VectorXd omega;    // rad/s
  Eigen::VectorXd xi;       // damping ratio per mode
  Eigen::VectorXd omega_d;  // omega * sqrt(1 - xi^2)
  Eigen::MatrixXd phi;      // column l is mode shape l, mass-normalised
  Eigen::VectorXd gamma;    // participation factor phi^T M iota / phi^T M phi

  Eigen::Index count() const noexcept { return omega.size(); }
};

/// One representative of each conjugate pair of state-space eigenvalues,
/// ascending in |lambda|. Coefficients with a DOF axis are stored as
/// (mode, dof) matrices.
struct NonClassicalModes {
  Eigen::VectorXcd lambda;
  Eigen::MatrixXcd psi;          // column l: displacement part of eigenvector l
  Eigen::VectorXd omega_n;       // |lambda|
  Eigen::VectorXd xi_n;          // -Re(lambda) / |lambda|
  Eigen::VectorXd omega_nd;      // omega_n * sqrt(1 - xi_n^2)
  Eigen::VectorXcd beta_delta;   // -psi^T M iota / (2 lambda psi^T M psi + psi^T C psi)
  Eigen::MatrixXd alpha_delta;   // Re(2 beta psi_dof)
  Eigen::MatrixXd gamma_delta;   // Im(2 beta psi_dof)
  Eigen::MatrixXd gamma_tilde_delta;  // xi_n alpha - sqrt(1 - xi_n^2) gamma

  Eigen::Index count() const noexcept { return lambda.size(); }
};

/// Displacement histories of every DOF; column j is time t_j = j * dt.
struct Trajectories {
  double dt = 0.0;
  Eigen::MatrixXd displacement;  // dofs x m

  Signal dof(Eigen::Index index, std::string units = "m") const;
};

struct NewmarkParams {
  double beta = 0.25;
  double gamma = 0.5;
};

/// Uniform shear building. Index 0 is the roof; story_stiffness[i] is the
/// story spring below floor i (the last one connects to the ground).
/// Influence vector is all ones, damping matrix zero.
MdofSystem shear_building(std::span<const double> floor_masses,
                          std::span<const double> story_stiffness);

/// C = a M + b K.
Eigen::MatrixXd rayleigh_damping(const MdofSystem& system, double a, double b);

/// Classical damping matrix reproducing the given modal ratios exactly:
/// C = M Phi diag(2 xi w / M_l) Phi^T M.
Eigen::MatrixXd modal_damping_matrix(const ClassicalModes& modes, const Eigen::MatrixXd& mass);

/// Modal ratios implied by C = a M + b K: xi_l = a / (2 w_l) + b w_l / 2.
Eigen::VectorXd rayleigh_ratios(const Eigen::VectorXd& omega, double a, double b);

ClassicalModes modal_decompose(const MdofSystem& system, std::span<const double> damping_ratios);

/// Green's function of the chosen DOF sampled at t_j = j dt, j < m. h(0) = 0.
std::vector<double> impulse_response(const ClassicalModes& modes, Eigen::Index dof, double dt,
                                     std::size_t m);

/// Trapezoidal Duhamel convolution of the ground motion with the Green's
/// function on the signal grid. Output sample 0 is exactly zero.
Signal duhamel_response(const ClassicalModes& modes, Eigen::Index dof, const Signal& ground);

/// Newmark-beta time stepping with piecewise linear load. Throws
/// Errc::singular_matrix when the effective stiffness cannot be factored.
Trajectories newmark_response(const MdofSystem& system, const Signal& ground,
                              NewmarkParams params = {});

/// Complex eigenpairs of [[0, I], [-M^-1 K, -M^-1 C]] by Hessenberg + shifted
/// QR with inverse-iteration eigenvectors. Overdamped (real) modes and
/// repeated frequencies are rejected.
NonClassicalModes state_eigen(const MdofSystem& system);

/// H(t) = -(1/w_nd) e^{-xi w t} sin(w_nd t) for one non-classical mode.
double green_nonclassical(const NonClassicalModes& modes, Eigen::Index mode, double t);
/// Analytic time derivative of green_nonclassical.
double green_nonclassical_rate(const NonClassicalModes& modes, Eigen::Index mode, double t);

/// x(t) = -sum_l [gt_l w_l D_l(t) + a_l D'_l(t)], each D a trapezoidal
/// convolution against H_l and its derivative.
Signal nonclassical_response(const NonClassicalModes& modes, Eigen::Index dof,
                             const Signal& ground);

/// Trapezoidal causal convolution y_i = dt * sum'_{j<=i} u_j k_{i-j}, y_0 = 0.
std::vector<double> causal_trapezoid(std::span<const double> input, std::span<const double> kernel,
                                     double dt);

}  // namespace causalop::lindyn
