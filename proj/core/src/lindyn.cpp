#include "causalop/lindyn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "causalop/error.hpp"
#include "causalop/linalg.hpp"

namespace causalop::lindyn {

namespace {

void check_dof(Eigen::Index dof, Eigen::Index n) {
  require(dof >= 0 && dof < n, Errc::invalid_argument, "dof index out of range");
}

// M^{-1/2} through M's own Jacobi decomposition.
Eigen::MatrixXd inverse_sqrt(const Eigen::MatrixXd& mass) {
  const auto eig = linalg::jacobi_eigen(mass);
  require(eig.values.minCoeff() > 0.0, Errc::invalid_system, "mass matrix not positive definite");
  return eig.vectors * eig.values.cwiseSqrt().cwiseInverse().asDiagonal() * eig.vectors.transpose();
}

}  // namespace

Signal Trajectories::dof(Eigen::Index index, std::string units) const {
  check_dof(index, displacement.rows());
  std::vector<double> row(static_cast<std::size_t>(displacement.cols()));
  for (Eigen::Index j = 0; j < displacement.cols(); ++j) row[static_cast<std::size_t>(j)] = displacement(index, j);
  return Signal(dt, std::move(row), std::move(units));
}

void MdofSystem::validate() const {
  const Eigen::Index n = mass.rows();
  require(n >= 1, Errc::invalid_system, "system needs at least one degree of freedom");
  require(mass.cols() == n && stiffness.rows() == n && stiffness.cols() == n && damping.rows() == n &&
              damping.cols() == n && influence.size() == n,
          Errc::invalid_system, "matrix dimensions disagree");
  require(mass.allFinite() && stiffness.allFinite() && damping.allFinite() && influence.allFinite(),
          Errc::invalid_system, "non-finite entry");
  require(linalg::is_symmetric(mass), Errc::invalid_system, "mass matrix not symmetric");
  require(linalg::is_symmetric(stiffness), Errc::invalid_system, "stiffness matrix not symmetric");
  const auto eig = linalg::jacobi_eigen(mass);
  require(eig.values.minCoeff() > 0.0, Errc::invalid_system, "mass matrix not positive definite");
}

MdofSystem shear_building(std::span<const double> floor_masses, std::span<const double> story_stiffness) {
  const auto n = static_cast<Eigen::Index>(floor_masses.size());
  require(n >= 1 && story_stiffness.size() == floor_masses.size(), Errc::invalid_system,
          "shear building needs one story stiffness per floor");
  MdofSystem sys;
  sys.mass = Eigen::MatrixXd::Zero(n, n);
  sys.stiffness = Eigen::MatrixXd::Zero(n, n);
  sys.damping = Eigen::MatrixXd::Zero(n, n);
  sys.influence = Eigen::VectorXd::Ones(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto iu = static_cast<std::size_t>(i);
    sys.mass(i, i) = floor_masses[iu];
    sys.stiffness(i, i) += story_stiffness[iu];
    if (i + 1 < n) {
      sys.stiffness(i + 1, i + 1) += story_stiffness[iu];
      sys.stiffness(i, i + 1) -= story_stiffness[iu];
      sys.stiffness(i + 1, i) -= story_stiffness[iu];
    }
  }
  return sys;
}

Eigen::MatrixXd rayleigh_damping(const MdofSystem& system, double a, double b) {
  return a * system.mass + b * system.stiffness;
}

Eigen::VectorXd rayleigh_ratios(const Eigen::VectorXd& omega, double a, double b) {
  return (a / (2.0 * omega.array()) + b * omega.array() / 2.0).matrix();
}

Eigen::MatrixXd modal_damping_matrix(const ClassicalModes& modes, const Eigen::MatrixXd& mass) {
  const Eigen::Index n = modes.count();
  Eigen::VectorXd diag(n);
  for (Eigen::Index l = 0; l < n; ++l) {
    const double ml = modes.phi.col(l).dot(mass * modes.phi.col(l));
    diag[l] = 2.0 * modes.xi[l] * modes.omega[l] / ml;
  }
  const Eigen::MatrixXd mphi = mass * modes.phi;
  return mphi * diag.asDiagonal() * mphi.transpose();
}

ClassicalModes modal_decompose(const MdofSystem& system, std::span<const double> damping_ratios) {
  system.validate();
  const Eigen::Index n = system.dofs();
  require(static_cast<Eigen::Index>(damping_ratios.size()) == n, Errc::invalid_argument,
          "one damping ratio per mode required");
  for (double xi : damping_ratios)
    require(xi >= 0.0 && xi < 1.0, Errc::invalid_argument, "damping ratio must lie in [0, 1)");

  const Eigen::MatrixXd mhalf = inverse_sqrt(system.mass);
  Eigen::MatrixXd a = mhalf * system.stiffness * mhalf;
  a = 0.5 * (a + a.transpose());
  const auto eig = linalg::jacobi_eigen(a);

  require(eig.values[0] > 0.0, Errc::invalid_system, "stiffness matrix not positive definite");
  for (Eigen::Index l = 1; l < n; ++l)
    require(eig.values[l] - eig.values[l - 1] > 1e-9 * eig.values[l], Errc::invalid_system,
            "repeated natural frequencies");

  ClassicalModes modes;
  modes.omega = eig.values.cwiseSqrt();
  modes.xi = Eigen::Map<const Eigen::VectorXd>(damping_ratios.data(), n);
  modes.omega_d = (modes.omega.array() * (1.0 - modes.xi.array().square()).sqrt()).matrix();
  modes.phi = mhalf * eig.vectors;
  modes.gamma.resize(n);
  for (Eigen::Index l = 0; l < n; ++l) {
    auto col = modes.phi.col(l);
    Eigen::Index peak = 0;
    col.cwiseAbs().maxCoeff(&peak);
    if (col[peak] < 0.0) col = -col;
    modes.gamma[l] = col.dot(system.mass * system.influence) / col.dot(system.mass * col);
  }
  return modes;
}

std::vector<double> impulse_response(const ClassicalModes& modes, Eigen::Index dof, double dt, std::size_t m) {
  check_dof(dof, modes.phi.rows());
  require(dt > 0.0, Errc::invalid_argument, "dt must be positive");
  require(m >= 1, Errc::invalid_argument, "need at least one sample");
  std::vector<double> h(m, 0.0);
  for (std::size_t j = 1; j < m; ++j) {
    const double t = dt * double(j);
    double sum = 0.0;
    for (Eigen::Index l = 0; l < modes.count(); ++l) {
      sum += modes.phi(dof, l) * (modes.gamma[l] / modes.omega_d[l]) *
             std::exp(-modes.xi[l] * modes.omega[l] * t) * std::sin(modes.omega_d[l] * t);
    }
    h[j] = -sum;
  }
  return h;
}

std::vector<double> causal_trapezoid(std::span<const double> input, std::span<const double> kernel, double dt) {
  require(kernel.size() >= input.size(), Errc::length_mismatch, "kernel shorter than input");
  const std::size_t m = input.size();
  std::vector<double> out(m, 0.0);
  for (std::size_t i = 1; i < m; ++i) {
    double acc = 0.5 * (input[0] * kernel[i] + input[i] * kernel[0]);
    for (std::size_t j = 1; j < i; ++j) acc += input[j] * kernel[i - j];
    out[i] = dt * acc;
  }
  return out;
}

Signal duhamel_response(const ClassicalModes& modes, Eigen::Index dof, const Signal& ground) {
  ground.validate();
  const auto h = impulse_response(modes, dof, ground.dt, ground.size());
  return Signal(ground.dt, causal_trapezoid(ground.samples, h, ground.dt), "m");
}

Trajectories newmark_response(const MdofSystem& system, const Signal& ground, NewmarkParams params) {
  system.validate();
  ground.validate();
  require(params.beta > 0.0 && params.gamma > 0.0, Errc::invalid_argument, "Newmark parameters must be positive");
  const Eigen::Index n = system.dofs();
  const auto m = static_cast<Eigen::Index>(ground.size());
  const double dt = ground.dt;
  const double beta = params.beta;
  const double gamma = params.gamma;
  const Eigen::MatrixXd& M = system.mass;
  const Eigen::MatrixXd& C = system.damping;
  const Eigen::MatrixXd& K = system.stiffness;
  const Eigen::VectorXd load_shape = -(M * system.influence);

  const Eigen::MatrixXd k_eff = K + (gamma / (beta * dt)) * C + (1.0 / (beta * dt * dt)) * M;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(k_eff);
  require(lu.isInvertible() && lu.rcond() > 1e-14, Errc::singular_matrix, "effective stiffness is singular");
  const Eigen::MatrixXd a_coef = M / (beta * dt) + (gamma / beta) * C;
  const Eigen::MatrixXd b_coef = M / (2.0 * beta) + dt * (gamma / (2.0 * beta) - 1.0) * C;

  Trajectories out;
  out.dt = dt;
  out.displacement = Eigen::MatrixXd::Zero(n, m);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  // Initial acceleration from equilibrium at rest: M a0 = p0.
  Eigen::VectorXd a = M.llt().solve(load_shape * ground.samples[0]);

  for (Eigen::Index i = 0; i + 1 < m; ++i) {
    const double dp = ground.samples[static_cast<std::size_t>(i + 1)] - ground.samples[static_cast<std::size_t>(i)];
    const Eigen::VectorXd dp_hat = load_shape * dp + a_coef * v + b_coef * a;
    const Eigen::VectorXd dx = lu.solve(dp_hat);
    const Eigen::VectorXd dv = (gamma / (beta * dt)) * dx - (gamma / beta) * v + dt * (1.0 - gamma / (2.0 * beta)) * a;
    const Eigen::VectorXd da = (1.0 / (beta * dt * dt)) * dx - (1.0 / (beta * dt)) * v - (1.0 / (2.0 * beta)) * a;
    x += dx;
    v += dv;
    a += da;
    out.displacement.col(i + 1) = x;
  }
  return out;
}

NonClassicalModes state_eigen(const MdofSystem& system) {
  system.validate();
  const Eigen::Index n = system.dofs();
  const Eigen::LLT<Eigen::MatrixXd> mllt(system.mass);
  require(mllt.info() == Eigen::Success, Errc::invalid_system, "mass matrix not invertible");

  Eigen::MatrixXd state = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  state.topRightCorner(n, n).setIdentity();
  state.bottomLeftCorner(n, n) = -mllt.solve(system.stiffness);
  state.bottomRightCorner(n, n) = -mllt.solve(system.damping);

  std::vector<std::complex<double>> upper;
  for (const auto& lambda : linalg::eigenvalues(state))
    if (lambda.imag() > 1e-12 * std::abs(lambda)) upper.push_back(lambda);
  require(static_cast<Eigen::Index>(upper.size()) == n, Errc::invalid_system,
          "overdamped or critically damped mode present");
  std::sort(upper.begin(), upper.end(), [](auto l, auto r) { return std::abs(l) < std::abs(r); });
  for (std::size_t l = 1; l < upper.size(); ++l)
    require(std::abs(upper[l] - upper[l - 1]) > 1e-9 * std::abs(upper[l]), Errc::invalid_system,
            "repeated state-space eigenvalues");

  NonClassicalModes modes;
  modes.lambda.resize(n);
  modes.psi.resize(n, n);
  modes.omega_n.resize(n);
  modes.xi_n.resize(n);
  modes.omega_nd.resize(n);
  modes.beta_delta.resize(n);
  modes.alpha_delta.resize(n, n);
  modes.gamma_delta.resize(n, n);
  modes.gamma_tilde_delta.resize(n, n);

  const Eigen::MatrixXcd mass = system.mass.cast<std::complex<double>>();
  const Eigen::MatrixXcd damp = system.damping.cast<std::complex<double>>();
  const Eigen::VectorXcd mi = (system.mass * system.influence).cast<std::complex<double>>();
  const double scale = state.cwiseAbs().maxCoeff();

  for (Eigen::Index l = 0; l < n; ++l) {
    const std::complex<double> lambda = upper[static_cast<std::size_t>(l)];
    const Eigen::VectorXcd x = linalg::inverse_iteration(state, lambda);
    const double residual = (state.cast<std::complex<double>>() * x - lambda * x).norm();
    require(residual <= 1e-8 * std::max(scale, 1.0) * x.norm(), Errc::eigen_failure,
            "eigenvector residual too large");
    const Eigen::VectorXcd psi = x.head(n);

    modes.lambda[l] = lambda;
    modes.psi.col(l) = psi;
    modes.omega_n[l] = std::abs(lambda);
    modes.xi_n[l] = -lambda.real() / std::abs(lambda);
    modes.omega_nd[l] = modes.omega_n[l] * std::sqrt(1.0 - modes.xi_n[l] * modes.xi_n[l]);

    const std::complex<double> num = -(psi.transpose() * mi)(0);
    const std::complex<double> den =
        2.0 * lambda * (psi.transpose() * mass * psi)(0) + (psi.transpose() * damp * psi)(0);
    const std::complex<double> beta = num / den;
    modes.beta_delta[l] = beta;
    const double root = std::sqrt(1.0 - modes.xi_n[l] * modes.xi_n[l]);
    for (Eigen::Index d = 0; d < n; ++d) {
      const std::complex<double> c = 2.0 * beta * psi[d];
      modes.alpha_delta(l, d) = c.real();
      modes.gamma_delta(l, d) = c.imag();
      modes.gamma_tilde_delta(l, d) = modes.xi_n[l] * c.real() - root * c.imag();
    }
  }
  return modes;
}

double green_nonclassical(const NonClassicalModes& modes, Eigen::Index mode, double t) {
  const double w = modes.omega_n[mode];
  const double xi = modes.xi_n[mode];
  const double wd = modes.omega_nd[mode];
  return -std::exp(-xi * w * t) * std::sin(wd * t) / wd;
}

double green_nonclassical_rate(const NonClassicalModes& modes, Eigen::Index mode, double t) {
  const double w = modes.omega_n[mode];
  const double xi = modes.xi_n[mode];
  const double wd = modes.omega_nd[mode];
  return -std::exp(-xi * w * t) * (wd * std::cos(wd * t) - xi * w * std::sin(wd * t)) / wd;
}

Signal nonclassical_response(const NonClassicalModes& modes, Eigen::Index dof, const Signal& ground) {
  ground.validate();
  check_dof(dof, modes.psi.rows());
  const std::size_t m = ground.size();
  std::vector<double> kernel(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    const double t = ground.dt * double(j);
    double sum = 0.0;
    for (Eigen::Index l = 0; l < modes.count(); ++l) {
      sum += modes.gamma_tilde_delta(l, dof) * modes.omega_n[l] * green_nonclassical(modes, l, t) +
             modes.alpha_delta(l, dof) * green_nonclassical_rate(modes, l, t);
    }
    kernel[j] = -sum;
  }
  return Signal(ground.dt, causal_trapezoid(ground.samples, kernel, ground.dt), "m");
}

}  // namespace causalop::lindyn
