#include "common.hpp"
#include "causalop/linalg.hpp"
#include "causalop/signalgen.hpp"

using namespace causalop;
using namespace causalop::lindyn;
using testutil::pi;

namespace {

Signal step_signal(double dt, std::size_t m) { return Signal(dt, std::vector<double>(m, 1.0)); }

// Closed-form SDOF displacement under unit constant ground acceleration, load -m*ug.
double step_closed_form(double w, double xi, double t) {
  const double wd = w * std::sqrt(1 - xi * xi);
  return -(1 / (w * w)) * (1 - std::exp(-xi * w * t) * (std::cos(wd * t) + (xi * w / wd) * std::sin(wd * t)));
}

std::vector<double> closed_step(double w, double xi, double dt, std::size_t m) {
  std::vector<double> x(m);
  for (std::size_t j = 0; j < m; ++j) x[j] = step_closed_form(w, xi, dt * double(j));
  return x;
}

Signal motion(std::uint64_t seed, double dt = 0.02) {
  return signalgen::synth_ground_motion(seed, 10.0, dt, {0.1, 0.45 / dt}, 2.0);
}

MdofSystem two_dof() {
  MdofSystem s;
  s.mass = Eigen::MatrixXd::Identity(2, 2);
  s.stiffness = (Eigen::MatrixXd(2, 2) << 2, -1, -1, 1).finished();
  s.damping = Eigen::MatrixXd::Zero(2, 2);
  s.influence = Eigen::VectorXd::Ones(2);
  return s;
}

}  // namespace

TEST_CASE("SDOF modal decomposition is the scalar eigenproblem") {
  const auto modes = modal_decompose(testutil::sdof(1.0, 4 * pi * pi), std::vector<double>{0.05});
  CHECK(modes.omega[0] == doctest::Approx(2 * pi).epsilon(1e-14));
  CHECK(modes.omega_d[0] == doctest::Approx(2 * pi * std::sqrt(1 - 0.0025)).epsilon(1e-14));
  CHECK(modes.gamma[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(modes.phi(0, 0)) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("2-DOF frequencies match the characteristic polynomial") {
  const auto modes = modal_decompose(two_dof(), std::vector<double>{0.0, 0.0});
  CHECK(modes.omega[0] * modes.omega[0] == doctest::Approx((3 - std::sqrt(5.0)) / 2).epsilon(1e-12));
  CHECK(modes.omega[1] * modes.omega[1] == doctest::Approx((3 + std::sqrt(5.0)) / 2).epsilon(1e-12));
}

TEST_CASE("six-storey chain: frozen frequencies, orthogonality, residuals") {
  // Frozen from numpy.linalg.eigvalsh on the same stiffness / mass ratio.
  const double expected[] = {2.4107336051064587, 7.092097740850712, 11.361294934623118,
                             14.97021496342202,  17.709120513064196, 19.41883634852104};
  const auto def = testutil::chain6();
  const auto modes = modal_decompose(def.system, def.modal_xi);
  REQUIRE(modes.count() == 6);
  for (int l = 0; l < 6; ++l) {
    CHECK(modes.omega[l] == doctest::Approx(expected[l]).epsilon(1e-12));
    if (l) CHECK(modes.omega[l] > modes.omega[l - 1]);
    CHECK(std::abs(modes.omega_d[l] - modes.omega[l] * std::sqrt(1 - modes.xi[l] * modes.xi[l])) <=
          1e-12 * modes.omega[l]);
    const Eigen::VectorXd phi = modes.phi.col(l);
    const Eigen::VectorXd kphi = def.system.stiffness * phi;
    const double w2 = modes.omega[l] * modes.omega[l];
    CHECK((kphi - w2 * def.system.mass * phi).norm() <= 1e-9 * kphi.norm());
  }
  const Eigen::MatrixXd g = modes.phi.transpose() * def.system.mass * modes.phi;
  for (int a = 0; a < 6; ++a)
    for (int b = 0; b < 6; ++b)
      if (a != b) CHECK(std::abs(g(a, b)) <= 1e-8 * std::sqrt(g(a, a) * g(b, b)));
}

TEST_CASE("modal_decompose rejects invalid systems and ratios") {
  auto bad = two_dof();
  bad.mass(0, 1) = 0.5;
  CHECK_THROWS_CODE(modal_decompose(bad, std::vector<double>{0, 0}), Errc::invalid_system);
  auto indefinite = two_dof();
  indefinite.mass(1, 1) = -1;
  CHECK_THROWS_CODE(modal_decompose(indefinite, std::vector<double>{0, 0}), Errc::invalid_system);
  CHECK_THROWS_CODE(modal_decompose(two_dof(), std::vector<double>{0.05, 1.0}), Errc::invalid_argument);
}

TEST_CASE("impulse response values") {
  const auto undamped = modal_decompose(testutil::sdof(1.0, 4 * pi * pi), std::vector<double>{0.0});
  const auto h = impulse_response(undamped, 0, 0.25, 3);
  CHECK(h[0] == 0.0);
  CHECK(h[1] == doctest::Approx(-1 / (2 * pi)).epsilon(1e-13));
  const auto damped = modal_decompose(testutil::sdof(1.0, 4 * pi * pi), std::vector<double>{0.05});
  // Frozen from a 30-digit mpmath evaluation.
  CHECK(impulse_response(damped, 0, 1.0, 2)[1] == doctest::Approx(0.000914709403536139).epsilon(1e-12));
  const auto chain = modal_decompose(testutil::chain6().system, testutil::chain6().modal_xi);
  CHECK(impulse_response(chain, 3, 0.01, 5)[0] == 0.0);
}

TEST_CASE("Duhamel response: zero, step and impulse") {
  const auto modes = modal_decompose(testutil::sdof(1.0, 4 * pi * pi), std::vector<double>{0.05});
  const auto zero = duhamel_response(modes, 0, zeros(0.01, 100));
  for (double v : zero.samples) CHECK(v == 0.0);

  const double dt = 0.005;
  const std::size_t m = 2001;
  const auto x = duhamel_response(modes, 0, step_signal(dt, m));
  CHECK(x.samples[0] == 0.0);
  const auto exact = closed_step(2 * pi, 0.05, dt, m);
  double worst = 0.0;
  for (std::size_t j = 0; j < m; ++j) worst = std::max(worst, std::abs(x.samples[j] - exact[j]));
  CHECK(worst <= 1e-4);
  const auto late = duhamel_response(modes, 0, step_signal(dt, 12001));
  CHECK(std::abs(late.samples.back() - (-1 / (4 * pi * pi))) <= 1e-4);
  CHECK(testutil::rel_l2(x.samples, closed_step(2 * pi, 0.05, dt, m)) <= 1e-3);

  // Trapezoid end weight is 1/2, so an impulse of height 2/dt reproduces h.
  const auto chain = modal_decompose(testutil::chain6().system, testutil::chain6().modal_xi);
  std::vector<double> u(400, 0.0);
  u[0] = 2.0 / 0.02;
  const auto y = duhamel_response(chain, 0, Signal(0.02, u));
  const auto h = impulse_response(chain, 0, 0.02, 400);
  for (std::size_t j = 0; j < 400; ++j) CHECK(y.samples[j] == doctest::Approx(h[j]).epsilon(1e-12).scale(1e-3));
  u[0] = 1.0 / 0.02;
  const auto half = duhamel_response(chain, 0, Signal(0.02, u));
  for (std::size_t j = 0; j < 400; ++j) CHECK(half.samples[j] == doctest::Approx(0.5 * h[j]).epsilon(1e-12).scale(1e-3));
}

TEST_CASE("Newmark oracle") {
  const double dt = 0.005;
  const std::size_t m = 2001;
  auto sys = testutil::sdof(1.0, 4 * pi * pi, 2 * 0.05 * 2 * pi);
  const auto zero = newmark_response(sys, zeros(dt, 50));
  CHECK(zero.displacement.cwiseAbs().maxCoeff() == 0.0);
  const auto x = newmark_response(sys, step_signal(dt, m)).dof(0);
  CHECK(testutil::rel_l2(x.samples, closed_step(2 * pi, 0.05, dt, m)) <= 1e-3);

  const auto def = testutil::chain6();
  const auto modes = modal_decompose(def.system, def.modal_xi);
  const auto g = motion(5);
  const auto nm = newmark_response(def.system, g).dof(0);
  const auto dh = duhamel_response(modes, 0, g);
  CHECK(testutil::rel_l2(dh.samples, nm.samples) <= 5e-3);

  // K = -(4 / dt^2) M with C = 0 makes the effective stiffness vanish.
  auto singular = testutil::sdof(1.0, -4.0 / (0.01 * 0.01));
  CHECK_THROWS_CODE(newmark_response(singular, zeros(0.01, 10)), Errc::singular_matrix);
}

TEST_CASE("state-space eigenpairs") {
  const double w = 3.0, xi = 0.1;
  const auto sdof = state_eigen(testutil::sdof(1.0, w * w, 2 * xi * w));
  REQUIRE(sdof.count() == 1);
  CHECK(sdof.lambda[0].real() == doctest::Approx(-xi * w).epsilon(1e-12));
  CHECK(std::abs(sdof.lambda[0].imag()) == doctest::Approx(w * std::sqrt(1 - xi * xi)).epsilon(1e-12));
  CHECK(sdof.omega_n[0] == doctest::Approx(w).epsilon(1e-12));
  CHECK(sdof.xi_n[0] == doctest::Approx(xi).epsilon(1e-12));

  auto ray = two_dof();
  const double a = 0.05, b = 0.02;
  ray.damping = rayleigh_damping(ray, a, b);
  const auto classical = modal_decompose(ray, std::vector<double>{0, 0});
  const auto ratios = rayleigh_ratios(classical.omega, a, b);
  const auto nc = state_eigen(ray);
  for (int l = 0; l < 2; ++l) {
    CHECK(nc.omega_n[l] == doctest::Approx(classical.omega[l]).epsilon(1e-8));
    CHECK(nc.xi_n[l] == doctest::Approx(ratios[l]).epsilon(1e-8));
  }

  auto odd = two_dof();
  odd.damping = (Eigen::MatrixXd(2, 2) << 0.3, 0.0, 0.0, 0.05).finished();
  const auto modes = state_eigen(odd);
  const Eigen::Index n = 2;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  A.topRightCorner(n, n).setIdentity();
  A.bottomLeftCorner(n, n) = -odd.stiffness;
  A.bottomRightCorner(n, n) = -odd.damping;
  for (Eigen::Index l = 0; l < modes.count(); ++l) {
    const auto lam = modes.lambda[l];
    Eigen::VectorXcd z(2 * n);
    z << modes.psi.col(l), lam * modes.psi.col(l);
    CHECK((A.cast<std::complex<double>>() * z - lam * z).norm() <= 1e-8 * z.norm());
    CHECK(std::abs(modes.omega_nd[l] - modes.omega_n[l] * std::sqrt(1 - modes.xi_n[l] * modes.xi_n[l])) <=
          1e-10 * modes.omega_n[l]);
  }
}

TEST_CASE("non-classical response") {
  auto sys = testutil::chain6().system;
  sys.damping = rayleigh_damping(sys, 0.2, 0.003);
  const auto nc = state_eigen(sys);
  const auto zero = nonclassical_response(nc, 0, zeros(0.02, 64));
  for (double v : zero.samples) CHECK(v == 0.0);

  const auto classical = modal_decompose(sys, std::vector<double>(6, 0.0));
  const auto ratios = rayleigh_ratios(classical.omega, 0.2, 0.003);
  const auto modes = modal_decompose(sys, std::vector<double>(ratios.data(), ratios.data() + 6));
  const auto g = motion(9);
  CHECK(testutil::rel_l2(nonclassical_response(nc, 0, g).samples, duhamel_response(modes, 0, g).samples) <= 1e-6);

  const double h = 1e-4;
  for (Eigen::Index l = 0; l < nc.count(); ++l)
    for (double t : {0.05, 0.7, 2.3}) {
      const double fd = (green_nonclassical(nc, l, t + h) - green_nonclassical(nc, l, t - h)) / (2 * h);
      const double an = green_nonclassical_rate(nc, l, t);
      CHECK(std::abs(fd - an) <= 1e-6 * std::max(std::abs(an), 1e-3));
    }
}

TEST_CASE("physics causality: agreeing prefixes give bit-identical outputs") {
  const auto def = testutil::chain6();
  const auto modes = modal_decompose(def.system, def.modal_xi);
  auto a = motion(21), b = a;
  const std::size_t cut = 230;
  const auto noise = testutil::randn(b.size() - cut, 3);
  for (std::size_t j = cut; j < b.size(); ++j) b.samples[j] += noise[j - cut];
  const auto da = duhamel_response(modes, 0, a), db = duhamel_response(modes, 0, b);
  const auto na = newmark_response(def.system, a).dof(0), nb = newmark_response(def.system, b).dof(0);
  for (std::size_t j = 0; j < cut; ++j) {
    CHECK(da.samples[j] == db.samples[j]);
    CHECK(na.samples[j] == nb.samples[j]);
  }
  CHECK(da.samples[cut + 5] != db.samples[cut + 5]);
}

TEST_CASE("linearity of every solver") {
  auto def = testutil::chain6();
  const auto modes = modal_decompose(def.system, def.modal_xi);
  const auto nc = state_eigen(def.system);
  const auto u = motion(31), v = motion(32);
  const double a = 1.7, b = -0.4;
  Signal w(u.dt, std::vector<double>(u.size()));
  for (std::size_t j = 0; j < u.size(); ++j) w.samples[j] = a * u.samples[j] + b * v.samples[j];
  auto combine = [&](const Signal& x, const Signal& y) {
    std::vector<double> out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = a * x.samples[j] + b * y.samples[j];
    return out;
  };
  auto dh = [&](const Signal& s) { return duhamel_response(modes, 0, s); };
  auto nm = [&](const Signal& s) { return newmark_response(def.system, s).dof(0); };
  auto ncr = [&](const Signal& s) { return nonclassical_response(nc, 0, s); };
  CHECK(testutil::rel_l2(dh(w).samples, combine(dh(u), dh(v))) <= 1e-10);
  CHECK(testutil::rel_l2(nm(w).samples, combine(nm(u), nm(v))) <= 1e-10);
  CHECK(testutil::rel_l2(ncr(w).samples, combine(ncr(u), ncr(v))) <= 1e-10);
}

TEST_CASE("Duhamel vs Newmark converges at second order") {
  const auto def = testutil::chain6();
  const auto modes = modal_decompose(def.system, def.modal_xi);
  const auto fine = motion(41, 0.005);
  auto decimate = [&](std::size_t stride) {
    std::vector<double> s;
    for (std::size_t j = 0; j < fine.size(); j += stride) s.push_back(fine.samples[j]);
    return Signal(fine.dt * double(stride), s);
  };
  double previous = 0.0;
  for (std::size_t stride : {4, 2, 1}) {
    const auto g = decimate(stride);
    const double err =
        testutil::rel_l2(duhamel_response(modes, 0, g).samples, newmark_response(def.system, g).dof(0).samples);
    if (previous > 0.0) CHECK(previous / err >= 3.5);
    previous = err;
  }
}

TEST_CASE("Jacobi and QR eigen-solvers agree with Eigen") {
  const Eigen::MatrixXd r = testutil::randn_matrix(7, 7, 5);
  const Eigen::MatrixXd s = r + r.transpose();
  const auto mine = linalg::jacobi_eigen(s);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(s);
  for (int k = 0; k < 7; ++k) CHECK(mine.values[k] == doctest::Approx(ref.eigenvalues()[k]).epsilon(1e-12));
  CHECK((s * mine.vectors - mine.vectors * mine.values.asDiagonal()).norm() <= 1e-11 * s.norm());
  CHECK_THROWS_CODE(linalg::jacobi_eigen(s, 0), Errc::eigen_failure);

  const auto h = linalg::hessenberg(r);
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j + 1 < i; ++j) CHECK(std::abs(h(i, j)) <= 1e-14 * r.norm());
  auto ev = linalg::eigenvalues(r);
  Eigen::EigenSolver<Eigen::MatrixXd> gen(r);
  for (Eigen::Index k = 0; k < 7; ++k) {
    double best = 1e300;
    for (const auto& e : ev) best = std::min(best, std::abs(e - gen.eigenvalues()[k]));
    CHECK(best <= 1e-10 * r.norm());
    const auto v = linalg::inverse_iteration(r, gen.eigenvalues()[k]);
    CHECK((r.cast<std::complex<double>>() * v - gen.eigenvalues()[k] * v).norm() <= 1e-9 * r.norm());
  }
}

TEST_CASE("system files") {
  const auto def = parse_system(R"(
n: 2
mass: [[1, 0], [0, 1]]
stiffness: [[2, -1], [-1, 1]]
influence: [1, 1]
modal_xi: [0.05, 0.05]
)");
  CHECK(def.system.dofs() == 2);
  CHECK(def.modal_xi.size() == 2);
  CHECK(def.system.damping.allFinite());

  const auto chain = parse_system(R"(
shear_building:
  masses: [1.0e5, 1.0e5, 1.0e5, 1.0e5, 1.0e5, 1.0e5]
  stiffness: [1.0e7, 1.0e7, 1.0e7, 1.0e7, 1.0e7, 1.0e7]
modal_xi: [0.05, 0.05, 0.05, 0.05, 0.05, 0.05]
)");
  CHECK((chain.system.stiffness - testutil::chain6().system.stiffness).norm() == 0.0);

  const auto ray = parse_system("n: 1\nmass: [[2]]\nstiffness: [[8]]\nrayleigh: {a: 0.1, b: 0.01}\n");
  CHECK(ray.system.damping(0, 0) == doctest::Approx(0.1 * 2 + 0.01 * 8));
  CHECK(ray.modal_xi[0] == doctest::Approx(0.1 / 4 + 0.01 * 2 / 2));

  CHECK_THROWS_CODE(parse_system("n: 2\nmass: [[1, 0], [0, 1]]\n"), Errc::config);
  CHECK_THROWS_CODE(parse_system("n: 1\nmass: [[1]]\nstiffness: [[1]]\nmodal_xi: [0.1]\nrayleigh: {a: 1, b: 1}\n"),
                    Errc::config);
  CHECK_THROWS_CODE(parse_system("n: 2\nmass: [[1, 0.5], [0, 1]]\nstiffness: [[2, -1], [-1, 1]]\nmodal_xi: [0, 0]\n"),
                    Errc::invalid_system);
  CHECK_THROWS_CODE(parse_system("n: [1"), Errc::config);
}
