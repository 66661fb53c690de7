#pragma once

#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "causalop/error.hpp"
#include "causalop/lindyn.hpp"
#include "causalop/signal.hpp"
#include "causalop/system_file.hpp"

namespace testutil {

inline constexpr double pi = 3.14159265358979323846;

inline std::vector<double> randn(std::size_t n, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, scale);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

inline Eigen::MatrixXd randn_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed, double scale = 1.0) {
  const auto v = randn(std::size_t(rows * cols), seed, scale);
  return Eigen::Map<const Eigen::MatrixXd>(v.data(), rows, cols);
}

inline double rel_l2(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num / den);
}

/// The acceptance chain: six floors of 1e5 kg on 1e7 N/m storeys, 5% modal damping.
inline causalop::lindyn::SystemDefinition chain6() {
  const std::vector<double> mass(6, 1e5), k(6, 1e7);
  return causalop::lindyn::with_modal_damping(causalop::lindyn::shear_building(mass, k),
                                              std::vector<double>(6, 0.05));
}

inline causalop::lindyn::MdofSystem sdof(double m, double k, double c = 0.0) {
  causalop::lindyn::MdofSystem s;
  s.mass = Eigen::MatrixXd::Constant(1, 1, m);
  s.stiffness = Eigen::MatrixXd::Constant(1, 1, k);
  s.damping = Eigen::MatrixXd::Constant(1, 1, c);
  s.influence = Eigen::VectorXd::Ones(1);
  return s;
}

#define CHECK_THROWS_CODE(expr, errc)                        \
  do {                                                       \
    try {                                                    \
      (void)(expr);                                          \
      FAIL("expected causalop::Error");                      \
    } catch (const causalop::Error& e) {                     \
      CHECK(e.code() == (errc));                             \
    }                                                        \
  } while (0)

}  // namespace testutil
