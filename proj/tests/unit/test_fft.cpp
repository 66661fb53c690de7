#include <complex>

#include "common.hpp"
#include "causalop/fft.hpp"

using namespace causalop;
using namespace causalop::fft;
using testutil::pi;

namespace {

std::vector<cplx> naive_dft(const std::vector<cplx>& x) {
  const std::size_t n = x.size();
  std::vector<cplx> out(n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < n; ++j) out[k] += x[j] * std::polar(1.0, -2 * pi * double(j * k % n) / double(n));
  return out;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

TEST_CASE("next_pow2") {
  CHECK(next_pow2(0) == 1);
  CHECK(next_pow2(1) == 1);
  CHECK(next_pow2(5) == 8);
  CHECK(next_pow2(1024) == 1024);
  CHECK(next_pow2(1025) == 2048);
}

TEST_CASE("forward transform matches a naive DFT") {
  // Frozen from numpy.fft.fft(arange(8.0)**2).
  std::vector<cplx> sq(8);
  for (int j = 0; j < 8; ++j) sq[std::size_t(j)] = double(j * j);
  Plan(8).forward(sq);
  CHECK(sq[0].real() == doctest::Approx(140.0));
  CHECK(sq[1].real() == doctest::Approx(-4.6862915).epsilon(1e-8));
  CHECK(sq[1].imag() == doctest::Approx(77.254834).epsilon(1e-8));
  CHECK(sq[2].real() == doctest::Approx(-24.0));
  CHECK(sq[2].imag() == doctest::Approx(32.0));

  for (std::size_t n : {1, 2, 4, 64, 512}) {
    const auto re = testutil::randn(n, n), im = testutil::randn(n, n + 1);
    std::vector<cplx> x(n);
    for (std::size_t j = 0; j < n; ++j) x[j] = {re[j], im[j]};
    auto y = x;
    const Plan plan(n);
    plan.forward(y);
    const auto ref = naive_dft(x);
    for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(y[k] - ref[k]) <= 1e-11 * double(n));
    plan.inverse(y);
    for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(y[k] - x[k]) <= 1e-14 * double(n));
  }
}

TEST_CASE("real spectra, pairs and inverse pairs") {
  const Plan plan(128);
  const auto a = testutil::randn(100, 1), b = testutil::randn(77, 2);
  std::vector<cplx> sa, sb;
  real_spectrum_pair(plan, a, b, sa, sb);
  const auto ra = real_spectrum(plan, a), rb = real_spectrum(plan, b);
  for (std::size_t k = 0; k < 128; ++k) {
    CHECK(std::abs(sa[k] - ra[k]) <= 1e-12);
    CHECK(std::abs(sb[k] - rb[k]) <= 1e-12);
  }
  std::vector<double> oa(100), ob(77);
  std::vector<cplx> scratch;
  real_inverse_pair(plan, sa, sb, oa, ob, scratch);
  CHECK(max_diff(oa, a) <= 1e-13);
  CHECK(max_diff(ob, b) <= 1e-13);
  CHECK(mul(cplx(1, 2), cplx(3, -1)) == cplx(1, 2) * cplx(3, -1));
  CHECK(mul_conj(cplx(1, 2), cplx(3, -1)) == cplx(1, 2) * std::conj(cplx(3, -1)));
}

TEST_CASE("FFT correlation and convolution equal direct sums") {
  for (std::size_t m : {1, 3, 64, 300}) {
    const auto w = testutil::randn(m, 10 + m), u = testutil::randn(m, 20 + m);
    CHECK(max_diff(correlate(w, u), correlate_direct(w, u)) <= 1e-12 * double(m));
    CHECK(max_diff(convolve(w, u, m), convolve_direct(w, u, m)) <= 1e-12 * double(m));
  }
  const std::vector<double> w{1, 2, 3}, u{4, 5, 6};
  // c[L] = sum_k w[L + k] u[k]
  CHECK(correlate_direct(w, u) == std::vector<double>{1 * 4 + 2 * 5 + 3 * 6, 2 * 4 + 3 * 5, 3 * 4});
  CHECK(convolve_direct(w, u, 3) == std::vector<double>{4, 5 + 8, 6 + 10 + 12});
}

TEST_CASE("amplitude spectrum of a sinusoid") {
  const std::size_t m = 1024;
  const double dt = 0.01;
  const std::size_t bin = 64;  // exactly on the grid: f = 64 / (1024 dt)
  std::vector<double> x(m);
  for (std::size_t j = 0; j < m; ++j) x[j] = 0.7 * std::cos(2 * pi * double(bin * j) / double(m)) + 0.2;
  const auto amp = amplitude_spectrum(x);
  CHECK(amp.size() == m / 2 + 1);
  CHECK(amp[bin] == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(amp[0] == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(amp[bin + 3] <= 1e-12);
}
