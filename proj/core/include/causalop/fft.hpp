#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

/// Iterative radix-2 FFT plus the correlation / convolution kernels the
/// causal branch uses for its first layer.
namespace causalop::fft {

using cplx = std::complex<double>;

/// Smallest power of two >= n (1 for n == 0).
std::size_t next_pow2(std::size_t n) noexcept;

/// Precomputed twiddles and bit reversal for one power-of-two length.
class Plan {
 public:
  explicit Plan(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  /// In place, X[k] = sum_j x[j] e^{-2 pi i jk/n}.
  void forward(std::span<cplx> data) const;
  /// In place inverse including the 1/n factor.
  void inverse(std::span<cplx> data) const;

 private:
  void transform(std::span<cplx> data, bool inverse) const;

  std::size_t n_;
  std::vector<std::size_t> bitrev_;
  // Stage with half-length h keeps e^{-i pi k / h}, k < h, at offset h - 1.
  std::vector<double> tw_re_, tw_im_;
};

/// a * b and a * conj(b) without the NaN-recovery path of operator*.
inline cplx mul(cplx a, cplx b) noexcept {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}
inline cplx mul_conj(cplx a, cplx b) noexcept {
  return {a.real() * b.real() + a.imag() * b.imag(), a.imag() * b.real() - a.real() * b.imag()};
}

/// Spectrum of a real sequence zero-padded to plan.size().
std::vector<cplx> real_spectrum(const Plan& plan, std::span<const double> x);

/// Spectra of two real sequences from one complex transform.
void real_spectrum_pair(const Plan& plan, std::span<const double> a, std::span<const double> b,
                        std::vector<cplx>& spec_a, std::vector<cplx>& spec_b);

/// Inverse transforms of two Hermitian spectra whose signals are real, in
/// one complex transform. Writes the first `count` samples of each.
void real_inverse_pair(const Plan& plan, std::span<const cplx> spec_a, std::span<const cplx> spec_b,
                       std::span<double> a, std::span<double> b, std::vector<cplx>& scratch);

/// c[L] = sum_k w[L + k] u[k] for L < w.size(), by direct summation.
std::vector<double> correlate_direct(std::span<const double> w, std::span<const double> u);

/// Same as correlate_direct through the FFT.
std::vector<double> correlate(std::span<const double> w, std::span<const double> u);

/// y[q] = sum_{L <= q} a[L] b[q - L] for q < count, by direct summation.
std::vector<double> convolve_direct(std::span<const double> a, std::span<const double> b, std::size_t count);

/// Same as convolve_direct through the FFT.
std::vector<double> convolve(std::span<const double> a, std::span<const double> b, std::size_t count);

/// Single-sided amplitude spectrum 2|X_k|/m (k = 0 and Nyquist not doubled)
/// for bins k = 0..N/2, N = next_pow2(m). Bin k sits at k / (N dt) Hz.
std::vector<double> amplitude_spectrum(std::span<const double> x);

}  // namespace causalop::fft
