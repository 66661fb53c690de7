#include "causalop/fft.hpp"

#include <bit>
#include <cmath>
#include <numbers>

#include "causalop/error.hpp"

namespace causalop::fft {

std::size_t next_pow2(std::size_t n) noexcept { return n <= 1 ? 1 : std::bit_ceil(n); }

Plan::Plan(std::size_t n) : n_(n) {
  require(n >= 1 && std::has_single_bit(n), Errc::invalid_argument, "FFT length must be a power of two");
  const int bits = std::countr_zero(n);
  bitrev_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = 0;
    for (int b = 0; b < bits; ++b)
      if (i & (std::size_t(1) << b)) r |= std::size_t(1) << (bits - 1 - b);
    bitrev_[i] = r;
  }
  tw_re_.assign(n > 1 ? n - 1 : 0, 0.0);
  tw_im_.assign(tw_re_.size(), 0.0);
  for (std::size_t h = 1; h < n; h <<= 1)
    for (std::size_t k = 0; k < h; ++k) {
      const double angle = -std::numbers::pi * double(k) / double(h);
      tw_re_[h - 1 + k] = std::cos(angle);
      tw_im_[h - 1 + k] = std::sin(angle);
    }
}

void Plan::transform(std::span<cplx> data, bool inverse) const {
  require(data.size() == n_, Errc::dimension_mismatch, "FFT buffer length differs from plan");
  // Split storage lets the butterfly loops vectorise.
  thread_local std::vector<double> re, im;
  re.resize(n_);
  im.resize(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    re[bitrev_[i]] = data[i].real();
    im[bitrev_[i]] = data[i].imag();
  }
  double* __restrict xr = re.data();
  double* __restrict xi = im.data();
  const double sign = inverse ? -1.0 : 1.0;

  if (n_ >= 2) {
    for (std::size_t j = 0; j < n_; j += 2) {
      const double ar = xr[j], ai = xi[j], br = xr[j + 1], bi = xi[j + 1];
      xr[j] = ar + br;
      xi[j] = ai + bi;
      xr[j + 1] = ar - br;
      xi[j + 1] = ai - bi;
    }
  }
  for (std::size_t h = 2; h < n_; h <<= 1) {
    const double* __restrict wr = tw_re_.data() + (h - 1);
    const double* __restrict wi = tw_im_.data() + (h - 1);
    for (std::size_t start = 0; start < n_; start += 2 * h) {
      double* __restrict lr = xr + start;
      double* __restrict li = xi + start;
      double* __restrict hr = xr + start + h;
      double* __restrict hi = xi + start + h;
      for (std::size_t k = 0; k < h; ++k) {
        const double c = wr[k], d = sign * wi[k];
        const double tr = c * hr[k] - d * hi[k];
        const double ti = c * hi[k] + d * hr[k];
        hr[k] = lr[k] - tr;
        hi[k] = li[k] - ti;
        lr[k] += tr;
        li[k] += ti;
      }
    }
  }
  const double scale = inverse ? 1.0 / double(n_) : 1.0;
  for (std::size_t i = 0; i < n_; ++i) data[i] = cplx(scale * xr[i], scale * xi[i]);
}

void Plan::forward(std::span<cplx> data) const { transform(data, false); }
void Plan::inverse(std::span<cplx> data) const { transform(data, true); }

std::vector<cplx> real_spectrum(const Plan& plan, std::span<const double> x) {
  require(x.size() <= plan.size(), Errc::dimension_mismatch, "signal longer than FFT length");
  std::vector<cplx> buf(plan.size());
  for (std::size_t j = 0; j < x.size(); ++j) buf[j] = x[j];
  plan.forward(buf);
  return buf;
}

void real_spectrum_pair(const Plan& plan, std::span<const double> a, std::span<const double> b,
                        std::vector<cplx>& spec_a, std::vector<cplx>& spec_b) {
  const std::size_t n = plan.size();
  require(a.size() <= n && b.size() <= n, Errc::dimension_mismatch, "signal longer than FFT length");
  std::vector<cplx> buf(n);
  for (std::size_t j = 0; j < a.size(); ++j) buf[j].real(a[j]);
  for (std::size_t j = 0; j < b.size(); ++j) buf[j].imag(b[j]);
  plan.forward(buf);
  spec_a.resize(n);
  spec_b.resize(n);
  // Z = A + iB with A, B Hermitian: A_k = (Z_k + conj Z_{n-k}) / 2, B_k = (Z_k - conj Z_{n-k}) / 2i.
  for (std::size_t k = 0; k < n; ++k) {
    const cplx z = buf[k];
    const cplx zc = std::conj(buf[(n - k) & (n - 1)]);
    spec_a[k] = 0.5 * (z + zc);
    const cplx diff = z - zc;
    spec_b[k] = cplx(0.5 * diff.imag(), -0.5 * diff.real());
  }
}

void real_inverse_pair(const Plan& plan, std::span<const cplx> spec_a, std::span<const cplx> spec_b,
                       std::span<double> a, std::span<double> b, std::vector<cplx>& scratch) {
  const std::size_t n = plan.size();
  require(spec_a.size() == n && spec_b.size() == n, Errc::dimension_mismatch, "spectrum length differs from plan");
  require(a.size() <= n && b.size() <= n, Errc::dimension_mismatch, "output longer than FFT length");
  scratch.resize(n);
  for (std::size_t k = 0; k < n; ++k) scratch[k] = spec_a[k] + cplx(-spec_b[k].imag(), spec_b[k].real());
  plan.inverse(scratch);
  for (std::size_t j = 0; j < a.size(); ++j) a[j] = scratch[j].real();
  for (std::size_t j = 0; j < b.size(); ++j) b[j] = scratch[j].imag();
}

std::vector<double> correlate_direct(std::span<const double> w, std::span<const double> u) {
  std::vector<double> c(w.size(), 0.0);
  for (std::size_t lag = 0; lag < w.size(); ++lag) {
    double acc = 0.0;
    for (std::size_t k = 0; k < u.size() && lag + k < w.size(); ++k) acc += w[lag + k] * u[k];
    c[lag] = acc;
  }
  return c;
}

std::vector<double> correlate(std::span<const double> w, std::span<const double> u) {
  if (w.empty()) return {};
  const Plan plan(next_pow2(w.size() + u.size()));
  std::vector<cplx> sw, su;
  real_spectrum_pair(plan, w, u, sw, su);
  for (std::size_t k = 0; k < sw.size(); ++k) sw[k] = mul_conj(sw[k], su[k]);
  plan.inverse(sw);
  std::vector<double> c(w.size());
  for (std::size_t j = 0; j < c.size(); ++j) c[j] = sw[j].real();
  return c;
}

std::vector<double> convolve_direct(std::span<const double> a, std::span<const double> b, std::size_t count) {
  std::vector<double> y(count, 0.0);
  for (std::size_t q = 0; q < count; ++q) {
    double acc = 0.0;
    for (std::size_t l = 0; l <= q && l < a.size(); ++l)
      if (q - l < b.size()) acc += a[l] * b[q - l];
    y[q] = acc;
  }
  return y;
}

std::vector<double> convolve(std::span<const double> a, std::span<const double> b, std::size_t count) {
  if (count == 0) return {};
  const Plan plan(next_pow2(a.size() + b.size()));
  std::vector<cplx> sa, sb;
  real_spectrum_pair(plan, a, b, sa, sb);
  for (std::size_t k = 0; k < sa.size(); ++k) sa[k] = mul(sa[k], sb[k]);
  plan.inverse(sa);
  std::vector<double> y(count, 0.0);
  for (std::size_t q = 0; q < count && q < sa.size(); ++q) y[q] = sa[q].real();
  return y;
}

std::vector<double> amplitude_spectrum(std::span<const double> x) {
  const std::size_t m = x.size();
  if (m == 0) return {};
  const Plan plan(next_pow2(m));
  const auto spec = real_spectrum(plan, x);
  const std::size_t bins = plan.size() / 2 + 1;
  std::vector<double> amp(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    const double scale = (k == 0 || k == plan.size() / 2) ? 1.0 : 2.0;
    amp[k] = scale * std::abs(spec[k]) / double(m);
  }
  return amp;
}

}  // namespace causalop::fft
