#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace causalop {

/// Uniformly sampled scalar time series; sample j sits at t_j = j * dt.
struct Signal {
  double dt = 0.0;
  std::vector<double> samples;
  std::string units = "m/s^2";

  Signal() = default;
  Signal(double step, std::vector<double> values, std::string unit = "m/s^2")
      : dt(step), samples(std::move(values)), units(std::move(unit)) {}

  std::size_t size() const noexcept { return samples.size(); }
  /// Span covered by the samples, dt * (m - 1).
  double duration() const noexcept { return samples.empty() ? 0.0 : dt * double(samples.size() - 1); }
  double time(std::size_t j) const noexcept { return dt * double(j); }
  std::span<const double> view() const noexcept { return samples; }

  /// Throws unless dt > 0, the signal is nonempty and every sample is finite.
  void validate() const;
};

/// Zero signal with m samples.
Signal zeros(double dt, std::size_t m, std::string units = "m/s^2");

double peak_abs(std::span<const double> values);
double sum_squares(std::span<const double> values);

/// sqrt(sum (a-b)^2 / sum b^2); b must be nonzero.
double relative_l2(std::span<const double> a, std::span<const double> b);

}  // namespace causalop
