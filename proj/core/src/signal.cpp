#include "causalop/signal.hpp"

#include <algorithm>
#include <cmath>

#include "causalop/error.hpp"

namespace causalop {

void Signal::validate() const {
  require(dt > 0.0 && std::isfinite(dt), Errc::invalid_argument, "signal dt must be positive");
  require(!samples.empty(), Errc::invalid_argument, "signal has no samples");
  for (double v : samples) require(std::isfinite(v), Errc::non_finite, "signal sample");
}

Signal zeros(double dt, std::size_t m, std::string units) {
  return Signal(dt, std::vector<double>(m, 0.0), std::move(units));
}

double peak_abs(std::span<const double> values) {
  double peak = 0.0;
  for (double v : values) peak = std::max(peak, std::abs(v));
  return peak;
}

double sum_squares(std::span<const double> values) {
  double s = 0.0;
  for (double v : values) s += v * v;
  return s;
}

double relative_l2(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), Errc::length_mismatch, "relative_l2 operands differ in length");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    num += d * d;
    den += b[i] * b[i];
  }
  require(den > 0.0, Errc::invalid_argument, "relative_l2 reference has zero norm");
  return std::sqrt(num / den);
}

}  // namespace causalop
