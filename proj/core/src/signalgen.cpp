#include "causalop/signalgen.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <random>

#include "causalop/error.hpp"
#include "causalop/parallel.hpp"

namespace causalop::signalgen {

using cplx = std::complex<double>;

std::vector<Biquad> butterworth_bandpass_design(double f_low, double f_high, int order, double dt) {
  require(dt > 0.0, Errc::invalid_argument, "dt must be positive");
  require(order >= 1, Errc::invalid_argument, "filter order must be positive");
  const double nyquist = 0.5 / dt;
  require(f_low > 0.0 && f_low < f_high, Errc::invalid_argument, "band edges must satisfy 0 < low < high");
  require(f_high < nyquist, Errc::invalid_argument, "band edge at or above Nyquist");

  const double fs2 = 2.0 / dt;
  const double w_low = fs2 * std::tan(std::numbers::pi * f_low * dt);
  const double w_high = fs2 * std::tan(std::numbers::pi * f_high * dt);
  const double bw = w_high - w_low;
  const double w0 = std::sqrt(w_low * w_high);

  // Band-pass poles in the upper half plane (plus real ones), then bilinear.
  std::vector<cplx> upper;
  std::vector<double> real_poles;
  for (int k = 1; k <= order; ++k) {
    const cplx proto = std::polar(1.0, std::numbers::pi * double(2 * k + order - 1) / double(2 * order));
    const cplx half = proto * bw / 2.0;
    const cplx root = std::sqrt(half * half - w0 * w0);
    for (const cplx s : {half + root, half - root}) {
      const cplx z = (fs2 + s) / (fs2 - s);
      if (z.imag() > 1e-14) {
        upper.push_back(z);
      } else if (std::abs(z.imag()) <= 1e-14) {
        real_poles.push_back(z.real());
      }
    }
  }
  std::sort(real_poles.begin(), real_poles.end());
  require(upper.size() * 2 + real_poles.size() == std::size_t(2 * order), Errc::invalid_argument,
          "filter design produced an unexpected pole set");

  std::vector<Biquad> sections;
  for (const cplx& z : upper) sections.push_back({1.0, 0.0, -1.0, -2.0 * z.real(), std::norm(z)});
  for (std::size_t i = 0; i + 1 < real_poles.size(); i += 2)
    sections.push_back({1.0, 0.0, -1.0, -(real_poles[i] + real_poles[i + 1]), real_poles[i] * real_poles[i + 1]});

  // Normalise to unit magnitude at the digital image of the centre frequency.
  const double wc = 2.0 * std::atan(w0 / fs2);
  const cplx e1 = std::polar(1.0, -wc);
  const cplx e2 = e1 * e1;
  cplx response = 1.0;
  for (const auto& s : sections) response *= (s.b0 + s.b1 * e1 + s.b2 * e2) / (1.0 + s.a1 * e1 + s.a2 * e2);
  const double per_section = std::pow(1.0 / std::abs(response), 1.0 / double(sections.size()));
  for (auto& s : sections) {
    s.b0 *= per_section;
    s.b1 *= per_section;
    s.b2 *= per_section;
  }
  return sections;
}

std::vector<double> sosfilt(std::span<const Biquad> sections, std::span<const double> x) {
  std::vector<double> y(x.begin(), x.end());
  if (y.empty()) return y;
  double steady_in = x[0];
  for (const auto& s : sections) {
    const double dc = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
    const double steady_out = dc * steady_in;
    double z2 = s.b2 * steady_in - s.a2 * steady_out;
    double z1 = s.b1 * steady_in - s.a1 * steady_out + z2;
    for (double& v : y) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
    steady_in = steady_out;
  }
  return y;
}

Signal butterworth_bandpass(const Signal& signal, double f_low, double f_high, int order) {
  signal.validate();
  const auto sections = butterworth_bandpass_design(f_low, f_high, order, signal.dt);
  const std::size_t m = signal.size();
  if (m < 2) return signal;

  // Odd extension at both ends, then forward and backward passes.
  const std::size_t pad = std::min<std::size_t>(3 * (2 * sections.size() + 1), m - 1);
  const auto& x = signal.samples;
  std::vector<double> ext;
  ext.reserve(m + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x.front() - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x.back() - x[m - 1 - i]);

  auto forward = sosfilt(sections, ext);
  std::reverse(forward.begin(), forward.end());
  auto backward = sosfilt(sections, forward);
  std::reverse(backward.begin(), backward.end());

  Signal out = signal;
  std::copy(backward.begin() + std::ptrdiff_t(pad), backward.begin() + std::ptrdiff_t(pad + m), out.samples.begin());
  return out;
}

Signal resample(const Signal& signal, double new_dt) {
  signal.validate();
  require(new_dt > 0.0, Errc::invalid_argument, "new_dt must be positive");
  const std::size_t m = signal.size();
  const double ratio = new_dt / signal.dt;
  const double span = double(m - 1) / ratio;  // duration measured in new steps
  const auto count = static_cast<std::size_t>(std::floor(span + 1e-9)) + 1;

  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double pos = double(k) * ratio;
    auto i = static_cast<std::size_t>(std::floor(pos));
    double frac = pos - double(i);
    if (i >= m - 1) {
      i = m - 1;
      frac = 0.0;
    }
    out[k] = frac == 0.0 ? signal.samples[i] : (1.0 - frac) * signal.samples[i] + frac * signal.samples[i + 1];
  }
  return Signal(new_dt, std::move(out), signal.units);
}

Signal pga_rescale(const Signal& signal, double target_pga) {
  signal.validate();
  require(target_pga > 0.0, Errc::invalid_argument, "target PGA must be positive");
  const double peak = peak_abs(signal.samples);
  require(peak > 0.0, Errc::invalid_argument, "cannot rescale an all-zero signal");
  const double factor = target_pga / peak;
  Signal out = signal;
  for (double& v : out.samples) v *= factor;
  return out;
}

TrimResult trim(const Signal& signal, double start, double end) {
  signal.validate();
  require(start >= 0.0 && end > start, Errc::invalid_argument, "trim window must satisfy 0 <= start < end");
  const auto first = static_cast<std::size_t>(std::ceil(start / signal.dt - 1e-9));
  auto last = static_cast<std::size_t>(std::floor(end / signal.dt + 1e-9));
  last = std::min(last, signal.size() - 1);
  require(first <= last, Errc::invalid_argument, "trim window holds no samples");

  const double total = sum_squares(signal.samples);
  std::vector<double> kept(signal.samples.begin() + std::ptrdiff_t(first),
                           signal.samples.begin() + std::ptrdiff_t(last + 1));
  TrimResult out;
  out.retained_energy = total > 0.0 ? sum_squares(kept) / total : 1.0;
  out.signal = Signal(signal.dt, std::move(kept), signal.units);
  return out;
}

Signal synth_ground_motion(std::uint64_t seed, double duration, double dt, Band band, double pga) {
  require(dt > 0.0 && duration > 0.0, Errc::invalid_argument, "duration and dt must be positive");
  const double steps = duration / dt;
  const double rounded = std::round(steps);
  require(std::abs(steps - rounded) <= 1e-9 * std::max(1.0, steps) && rounded >= 2.0, Errc::invalid_argument,
          "duration / dt must be an integer sample count >= 2");
  const auto m = static_cast<std::size_t>(rounded);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> noise(m);
  for (double& v : noise) v = normal(rng);

  Signal s = butterworth_bandpass(Signal(dt, std::move(noise)), band.low, band.high, 4);
  for (std::size_t j = 0; j < m; ++j) {
    const double u = dt * double(j) / duration;
    double env = 1.0;
    if (u < 0.1) {
      env = u / 0.1;
    } else if (u > 0.6) {
      env = std::max(0.0, (1.0 - u) / 0.4);
    }
    s.samples[j] *= env;
  }
  return pga_rescale(s, pga);
}

std::string to_string(Solver solver) {
  switch (solver) {
    case Solver::duhamel: return "duhamel";
    case Solver::newmark: return "newmark";
    case Solver::nonclassical: return "nonclassical";
  }
  return "duhamel";
}

Solver parse_solver(const std::string& name) {
  if (name == "duhamel") return Solver::duhamel;
  if (name == "newmark") return Solver::newmark;
  if (name == "nonclassical") return Solver::nonclassical;
  fail(Errc::config, "unknown solver '" + name + "'");
}

void ResponseDataset::validate() const {
  require(inputs.size() == outputs.size(), Errc::length_mismatch, "input and output counts differ");
  for (std::size_t l = 0; l < inputs.size(); ++l) {
    for (const Signal* s : {&inputs[l], &outputs[l]}) {
      require(s->size() == m, Errc::length_mismatch, "record length differs from m");
      require(s->dt == dt, Errc::invalid_argument, "record dt differs from dataset dt");
      for (double v : s->samples) require(std::isfinite(v), Errc::non_finite, "dataset sample");
    }
    require(outputs[l].samples.empty() || outputs[l].samples[0] == 0.0, Errc::invalid_argument,
            "response does not start at rest");
  }
}

ResponseDataset ResponseDataset::subset(std::span<const std::size_t> rows) const {
  ResponseDataset out;
  out.dt = dt;
  out.m = m;
  out.meta = meta;
  for (std::size_t r : rows) {
    require(r < size(), Errc::invalid_argument, "subset row out of range");
    out.inputs.push_back(inputs[r]);
    out.outputs.push_back(outputs[r]);
  }
  return out;
}

Signal solve_record(const lindyn::SystemDefinition& definition, const Signal& ground, const BuildOptions& options) {
  Signal response;
  switch (options.solver) {
    case Solver::duhamel: {
      const auto modes = lindyn::modal_decompose(definition.system, definition.modal_xi);
      response = lindyn::duhamel_response(modes, options.dof, ground);
      break;
    }
    case Solver::newmark:
      response = lindyn::newmark_response(definition.system, ground).dof(options.dof);
      break;
    case Solver::nonclassical: {
      const auto modes = lindyn::state_eigen(definition.system);
      response = lindyn::nonclassical_response(modes, options.dof, ground);
      break;
    }
  }
  if (options.output_scale != 1.0)
    for (double& v : response.samples) v *= options.output_scale;
  response.units = options.output_units;
  return response;
}

ResponseDataset build_dataset(const lindyn::SystemDefinition& definition, std::vector<Signal> signals,
                              const BuildOptions& options) {
  ResponseDataset ds;
  ds.meta.solver = to_string(options.solver);
  ds.meta.output_units = options.output_units;
  if (signals.empty()) return ds;

  ds.dt = signals.front().dt;
  ds.m = signals.front().size();
  ds.meta.input_units = signals.front().units;
  for (const auto& s : signals) {
    s.validate();
    require(s.dt == ds.dt, Errc::invalid_argument, "mixed dt in signal list");
    require(s.size() == ds.m, Errc::length_mismatch, "mixed lengths in signal list");
  }

  // Decompose once; solve_record would redo it for every record.
  std::optional<lindyn::ClassicalModes> classical;
  std::optional<lindyn::NonClassicalModes> state;
  if (options.solver == Solver::duhamel) classical = lindyn::modal_decompose(definition.system, definition.modal_xi);
  if (options.solver == Solver::nonclassical) state = lindyn::state_eigen(definition.system);

  ds.outputs.resize(signals.size());
  parallel_for(signals.size(), options.threads, [&](std::size_t l) {
    Signal r;
    switch (options.solver) {
      case Solver::duhamel: r = lindyn::duhamel_response(*classical, options.dof, signals[l]); break;
      case Solver::newmark: r = lindyn::newmark_response(definition.system, signals[l]).dof(options.dof); break;
      case Solver::nonclassical: r = lindyn::nonclassical_response(*state, options.dof, signals[l]); break;
    }
    if (options.output_scale != 1.0)
      for (double& v : r.samples) v *= options.output_scale;
    r.units = options.output_units;
    ds.outputs[l] = std::move(r);
  });
  ds.inputs = std::move(signals);
  for (auto& s : ds.inputs) {
    if (options.input_scale != 1.0)
      for (double& v : s.samples) v *= options.input_scale;
    if (!options.input_units.empty()) s.units = options.input_units;
  }
  if (!options.input_units.empty()) ds.meta.input_units = options.input_units;
  return ds;
}

namespace {

Summary summarize(const std::vector<double>& values) {
  Summary s;
  s.min = *std::min_element(values.begin(), values.end());
  s.max = *std::max_element(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / double(values.size());
  double var = 0.0;
  for (double v : values) var += (v - s.mean) * (v - s.mean);
  s.sd = std::sqrt(var / double(values.size()));
  // Keep min <= mean <= max under rounding.
  s.mean = std::clamp(s.mean, s.min, s.max);
  return s;
}

}  // namespace

CorpusStats compute_stats(std::span<const Signal> signals) {
  require(!signals.empty(), Errc::invalid_argument, "statistics need at least one signal");
  std::vector<double> pga, hi, lo, energy;
  for (const auto& s : signals) {
    require(!s.samples.empty(), Errc::invalid_argument, "empty signal in corpus");
    pga.push_back(peak_abs(s.samples));
    hi.push_back(*std::max_element(s.samples.begin(), s.samples.end()));
    lo.push_back(*std::min_element(s.samples.begin(), s.samples.end()));
    energy.push_back(sum_squares(s.samples));
  }
  CorpusStats out;
  out.count = signals.size();
  out.pga = summarize(pga);
  out.max_value = summarize(hi);
  out.min_value = summarize(lo);
  out.energy = summarize(energy);
  return out;
}

}  // namespace causalop::signalgen
