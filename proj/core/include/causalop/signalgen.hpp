#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "causalop/signal.hpp"
#include "causalop/system_file.hpp"

/// Ground-motion synthesis, record preprocessing (band-pass, resampling,
/// PGA scaling, trimming), paired response datasets and corpus statistics.
namespace causalop::signalgen {

/// Direct-form-II-transposed second-order section, a0 == 1.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

/// Digital Butterworth band-pass of the given prototype order (2 * order
/// poles): analog prototype, low-pass to band-pass transform, bilinear map
/// with pre-warped edges. Unit gain at the band centre.
std::vector<Biquad> butterworth_bandpass_design(double f_low, double f_high, int order, double dt);

/// Runs a cascade once over `x` starting from steady state for x[0].
std::vector<double> sosfilt(std::span<const Biquad> sections, std::span<const double> x);

/// Zero-phase forward-backward band-pass; output length equals input length.
/// Requires 0 < f_low < f_high < 1 / (2 dt).
Signal butterworth_bandpass(const Signal& signal, double f_low, double f_high, int order = 4);

/// Linear interpolation onto t_k = k * new_dt spanning the same duration.
Signal resample(const Signal& signal, double new_dt);

/// Scales so that max |sample| equals target_pga. Rejects all-zero input.
Signal pga_rescale(const Signal& signal, double target_pga);

struct TrimResult {
  Signal signal;
  double retained_energy = 1.0;  // sum of squares kept / total
};

/// Keeps samples with start <= t_j <= end and re-bases time at zero.
TrimResult trim(const Signal& signal, double start, double end);

struct Band {
  double low = 0.1;
  double high = 24.9;
};

/// Seeded white Gaussian noise, band-passed (order 4), shaped by a
/// 10% / 50% / 40% trapezoidal envelope and scaled to `pga`.
/// duration / dt must be an integer m, the sample count.
Signal synth_ground_motion(std::uint64_t seed, double duration, double dt, Band band, double pga);

enum class Solver { duhamel, newmark, nonclassical };

std::string to_string(Solver solver);
Solver parse_solver(const std::string& name);

struct DatasetMeta {
  std::string system_id = "unnamed";
  std::string solver = "duhamel";
  std::uint64_t seed = 0;
  std::string input_units = "m/s^2";
  std::string output_units = "m";
};

/// Ground motions paired with the response of one DOF.
struct ResponseDataset {
  std::vector<Signal> inputs;
  std::vector<Signal> outputs;
  double dt = 0.0;
  std::size_t m = 0;
  DatasetMeta meta;

  std::size_t size() const noexcept { return inputs.size(); }
  /// Equal counts, m samples and identical dt everywhere, outputs[l][0] == 0.
  void validate() const;
  /// Sub-dataset with the given rows, in order.
  ResponseDataset subset(std::span<const std::size_t> rows) const;
};

struct BuildOptions {
  Solver solver = Solver::duhamel;
  Eigen::Index dof = 0;          // roof is DOF 0 by convention
  double output_scale = 1.0;     // e.g. 100 for centimetres
  std::string output_units = "m";
  double input_scale = 1.0;      // applied to the stored inputs after solving, e.g. 1/9.80665 for g
  std::string input_units;       // empty keeps the signals' own units
  int threads = 1;
};

/// outputs[l] = solver(inputs[l]) at the chosen DOF. Signals are ground
/// accelerations in m/s^2 and must share dt and length.
ResponseDataset build_dataset(const lindyn::SystemDefinition& definition, std::vector<Signal> signals,
                              const BuildOptions& options);

/// Re-solves a single record exactly as build_dataset does.
Signal solve_record(const lindyn::SystemDefinition& definition, const Signal& ground,
                    const BuildOptions& options);

struct Summary {
  double min = 0.0, max = 0.0, mean = 0.0, sd = 0.0;  // sd: population convention
};

struct CorpusStats {
  std::size_t count = 0;
  Summary pga;        // max |u|
  Summary max_value;  // max u
  Summary min_value;  // min u
  Summary energy;     // sum u^2, no dt factor
};

CorpusStats compute_stats(std::span<const Signal> signals);

/// Directory layout: `meta` (key=value), `inputs.csv`, `outputs.csv`; each
/// CSV row is `id,v0,...,v{m-1}` with shortest round-trip decimal values.
void save_dataset(const ResponseDataset& dataset, const std::filesystem::path& dir);
ResponseDataset load_dataset(const std::filesystem::path& dir);

/// `quantity,min,max,mean,sd` rows for pga, max, min, energy.
void write_stats_csv(const CorpusStats& stats, const std::filesystem::path& file);

}  // namespace causalop::signalgen
