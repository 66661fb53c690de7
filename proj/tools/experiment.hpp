#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "causalop/harness.hpp"
#include "causalop/signalgen.hpp"
#include "causalop/system_file.hpp"

/// Experiment configs: a YAML file naming a system, a synthetic-motion
/// corpus, an architecture and a training recipe. Relative paths resolve
/// against the config file's directory.
namespace causalop::experiment {

namespace fs = std::filesystem;

struct SignalBlock {
  std::size_t count = 44;
  double duration = 10.0;  // s; duration / dt is the sample count m
  double dt = 0.02;
  signalgen::Band band{0.1, 24.9};
  double pga_min = 1.0;  // m/s^2, drawn uniformly
  double pga_max = 4.0;
  std::uint64_t seed = 2024;
  std::string input_units = "g";  // "g" or "m/s^2"
};

struct ExperimentConfig {
  std::string name = "run";
  fs::path system;
  SignalBlock signals;
  signalgen::Solver solver = signalgen::Solver::duhamel;
  long dof = 0;
  std::string output_units = "cm";  // "m", "cm" or "mm"
  std::size_t train_count = 10;     // first rows train, the rest test
  harness::TrainConfig training;
  fs::path out = "runs/run";

  std::size_t m() const;
  std::size_t test_count() const { return signals.count - train_count; }
  void validate() const;
};

ExperimentConfig parse_experiment(const std::string& yaml, const fs::path& base_dir);
ExperimentConfig load_experiment(const fs::path& file);

/// Fully expanded config, defaults filled in, parseable by parse_experiment.
std::string resolved_yaml(const ExperimentConfig& config);

double input_scale(const std::string& units);
double output_scale(const std::string& units);

struct Split {
  signalgen::ResponseDataset train, test;
};

/// Synthesises the corpus and solves every record.
Split generate(const ExperimentConfig& config, int threads = 1);

/// Writes `<dir>/train`, `<dir>/test`, `stats.csv` (training inputs) and
/// `stats_test.csv`.
void save_split(const Split& split, const fs::path& dir);
Split load_split(const fs::path& dir);

struct Summary {
  std::string name, arch, branch, trunk, activation, loss;
  std::size_t train_samples = 0, test_samples = 0, parameters = 0;
  double train_rel_l2 = 0, test_rel_l2 = 0, best_test_rel_l2 = 0;
  long best_epoch = -1;
  double seconds = 0;
};

Summary summarize(const ExperimentConfig& config, const harness::TrainResult& result);
std::string summary_header();
std::string summary_row(const Summary& s);
void write_summaries(const std::vector<Summary>& rows, const fs::path& file);
std::vector<Summary> read_summaries(const fs::path& file);

}  // namespace causalop::experiment
