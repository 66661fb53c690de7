#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "causalop/model_io.hpp"
#include "causalop/neural.hpp"
#include "causalop/operators.hpp"
#include "causalop/signalgen.hpp"

/// Losses, metrics, normalisation, the training loop and evaluation
/// reports. Trajectory batches are n x m matrices, one sample per row.
namespace causalop::harness {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// (1/n) sum_l (1/m) sum_i (pred - truth)^2.
double loss_mse(const MatrixXd& pred, const MatrixXd& truth);

/// (1/n) sum_l w_l MSE_l with w_l = 1 / max|truth_l|. Rows flagged in
/// `unit_weight` (the zero-response initial-condition pair) get w = 1; any
/// other all-zero truth row is an error.
double loss_weighted(const MatrixXd& pred, const MatrixXd& truth, const std::vector<bool>& unit_weight = {});

/// Per-row weights used by loss_weighted.
VectorXd loss_weights(const MatrixXd& truth, const std::vector<bool>& unit_weight = {});

/// Per-row sqrt(sum (pred - truth)^2 / sum truth^2).
VectorXd rel_l2_rows(const MatrixXd& pred, const MatrixXd& truth);
/// Mean of rel_l2_rows.
double rel_l2(const MatrixXd& pred, const MatrixXd& truth);
/// max |pred - truth| / max |truth|.
double rel_err(std::span<const double> pred, std::span<const double> truth);

struct Normalized {
  MatrixXd rows;
  io::Normalizer stats;
};

/// Statistics over the rows (n >= 2), sd floored at 1e-12.
io::Normalizer fit_gaussian(const MatrixXd& rows);
Normalized gaussian_normalize(const MatrixXd& rows);
MatrixXd denormalize(const MatrixXd& rows, const io::Normalizer& stats);

/// Signals of a dataset as rows.
MatrixXd input_rows(const signalgen::ResponseDataset& ds);
MatrixXd output_rows(const signalgen::ResponseDataset& ds);

enum class Loss { mse, weighted };
enum class Normalization { none, gaussian };

std::string to_string(Loss l);
Loss parse_loss(const std::string& name);
std::string to_string(Normalization n);
Normalization parse_normalization(const std::string& name);

struct ArchConfig {
  ops::Arch arch = ops::Arch::causality;
  std::vector<int> branch_hidden{60, 60};
  std::vector<int> trunk_hidden{60, 60};
  int width = 60;               // N, shared branch/trunk output width
  nn::Activation activation = nn::Activation::tanh;
  std::size_t pod_modes = 0;    // 0: one per training signal
  std::vector<double> scales;   // multi-scale trunk; empty: default_scales()
  bool output_bias = false;
};

/// Fresh Glorot-initialised model for signals of m samples at step dt.
/// POD models take their basis from `train_outputs` (n x m).
ops::OperatorModel build_model(const ArchConfig& cfg, std::size_t m, double dt, std::uint64_t seed,
                               const MatrixXd& train_outputs = {});

struct TrainConfig {
  ArchConfig model;
  Loss loss = Loss::weighted;
  nn::LrSchedule schedule{{{500, 1e-3}, {2500, 1e-4}, {5000, 1e-5}}};
  long epochs = 5000;
  nn::RegConfig reg;
  nn::AdamConfig adam;
  std::uint64_t seed = 0;
  Normalization normalization = Normalization::none;
  std::size_t time_batch = 0;   // 0: every time index each step
  bool include_ic_pair = true;
  long eval_every = 1;          // test-set evaluation interval in epochs
  std::filesystem::path out_dir;  // history.csv, model.bin, best.bin when set
  bool verbose = false;

  void validate() const;
};

struct RunHistory {
  std::vector<long> epoch;
  std::vector<double> lr, loss, train_rel_l2, test_rel_l2;  // NaN where not evaluated
  VectorXd final_train_rel_l2;  // per sample, final model, eval mode
  VectorXd final_test_rel_l2;
  VectorXd final_test_rel_err;
  long best_epoch = -1;
  double best_test_rel_l2 = std::numeric_limits<double>::quiet_NaN();
  double seconds = 0.0;

  double final_train_mean() const;
  double final_test_mean() const;
};

struct TrainResult {
  io::SavedModel model;  // after the last epoch
  io::SavedModel best;   // lowest monitored test rel-L2
  RunHistory history;
};

/// Full-batch Adam over every training signal (plus the initial-condition
/// pair when enabled). Aborts with Errc::divergence on a non-finite loss.
TrainResult train(const TrainConfig& config, const signalgen::ResponseDataset& train_ds,
                  const signalgen::ResponseDataset& test_ds);

void write_history_csv(const RunHistory& history, const std::filesystem::path& file);

/// Eval-mode predictions (n x m) of a saved model on a dataset.
MatrixXd predict(const io::SavedModel& saved, const signalgen::ResponseDataset& ds);

struct Report {
  VectorXd rel_l2;   // per sample
  VectorXd rel_err;  // per sample
  std::size_t best = 0;
  std::size_t worst = 0;
  MatrixXd predictions;  // n x m

  double mean_rel_l2() const { return rel_l2.size() ? rel_l2.mean() : 0.0; }
};

/// Throws Errc::dimension_mismatch when the model and dataset disagree on m.
Report evaluate(const io::SavedModel& saved, const signalgen::ResponseDataset& ds);

/// report.csv plus pred_<id>.csv and spectrum_<id>.csv for best and worst.
void write_report(const Report& report, const signalgen::ResponseDataset& ds, const std::filesystem::path& dir);

}  // namespace causalop::harness
