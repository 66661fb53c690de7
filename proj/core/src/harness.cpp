#include "causalop/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "causalop/error.hpp"

namespace causalop::harness {

using Eigen::Index;

namespace {

void check_same_shape(const MatrixXd& pred, const MatrixXd& truth) {
  require(pred.rows() == truth.rows() && pred.cols() == truth.cols(), Errc::dimension_mismatch,
          "prediction and truth shapes differ");
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::vector<int> widths(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> d{in};
  d.insert(d.end(), hidden.begin(), hidden.end());
  d.push_back(out);
  return d;
}

MatrixXd with_zero_row(const MatrixXd& rows) {
  MatrixXd out = MatrixXd::Zero(rows.rows() + 1, rows.cols());
  out.topRows(rows.rows()) = rows;
  return out;
}

}  // namespace

double loss_mse(const MatrixXd& pred, const MatrixXd& truth) {
  check_same_shape(pred, truth);
  require(pred.size() > 0, Errc::invalid_argument, "empty batch");
  return (pred - truth).squaredNorm() / double(pred.size());
}

VectorXd loss_weights(const MatrixXd& truth, const std::vector<bool>& unit_weight) {
  require(unit_weight.empty() || unit_weight.size() == std::size_t(truth.rows()), Errc::dimension_mismatch,
          "unit-weight flags do not match row count");
  VectorXd w(truth.rows());
  for (Index l = 0; l < truth.rows(); ++l) {
    if (!unit_weight.empty() && unit_weight[std::size_t(l)]) {
      w[l] = 1.0;
      continue;
    }
    const double peak = truth.row(l).cwiseAbs().maxCoeff();
    require(peak > 0.0, Errc::invalid_argument, "truth row " + std::to_string(l) + " is identically zero");
    w[l] = 1.0 / peak;
  }
  return w;
}

double loss_weighted(const MatrixXd& pred, const MatrixXd& truth, const std::vector<bool>& unit_weight) {
  check_same_shape(pred, truth);
  require(pred.size() > 0, Errc::invalid_argument, "empty batch");
  const VectorXd w = loss_weights(truth, unit_weight);
  const VectorXd mse = (pred - truth).rowwise().squaredNorm() / double(pred.cols());
  return w.dot(mse) / double(pred.rows());
}

VectorXd rel_l2_rows(const MatrixXd& pred, const MatrixXd& truth) {
  check_same_shape(pred, truth);
  VectorXd out(pred.rows());
  for (Index l = 0; l < pred.rows(); ++l) {
    const double denom = truth.row(l).squaredNorm();
    require(denom > 0.0, Errc::invalid_argument, "truth row " + std::to_string(l) + " has zero norm");
    out[l] = std::sqrt((pred.row(l) - truth.row(l)).squaredNorm() / denom);
  }
  return out;
}

double rel_l2(const MatrixXd& pred, const MatrixXd& truth) {
  require(pred.rows() > 0, Errc::invalid_argument, "empty batch");
  return rel_l2_rows(pred, truth).mean();
}

double rel_err(std::span<const double> pred, std::span<const double> truth) {
  require(pred.size() == truth.size(), Errc::length_mismatch, "prediction and truth lengths differ");
  double err = 0.0, peak = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    err = std::max(err, std::abs(pred[i] - truth[i]));
    peak = std::max(peak, std::abs(truth[i]));
  }
  require(peak > 0.0, Errc::invalid_argument, "truth row is identically zero");
  return err / peak;
}

io::Normalizer fit_gaussian(const MatrixXd& rows) {
  require(rows.rows() >= 2, Errc::invalid_argument, "Gaussian statistics need at least two rows");
  io::Normalizer s;
  s.mean = rows.colwise().mean().transpose();
  const MatrixXd centred = rows.rowwise() - s.mean.transpose();
  s.sd = (centred.colwise().squaredNorm() / double(rows.rows())).cwiseSqrt().transpose();
  s.sd = s.sd.cwiseMax(1e-12);
  return s;
}

Normalized gaussian_normalize(const MatrixXd& rows) {
  Normalized out;
  out.stats = fit_gaussian(rows);
  out.rows = out.stats.apply(rows);
  return out;
}

MatrixXd denormalize(const MatrixXd& rows, const io::Normalizer& stats) { return stats.invert(rows); }

MatrixXd input_rows(const signalgen::ResponseDataset& ds) {
  MatrixXd x(Index(ds.size()), Index(ds.m));
  for (std::size_t l = 0; l < ds.size(); ++l)
    x.row(Index(l)) = Eigen::Map<const Eigen::RowVectorXd>(ds.inputs[l].samples.data(), Index(ds.m));
  return x;
}

MatrixXd output_rows(const signalgen::ResponseDataset& ds) {
  MatrixXd y(Index(ds.size()), Index(ds.m));
  for (std::size_t l = 0; l < ds.size(); ++l)
    y.row(Index(l)) = Eigen::Map<const Eigen::RowVectorXd>(ds.outputs[l].samples.data(), Index(ds.m));
  return y;
}

std::string to_string(Loss l) { return l == Loss::mse ? "mse" : "weighted_mse"; }

Loss parse_loss(const std::string& name) {
  if (name == "mse") return Loss::mse;
  if (name == "weighted_mse" || name == "weighted") return Loss::weighted;
  fail(Errc::config, "unknown loss '" + name + "'");
}

std::string to_string(Normalization n) { return n == Normalization::none ? "none" : "gaussian"; }

Normalization parse_normalization(const std::string& name) {
  if (name == "none") return Normalization::none;
  if (name == "gaussian") return Normalization::gaussian;
  fail(Errc::config, "unknown normalization '" + name + "'");
}

ops::OperatorModel build_model(const ArchConfig& cfg, std::size_t m, double dt, std::uint64_t seed,
                               const MatrixXd& train_outputs) {
  require(m >= 1 && dt > 0.0, Errc::invalid_argument, "model needs m >= 1 and dt > 0");
  require(cfg.width >= 1, Errc::config, "width must be positive");
  std::mt19937_64 rng(seed);
  const int mi = int(m);
  switch (cfg.arch) {
    case ops::Arch::deeponet: {
      ops::DeepOnetModel d;
      d.branch = nn::Mlp::glorot(widths(mi, cfg.branch_hidden, cfg.width), cfg.activation, rng);
      d.trunk = nn::Mlp::glorot(widths(1, cfg.trunk_hidden, cfg.width), cfg.activation, rng);
      d.use_output_bias = cfg.output_bias;
      d.dt = dt;
      d.m = m;
      return d;
    }
    case ops::Arch::pod: {
      require(train_outputs.cols() == Index(m), Errc::dimension_mismatch, "POD needs the training outputs");
      // centering costs one rank
      const std::size_t p = cfg.pod_modes ? cfg.pod_modes : std::size_t(std::max<Index>(train_outputs.rows() - 1, 1));
      auto basis = ops::pod_basis(train_outputs, p);
      ops::PodDeepOnetModel pod;
      pod.branch = nn::Mlp::glorot(widths(mi, cfg.branch_hidden, int(p)), cfg.activation, rng);
      pod.basis = std::move(basis.basis);
      pod.mean = std::move(basis.mean);
      pod.dt = dt;
      return pod;
    }
    case ops::Arch::msdeeponet: {
      ops::MsDeepOnetModel ms;
      ms.branch = nn::Mlp::glorot(widths(mi, cfg.branch_hidden, cfg.width), cfg.activation, rng);
      ms.trunk.scales = cfg.scales.empty() ? ops::default_scales() : cfg.scales;
      for (double s : ms.trunk.scales) require(std::isfinite(s) && s > 0.0, Errc::config, "scales must be positive");
      const double share = 1.0 / double(ms.trunk.scales.size());
      for (std::size_t i = 0; i < ms.trunk.scales.size(); ++i) {
        ms.trunk.subnets.push_back(nn::Mlp::glorot(widths(1, cfg.trunk_hidden, cfg.width), cfg.activation, rng));
        ms.trunk.combo.push_back(share);
      }
      ms.dt = dt;
      ms.m = m;
      return ms;
    }
    case ops::Arch::causality:
    case ops::Arch::causality_noconv: {
      ops::CausalityModel c;
      c.branch = nn::Mlp::glorot(widths(mi, cfg.branch_hidden, cfg.width), cfg.activation, rng);
      c.trunk = nn::Mlp::glorot(widths(1, cfg.trunk_hidden, cfg.width), cfg.activation, rng);
      c.convolutional = cfg.arch == ops::Arch::causality;
      c.dt = dt;
      c.m = m;
      return c;
    }
  }
  fail(Errc::config, "unknown architecture");
}

void TrainConfig::validate() const {
  require(epochs >= 1, Errc::config, "epochs must be >= 1");
  require(eval_every >= 1, Errc::config, "eval_every must be >= 1");
  schedule.validate();
  reg.validate();
}

double RunHistory::final_train_mean() const {
  return final_train_rel_l2.size() ? final_train_rel_l2.mean() : std::numeric_limits<double>::quiet_NaN();
}

double RunHistory::final_test_mean() const {
  return final_test_rel_l2.size() ? final_test_rel_l2.mean() : std::numeric_limits<double>::quiet_NaN();
}

TrainResult train(const TrainConfig& config, const signalgen::ResponseDataset& train_ds,
                  const signalgen::ResponseDataset& test_ds) {
  config.validate();
  train_ds.validate();
  require(train_ds.size() >= 1, Errc::invalid_argument, "training set is empty");
  if (test_ds.size()) {
    test_ds.validate();
    require(test_ds.m == train_ds.m && test_ds.dt == train_ds.dt, Errc::dimension_mismatch,
            "training and test sets differ in m or dt");
  }
  const auto started = std::chrono::steady_clock::now();
  const std::size_t m = train_ds.m;
  const Index mi = Index(m);

  MatrixXd x = input_rows(train_ds);
  MatrixXd y = output_rows(train_ds);
  std::optional<io::Normalizer> norm;
  if (config.normalization == Normalization::gaussian) norm = fit_gaussian(x);
  const Index n_signals = x.rows();
  std::vector<bool> ic(std::size_t(n_signals), false);
  if (config.include_ic_pair) {
    x = with_zero_row(x);
    y = with_zero_row(y);
    ic.push_back(true);
  }
  const Index n = x.rows();
  if (norm) x = norm->apply(x);

  TrainResult result;
  ops::OperatorModel model = build_model(config.model, m, train_ds.dt, config.seed, y);
  ops::OperatorModel grad = ops::zeros_like(model);
  const auto params = ops::param_views(model);
  const auto grads = ops::param_views(grad);

  ops::BatchEngine engine(model, x.transpose());
  std::optional<ops::BatchEngine> test_engine;
  MatrixXd test_truth;
  if (test_ds.size()) {
    MatrixXd xt = input_rows(test_ds);
    if (norm) xt = norm->apply(xt);
    test_engine.emplace(model, xt.transpose());
    test_truth = output_rows(test_ds);
  }

  const MatrixXd truth = y.transpose();  // m x n, matches engine output
  const VectorXd weights = config.loss == Loss::weighted ? loss_weights(y, ic) : VectorXd::Ones(n);
  nn::AdamState adam;
  adam.config = config.adam;

  auto& h = result.history;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const bool subset = config.time_batch > 0 && config.time_batch < m;
  std::vector<Index> order(m);
  std::iota(order.begin(), order.end(), Index(0));
  VectorXd row_mask = VectorXd::Ones(mi);
  ops::OperatorModel best = model;

  for (long epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = nn::lr_at(config.schedule, epoch);
    const std::uint64_t epoch_seed = mix(config.seed, std::uint64_t(epoch));
    const MatrixXd& pred = engine.forward(model, config.reg, epoch_seed);

    MatrixXd resid = pred - truth;
    double count = double(m);
    if (subset) {
      std::mt19937_64 pick(mix(epoch_seed, 0x7469));
      std::shuffle(order.begin(), order.end(), pick);
      row_mask.setZero();
      for (std::size_t k = 0; k < config.time_batch; ++k) row_mask[order[k]] = 1.0;
      resid = row_mask.asDiagonal() * resid;
      count = double(config.time_batch);
    }
    const VectorXd mse = resid.colwise().squaredNorm().transpose() / count;
    const double loss = weights.dot(mse) / double(n);
    if (!std::isfinite(loss))
      fail(Errc::divergence, "non-finite loss at epoch " + std::to_string(epoch));

    double train_rel = 0.0;
    for (Index l = 0; l < n_signals; ++l)
      train_rel += (pred.col(l) - truth.col(l)).norm() / truth.col(l).norm();
    train_rel /= double(n_signals);

    double test_rel = nan;
    if (test_engine && (epoch % config.eval_every == 0 || epoch + 1 == config.epochs)) {
      test_rel = rel_l2(test_engine->predict(model).transpose(), test_truth);
      if (std::isnan(h.best_test_rel_l2) || test_rel < h.best_test_rel_l2) {
        h.best_test_rel_l2 = test_rel;
        h.best_epoch = epoch;
        best = model;
      }
    }

    h.epoch.push_back(epoch);
    h.lr.push_back(lr);
    h.loss.push_back(loss);
    h.train_rel_l2.push_back(train_rel);
    h.test_rel_l2.push_back(test_rel);
    if (config.verbose && (epoch % 500 == 0 || epoch + 1 == config.epochs))
      std::fprintf(stderr, "epoch %6ld  lr %.1e  loss %.4e  train %.4e  test %.4e\n", epoch, lr, loss, train_rel,
                   test_rel);

    for (const auto& g : grads) std::fill(g.data, g.data + g.size, 0.0);
    const MatrixXd upstream = resid * (weights * (2.0 / (double(n) * count))).asDiagonal();
    engine.backward(model, upstream, grad);
    nn::adam_step(adam, params, grads, lr, config.reg);
  }

  result.model = io::SavedModel{model, norm};
  result.best = io::SavedModel{test_engine ? best : model, norm};
  if (!test_engine) h.best_epoch = config.epochs - 1;

  h.final_train_rel_l2 = evaluate(result.model, train_ds).rel_l2;
  if (test_ds.size()) {
    const Report rep = evaluate(result.model, test_ds);
    h.final_test_rel_l2 = rep.rel_l2;
    h.final_test_rel_err = rep.rel_err;
  }
  h.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  if (!config.out_dir.empty()) {
    std::filesystem::create_directories(config.out_dir);
    write_history_csv(h, config.out_dir / "history.csv");
    io::save_model(result.model, config.out_dir / "model.bin");
    io::save_model(result.best, config.out_dir / "best.bin");
  }
  return result;
}

MatrixXd predict(const io::SavedModel& saved, const signalgen::ResponseDataset& ds) {
  const std::size_t m = ops::sensor_count(saved.model);
  require(ds.m == m, Errc::dimension_mismatch,
          "dataset has m = " + std::to_string(ds.m) + " but the model expects m = " + std::to_string(m));
  if (ds.size() == 0) return MatrixXd(0, Index(m));
  MatrixXd x = input_rows(ds);
  if (saved.input_norm) x = saved.input_norm->apply(x);
  return ops::predict(saved.model, x.transpose()).transpose();
}

Report evaluate(const io::SavedModel& saved, const signalgen::ResponseDataset& ds) {
  Report r;
  r.predictions = predict(saved, ds);
  const MatrixXd truth = output_rows(ds);
  r.rel_l2 = ds.size() ? rel_l2_rows(r.predictions, truth) : VectorXd();
  r.rel_err.resize(Index(ds.size()));
  for (Index l = 0; l < Index(ds.size()); ++l) {
    const Eigen::RowVectorXd p = r.predictions.row(l);
    r.rel_err[l] = rel_err({p.data(), std::size_t(p.size())}, ds.outputs[std::size_t(l)].samples);
  }
  if (ds.size()) {
    Index lo = 0, hi = 0;
    r.rel_l2.minCoeff(&lo);
    r.rel_l2.maxCoeff(&hi);
    r.best = std::size_t(lo);
    r.worst = std::size_t(hi);
  }
  return r;
}

}  // namespace causalop::harness
