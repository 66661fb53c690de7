#include <cmath>
#include <fstream>

#include "causalop/error.hpp"
#include "causalop/fft.hpp"
#include "causalop/harness.hpp"
#include "causalop/textio.hpp"

namespace causalop::harness {

namespace {

using textio::format;

std::ofstream open_csv(const std::filesystem::path& file) {
  std::ofstream out(file);
  require(bool(out), Errc::io, "cannot write " + file.string());
  return out;
}

std::string field(double v) { return std::isnan(v) ? std::string() : format(v); }

}  // namespace

void write_history_csv(const RunHistory& h, const std::filesystem::path& file) {
  auto out = open_csv(file);
  out << "epoch,lr,loss,train_rel_l2,test_rel_l2\n";
  for (std::size_t i = 0; i < h.epoch.size(); ++i)
    out << h.epoch[i] << ',' << format(h.lr[i]) << ',' << format(h.loss[i]) << ',' << field(h.train_rel_l2[i]) << ','
        << field(h.test_rel_l2[i]) << '\n';
}

void write_report(const Report& report, const signalgen::ResponseDataset& ds, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto out = open_csv(dir / "report.csv");
  out << "id,rel_l2,rel_err,tag\n";
  for (std::size_t l = 0; l < ds.size(); ++l) {
    std::string tag;
    if (l == report.best) tag = "best";
    if (l == report.worst) tag = tag.empty() ? "worst" : tag + "+worst";
    out << l << ',' << format(report.rel_l2[Eigen::Index(l)]) << ',' << format(report.rel_err[Eigen::Index(l)]) << ','
        << tag << '\n';
  }
  if (ds.size() == 0) return;

  for (std::size_t id : {report.best, report.worst}) {
    const auto& truth = ds.outputs[id].samples;
    const Eigen::RowVectorXd pred = report.predictions.row(Eigen::Index(id));
    auto traj = open_csv(dir / ("pred_" + std::to_string(id) + ".csv"));
    traj << "t,truth,pred\n";
    for (std::size_t j = 0; j < ds.m; ++j)
      traj << format(double(j) * ds.dt) << ',' << format(truth[j]) << ',' << format(pred[Eigen::Index(j)]) << '\n';

    const auto amp_truth = fft::amplitude_spectrum(truth);
    const auto amp_pred = fft::amplitude_spectrum({pred.data(), std::size_t(pred.size())});
    const double df = 1.0 / (double(fft::next_pow2(ds.m)) * ds.dt);
    auto spec = open_csv(dir / ("spectrum_" + std::to_string(id) + ".csv"));
    spec << "freq_hz,truth_amp,pred_amp\n";
    for (std::size_t k = 0; k < amp_truth.size(); ++k)
      spec << format(double(k) * df) << ',' << format(amp_truth[k]) << ',' << format(amp_pred[k]) << '\n';
  }
}

}  // namespace causalop::harness
