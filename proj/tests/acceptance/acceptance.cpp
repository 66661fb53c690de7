// Acceptance suite: one PASS/FAIL line per criterion. Arguments select a
// subset of criterion numbers; no arguments runs all ten.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>

#include "causalop/checkpoint.hpp"
#include "causalop/harness.hpp"
#include "causalop/lindyn.hpp"
#include "causalop/model_io.hpp"
#include "causalop/operators.hpp"
#include "causalop/signalgen.hpp"
#include "causalop/system_file.hpp"
#include "causalop/textio.hpp"
#include "experiment.hpp"

using namespace causalop;
using Eigen::MatrixXd;
using Eigen::VectorXd;
namespace fs = std::filesystem;

namespace {

const fs::path config_dir = CAUSALOP_CONFIG_DIR;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double rel_l2(std::span<const double> a, std::span<const double> b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num / den);
}

std::vector<double> gaussian(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

ops::CausalityModel random_causality(std::size_t m, bool conv, std::mt19937_64& rng) {
  harness::ArchConfig cfg;
  cfg.arch = conv ? ops::Arch::causality : ops::Arch::causality_noconv;
  return std::get<ops::CausalityModel>(harness::build_model(cfg, m, 0.02, rng()));
}

// ---- physics -------------------------------------------------------------

Outcome physics_oracle() {
  const auto t0 = Clock::now();
  const auto def = lindyn::load_system(config_dir / "chain6.yaml");
  const auto modes = lindyn::modal_decompose(def.system, def.modal_xi);
  double err[2] = {0.0, 0.0};
  for (std::uint64_t r = 0; r < 10; ++r) {
    const auto fine = signalgen::synth_ground_motion(100 + r, 10.0, 0.005, {0.1, 24.9}, 2.0);
    for (int level = 0; level < 2; ++level) {
      const std::size_t stride = level == 0 ? 4 : 2;
      std::vector<double> s;
      for (std::size_t j = 0; j < fine.size(); j += stride) s.push_back(fine.samples[j]);
      const Signal g(fine.dt * double(stride), s);
      err[level] += rel_l2(lindyn::duhamel_response(modes, 0, g).samples,
                           lindyn::newmark_response(def.system, g).dof(0).samples) / 10.0;
    }
  }
  const double ratio = err[0] / err[1], secs = seconds_since(t0);
  return {err[0] <= 5e-3 && ratio >= 3.5 && secs < 10.0,
          fmt("mean rel-L2 %.3e at dt=0.02 (<= 5e-3), halving dt gains %.2fx (>= 3.5), %.2f s (< 10)", err[0], ratio,
              secs)};
}

Outcome step_closed_form() {
  const double w = 2 * 3.14159265358979323846, xi = 0.05, dt = 0.005;
  lindyn::MdofSystem s;
  s.mass = MatrixXd::Ones(1, 1);
  s.stiffness = MatrixXd::Constant(1, 1, w * w);
  s.damping = MatrixXd::Zero(1, 1);
  s.influence = VectorXd::Ones(1);
  const auto modes = lindyn::modal_decompose(s, std::vector<double>{xi});
  const std::size_t m = std::size_t(10.0 / dt) + 1;
  const auto response = lindyn::duhamel_response(modes, 0, Signal(dt, std::vector<double>(m, 1.0)));
  const double wd = w * std::sqrt(1 - xi * xi);
  std::vector<double> exact(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double t = dt * double(j);
    exact[j] = -(1 - std::exp(-xi * w * t) * (std::cos(wd * t) + xi / std::sqrt(1 - xi * xi) * std::sin(wd * t))) /
               (w * w);
  }
  const double e = rel_l2(response.samples, exact);
  return {e <= 1e-3, fmt("rel-L2 %.3e vs closed form (<= 1e-3)", e)};
}

// ---- networks ------------------------------------------------------------

Outcome gradient_suite() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::string per;
  for (auto act : {nn::Activation::relu, nn::Activation::tanh, nn::Activation::sin, nn::Activation::sigmoid,
                   nn::Activation::shifted_sigmoid}) {
    double act_worst = 0.0;
    int accepted = 0;
    for (std::uint64_t seed = 1; accepted < 5; ++seed) {
      std::mt19937_64 rng(seed);
      const auto net = nn::Mlp::glorot({6, 16, 16, 4}, act, rng);
      const auto xv = gaussian(6 * 8, rng), uv = gaussian(4 * 8, rng);
      const MatrixXd x = Eigen::Map<const MatrixXd>(xv.data(), 6, 8);
      const MatrixXd up = Eigen::Map<const MatrixXd>(uv.data(), 4, 8);
      if (act == nn::Activation::relu) {
        // Keep every hidden pre-activation at least 1e-3 away from the kink.
        MatrixXd a = x;
        double closest = 1e300;
        for (std::size_t l = 0; l + 1 < net.layers.size(); ++l) {
          const MatrixXd pre = (net.layers[l].weight * a).colwise() + net.layers[l].bias;
          closest = std::min(closest, pre.cwiseAbs().minCoeff());
          a = pre.cwiseMax(0.0);
        }
        if (closest < 1e-3) continue;
      }
      ++accepted;
      act_worst = std::max(act_worst, nn::check_gradients(net, x, up).max_rel_error);
    }
    worst = std::max(worst, act_worst);
    per += fmt(" %s %.1e", nn::to_string(act).c_str(), act_worst);
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-5 && secs < 5.0, fmt("max rel error %.2e (<= 1e-5):%s, %.2f s (< 5)", worst, per.c_str(), secs)};
}

Outcome architectural_causality() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(404);
  const std::size_t m = 64;
  const auto conv = random_causality(m, true, rng), noconv = random_causality(m, false, rng);
  int broken = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t p = std::uniform_int_distribution<std::size_t>(0, m - 1)(rng);
    auto a = gaussian(m, rng), b = gaussian(m, rng);
    std::copy_n(a.begin(), p, b.begin());
    auto c = a;
    c[std::uniform_int_distribution<std::size_t>(p, m - 1)(rng)] += 10.0;
    for (const auto* model : {&conv, &noconv}) {
      const double ya = ops::causality_forward(*model, a, p);
      if (ya != ops::causality_forward(*model, b, p) || ya != ops::causality_forward(*model, c, p)) ++broken;
    }
  }
  const double secs = seconds_since(t0);
  return {broken == 0 && secs < 1.0, fmt("%d of 200 prefix cases differ (0 allowed), %.3f s (< 1)", broken, secs)};
}

Outcome convolution_property() {
  std::mt19937_64 rng(505);
  const std::size_t m = 64;
  const auto conv = random_causality(m, true, rng), noconv = random_causality(m, false, rng);
  int conv_broken = 0;
  double noconv_diff = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = std::uniform_int_distribution<std::size_t>(1, m / 2)(rng);
    const std::size_t p = std::uniform_int_distribution<std::size_t>(1, m - k)(rng);
    const auto u = gaussian(m, rng);
    std::vector<double> shifted(m, 0.0);
    std::copy_n(u.begin(), m - k, shifted.begin() + std::ptrdiff_t(k));
    if (ops::causality_branch_features(conv, u, p) != ops::causality_branch_features(conv, shifted, p + k))
      ++conv_broken;
    noconv_diff = std::max(noconv_diff, (ops::causality_branch_features(noconv, u, p) -
                                         ops::causality_branch_features(noconv, shifted, p + k))
                                            .cwiseAbs()
                                            .maxCoeff());
  }
  return {conv_broken == 0 && noconv_diff > 1e-6,
          fmt("convolutional: %d of 100 cases differ (0 allowed); no-conv max feature diff %.3e (> 1e-6)", conv_broken,
              noconv_diff)};
}

Outcome fft_fast_path() {
  std::mt19937_64 rng(606);
  bool pass = true;
  std::string text;
  for (std::size_t m : {256, 1024}) {
    const auto model = random_causality(m, true, rng);
    const auto u = gaussian(m, rng);
    double t_direct = 1e300, t_fast = 1e300;
    VectorXd direct, fast;
    for (int rep = 0; rep < 3; ++rep) {
      auto t0 = Clock::now();
      direct = ops::causality_forward_all(model, u, false);
      t_direct = std::min(t_direct, seconds_since(t0));
      t0 = Clock::now();
      fast = ops::causality_forward_all(model, u, true);
      t_fast = std::min(t_fast, seconds_since(t0));
    }
    const double diff = (direct - fast).cwiseAbs().maxCoeff();
    pass = pass && diff <= 1e-9 && (m != 1024 || t_fast < t_direct);
    text += fmt("m=%zu max diff %.2e (<= 1e-9), direct %.1f ms, fast %.1f ms; ", m, diff, 1e3 * t_direct, 1e3 * t_fast);
  }
  text.resize(text.size() - 2);
  return {pass, text + " (fast must be quicker at m=1024)"};
}

// ---- trained comparisons ---------------------------------------------------

struct Suite {
  std::map<std::string, experiment::ExperimentConfig> configs;
  std::optional<experiment::Split> data;
  std::map<std::pair<std::string, std::uint64_t>, harness::TrainResult> runs;

  const experiment::Split& split() {
    if (!data) data = experiment::generate(config("causality"));
    return *data;
  }
  const experiment::ExperimentConfig& config(const std::string& name) {
    auto it = configs.find(name);
    if (it == configs.end()) it = configs.emplace(name, experiment::load_experiment(config_dir / (name + ".yaml"))).first;
    return it->second;
  }
  const harness::TrainResult& run(const std::string& name, std::uint64_t seed) {
    const auto key = std::make_pair(name, seed);
    if (auto it = runs.find(key); it != runs.end()) return it->second;
    auto cfg = config(name).training;
    cfg.seed = seed;
    const auto& s = split();
    const auto t0 = Clock::now();
    auto result = harness::train(cfg, s.train, s.test);
    std::fprintf(stderr, "  trained %s seed %llu: train %.4g test %.4g (%.0f s)\n", name.c_str(),
                 static_cast<unsigned long long>(seed), result.history.final_train_mean(),
                 result.history.final_test_mean(), seconds_since(t0));
    return runs.emplace(key, std::move(result)).first->second;
  }
};

Outcome scaled_contrast(Suite& suite) {
  const auto t0 = Clock::now();
  const auto& data = suite.split();
  std::string causal, plain;
  int causal_ok = 0;
  bool plain_ok = true;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const double c = suite.run("causality", seed).history.final_test_mean();
    const double d = suite.run("deeponet", seed).history.final_test_mean();
    causal_ok += c <= 0.05;
    plain_ok = plain_ok && d >= 0.5;
    causal += fmt(" %.4f", c);
    plain += fmt(" %.3f", d);
  }
  const auto& cm = suite.runs.at({"causality", 1}).model.model;
  const auto& dm = suite.runs.at({"deeponet", 1}).model.model;
  const bool matched = ops::parameter_count(cm) == ops::parameter_count(dm);
  const double secs = seconds_since(t0);
  return {causal_ok >= 4 && plain_ok && matched && secs < 1200.0,
          fmt("%zu train + IC, %zu test, m=%zu; causality test rel-L2%s (<= 0.05 on >= 4 of 5, %d met); deeponet%s "
              "(>= 0.5 on all); %zu parameters each; %.0f s (< 1200)",
              data.train.size(), data.test.size(), data.train.m, causal.c_str(), causal_ok, plain.c_str(),
              ops::parameter_count(cm), secs)};
}

Outcome pod_sanity(Suite& suite) {
  const auto& data = suite.split();
  MatrixXd outs(Eigen::Index(data.train.size() + 1), Eigen::Index(data.train.m));
  outs.topRows(outs.rows() - 1) = harness::output_rows(data.train);
  outs.bottomRows(1).setZero();
  // Centering n rows leaves rank n - 1, which is the full basis here.
  const std::size_t p = std::size_t(outs.rows()) - 1;
  const auto pb = ops::pod_basis(outs, p);
  const MatrixXd centred = outs.rowwise() - pb.mean.transpose();
  const double recon = (centred * pb.basis.transpose() * pb.basis - centred).cwiseAbs().maxCoeff() /
                       centred.cwiseAbs().maxCoeff();
  const double pod = suite.run("pod", 1).history.final_train_mean();
  const double deep = suite.run("deeponet", 1).history.final_train_mean();
  return {recon <= 1e-8 && pod < deep,
          fmt("p=%zu reconstruction error %.2e relative (<= 1e-8); POD train rel-L2 %.3e < DeepONet %.3f", p, recon, pod,
              deep)};
}

Outcome metric_identities() {
  std::mt19937_64 rng(909);
  const auto tv = gaussian(6 * 50, rng), pv = gaussian(6 * 50, rng);
  MatrixXd truth = Eigen::Map<const MatrixXd>(tv.data(), 6, 50);
  const MatrixXd pred = Eigen::Map<const MatrixXd>(pv.data(), 6, 50);
  const VectorXd zero = harness::rel_l2_rows(MatrixXd::Zero(6, 50), truth);
  const bool zero_ok = (zero.array() == 1.0).all();
  for (Eigen::Index r = 0; r < truth.rows(); ++r) truth.row(r) /= truth.row(r).cwiseAbs().maxCoeff();
  const double loss_gap = std::abs(harness::loss_weighted(pred, truth) - harness::loss_mse(pred, truth));
  const auto norm = harness::gaussian_normalize(MatrixXd(3.0 * pred));
  const double round = (harness::denormalize(norm.rows, norm.stats) - 3.0 * pred).cwiseAbs().maxCoeff();

  harness::ArchConfig cfg;
  const auto file = fs::temp_directory_path() / "causalop_acceptance_model.bin";
  const io::SavedModel saved{harness::build_model(cfg, 50, 0.02, rng()), norm.stats};
  io::save_model(saved, file);
  const auto loaded = io::load_model(file);
  fs::remove(file);
  const MatrixXd inputs = pred.transpose();
  const bool ckpt_ok = io::encode(loaded) == io::encode(saved) &&
                       ops::predict(loaded.model, inputs) == ops::predict(saved.model, inputs);
  return {zero_ok && loss_gap <= 1e-15 && round <= 1e-12 && ckpt_ok,
          fmt("rel_l2(0, truth) = 1 on every row: %s; |weighted - mse| %.1e; normalisation round trip %.1e "
              "(<= 1e-12); checkpoint round trip bit-exact: %s",
              zero_ok ? "yes" : "no", loss_gap, round, ckpt_ok ? "yes" : "no")};
}

Outcome activation_ablation(Suite& suite) {
  const double tanh = suite.run("causality", 1).history.final_train_mean();
  const double sig = suite.run("causality_sigmoid", 1).history.final_train_mean();
  const double shifted = suite.run("causality_shifted_sigmoid", 1).history.final_train_mean();
  return {sig >= 5.0 * tanh && shifted <= 3.0 * tanh,
          fmt("train rel-L2 tanh %.4f, sigmoid %.4f (%.2fx, needs >= 5x), shifted sigmoid %.4f (%.2fx, needs <= 3x)",
              tanh, sig, sig / tanh, shifted, shifted / tanh)};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  Suite suite;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"physics oracle agreement", physics_oracle},
      {"closed-form step response", step_closed_form},
      {"gradient suite", gradient_suite},
      {"architectural causality", architectural_causality},
      {"convolution property", convolution_property},
      {"FFT fast path", fft_fast_path},
      {"scaled causality vs DeepONet contrast", [&] { return scaled_contrast(suite); }},
      {"POD sanity", [&] { return pod_sanity(suite); }},
      {"metric identities", metric_identities},
      {"activation ablation trend", [&] { return activation_ablation(suite); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = int(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
