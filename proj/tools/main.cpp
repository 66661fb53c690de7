#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>

#include "causalop/error.hpp"
#include "causalop/fft.hpp"
#include "causalop/model_io.hpp"
#include "experiment.hpp"

namespace fs = std::filesystem;
using namespace causalop;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

enum Exit { ok = 0, internal = 1, config_error = 2, numerical = 3, diverged = 4, mismatch = 5 };

int exit_code(Errc code) {
  switch (code) {
    case Errc::divergence: return diverged;
    case Errc::dimension_mismatch:
    case Errc::length_mismatch:
    case Errc::fast_path_undefined: return mismatch;
    case Errc::eigen_failure:
    case Errc::singular_matrix:
    case Errc::non_finite:
    case Errc::rank_deficient: return numerical;
    default: return config_error;
  }
}

struct Options {
  std::vector<std::string> configs;
  std::string data, model, out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 1;
  bool verbose = false;
  std::vector<std::size_t> sizes{256, 1024, 4096};
};

experiment::ExperimentConfig load(const Options& o, std::size_t index = 0) {
  require(index < o.configs.size(), Errc::config, "--config is required");
  auto c = experiment::load_experiment(o.configs[index]);
  if (!o.out.empty() && o.configs.size() == 1) c.out = o.out;
  return c;
}

void write_text(const fs::path& file, const std::string& text) {
  fs::create_directories(file.parent_path());
  std::ofstream out(file);
  require(bool(out), Errc::io, "cannot write " + file.string());
  out << text;
}

void print_stats(const char* label, const signalgen::ResponseDataset& ds) {
  std::printf("%s: %zu records, m = %zu, dt = %g s, units %s\n", label, ds.size(), ds.m, ds.dt,
              ds.meta.input_units.c_str());
  if (ds.size() == 0) return;
  const auto st = signalgen::compute_stats(ds.inputs);
  std::printf("  %-8s %12s %12s %12s %12s\n", "", "min", "max", "mean", "sd");
  auto row = [](const char* name, const signalgen::Summary& s) {
    std::printf("  %-8s %12.5g %12.5g %12.5g %12.5g\n", name, s.min, s.max, s.mean, s.sd);
  };
  row("pga", st.pga);
  row("max", st.max_value);
  row("min", st.min_value);
  row("energy", st.energy);
}

int cmd_gen(const Options& o) {
  auto c = load(o);
  if (o.seed_set) c.signals.seed = o.seed;
  const fs::path dir = o.data.empty() ? c.out / "data" : fs::path(o.data);
  const auto split = experiment::generate(c, o.threads);
  experiment::save_split(split, dir);
  write_text(dir / "resolved_config.yaml", experiment::resolved_yaml(c));
  print_stats("train", split.train);
  print_stats("test", split.test);
  std::printf("wrote %s\n", dir.string().c_str());
  return ok;
}

experiment::Summary run_training(experiment::ExperimentConfig c, const Options& o, const fs::path& data_dir) {
  if (o.seed_set) c.training.seed = o.seed;
  experiment::Split split;
  if (fs::is_directory(data_dir / "train")) {
    split = experiment::load_split(data_dir);
  } else {
    require(o.data.empty(), Errc::io, "no dataset under " + data_dir.string());
    split = experiment::generate(c, o.threads);
    experiment::save_split(split, data_dir);
  }
  c.training.out_dir = c.out;
  c.training.verbose = o.verbose;
  write_text(c.out / "resolved_config.yaml", experiment::resolved_yaml(c));
  const auto result = harness::train(c.training, split.train, split.test);
  const auto summary = experiment::summarize(c, result);
  experiment::write_summaries({summary}, c.out / "summary.csv");
  return summary;
}

int cmd_train(const Options& o) {
  const auto c = load(o);
  const fs::path data = o.data.empty() ? c.out / "data" : fs::path(o.data);
  const auto s = run_training(c, o, data);
  std::printf("%s (%s): train rel-L2 %.6g, test rel-L2 %.6g, %zu parameters, %.1f s\n", s.name.c_str(),
              s.arch.c_str(), s.train_rel_l2, s.test_rel_l2, s.parameters, s.seconds);
  std::printf("wrote %s\n", c.out.string().c_str());
  return ok;
}

int cmd_eval(const Options& o) {
  require(!o.model.empty(), Errc::config, "--model is required");
  require(!o.data.empty(), Errc::config, "--data is required");
  fs::path dir = o.data;
  if (!fs::exists(dir / "meta") && fs::is_directory(dir / "test")) dir /= "test";
  const auto saved = io::load_model(o.model);
  const auto ds = signalgen::load_dataset(dir);
  const auto report = harness::evaluate(saved, ds);
  const fs::path out = o.out.empty() ? fs::path(o.model).parent_path() / "eval" : fs::path(o.out);
  harness::write_report(report, ds, out);
  if (ds.size()) {
    std::printf("%zu samples: mean rel-L2 %.6g, best #%zu (%.4g), worst #%zu (%.4g)\n", ds.size(), report.mean_rel_l2(),
                report.best, report.rel_l2[Eigen::Index(report.best)], report.worst,
                report.rel_l2[Eigen::Index(report.worst)]);
  } else {
    std::printf("empty dataset\n");
  }
  std::printf("wrote %s\n", out.string().c_str());
  return ok;
}

int cmd_compare(const Options& o) {
  require(!o.configs.empty(), Errc::config, "compare needs at least one --config");
  std::vector<experiment::Summary> rows;
  for (std::size_t i = 0; i < o.configs.size(); ++i) {
    const auto c = load(o, i);
    const fs::path summary = c.out / "summary.csv";
    if (fs::exists(summary) && !o.seed_set) {
      const auto previous = experiment::read_summaries(summary);
      rows.insert(rows.end(), previous.begin(), previous.end());
      std::printf("%s: reused %s\n", c.name.c_str(), summary.string().c_str());
      continue;
    }
    rows.push_back(run_training(c, o, c.out / "data"));
    std::printf("%s: trained\n", c.name.c_str());
  }
  const fs::path out = o.out.empty() ? fs::path("compare.csv") : fs::path(o.out) / "compare.csv";
  experiment::write_summaries(rows, out);
  std::printf("%-20s %-18s %10s %12s %12s\n", "name", "arch", "params", "train", "test");
  for (const auto& r : rows)
    std::printf("%-20s %-18s %10zu %12.5g %12.5g\n", r.name.c_str(), r.arch.c_str(), r.parameters, r.train_rel_l2,
                r.test_rel_l2);
  std::printf("wrote %s\n", out.string().c_str());
  return ok;
}

int cmd_grad_check(const Options& o) {
  std::mt19937_64 rng(o.seed_set ? o.seed : 7);
  std::normal_distribution<double> normal;
  double worst = 0.0;
  for (auto act : {nn::Activation::relu, nn::Activation::tanh, nn::Activation::sin, nn::Activation::sigmoid,
                   nn::Activation::shifted_sigmoid}) {
    const auto net = nn::Mlp::glorot({5, 12, 12, 4}, act, rng);
    MatrixXd x(5, 7), up(4, 7);
    for (auto* m : {&x, &up})
      for (Eigen::Index i = 0; i < m->size(); ++i) (*m)(i) = normal(rng);
    const auto g = nn::check_gradients(net, x, up);
    worst = std::max(worst, g.max_rel_error);
    std::printf("%-16s max rel error %.3e over %zu parameters\n", nn::to_string(act).c_str(), g.max_rel_error,
                g.checked);
  }
  std::printf("%s (threshold 1e-5)\n", worst <= 1e-5 ? "PASS" : "FAIL");
  return worst <= 1e-5 ? ok : numerical;
}

int cmd_bench_fft(const Options& o) {
  std::mt19937_64 rng(o.seed_set ? o.seed : 11);
  std::normal_distribution<double> normal;
  std::printf("%8s %14s %14s %12s\n", "m", "direct_ms", "fft_ms", "max_diff");
  for (std::size_t m : o.sizes) {
    harness::ArchConfig arch;
    const auto model = harness::build_model(arch, m, 0.02, rng(), MatrixXd());
    std::vector<double> u(m);
    for (double& v : u) v = 0.1 * normal(rng);
    auto time = [&](bool fast, VectorXd& out) {
      const int reps = m <= 1024 ? 5 : 1;
      double best = 1e300;
      for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        out = ops::causality_forward_all(std::get<ops::CausalityModel>(model), u, fast);
        best = std::min(best, std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
      }
      return best;
    };
    VectorXd a, b;
    const double td = time(false, a), tf = time(true, b);
    double diff = 0.0;
    for (std::size_t i = 0; i < m; ++i) diff = std::max(diff, std::abs(a[Eigen::Index(i)] - b[Eigen::Index(i)]));
    std::printf("%8zu %14.3f %14.3f %12.3e\n", m, td, tf, diff);
  }
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Causal operator networks for seismic response: data generation, training and evaluation"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* sub, bool config, bool data, bool model) {
    if (config) sub->add_option("--config", o.configs, "Experiment YAML (repeatable for compare)")->check(CLI::ExistingFile);
    if (data) sub->add_option("--data", o.data, "Dataset directory");
    if (model) sub->add_option("--model", o.model, "Model file")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--seed", o.seed, "Seed override")->each([&](const std::string&) { o.seed_set = true; });
    sub->add_option("--threads", o.threads, "Worker threads for data generation")->check(CLI::PositiveNumber);
  };
  auto* gen = app.add_subcommand("gen", "Synthesise ground motions and solve the responses");
  common(gen, true, true, false);
  auto* train = app.add_subcommand("train", "Train an operator network");
  common(train, true, true, false);
  train->add_flag("-v,--verbose", o.verbose, "Progress to stderr");
  auto* eval = app.add_subcommand("eval", "Evaluate a saved model on a dataset");
  common(eval, false, true, true);
  auto* compare = app.add_subcommand("compare", "Run or collect several experiments into one table");
  common(compare, true, false, false);
  compare->add_flag("-v,--verbose", o.verbose, "Progress to stderr");
  auto* grad = app.add_subcommand("grad-check", "Analytic vs finite-difference gradients for every activation");
  common(grad, false, false, false);
  auto* bench = app.add_subcommand("bench-fft", "Direct vs FFT causality evaluation timings");
  common(bench, false, false, false);
  bench->add_option("--m", o.sizes, "Signal lengths");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? ok : config_error;
  }

  try {
    if (*gen) return cmd_gen(o);
    if (*train) return cmd_train(o);
    if (*eval) return cmd_eval(o);
    if (*compare) return cmd_compare(o);
    if (*grad) return cmd_grad_check(o);
    if (*bench) return cmd_bench_fft(o);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return internal;
  }
  return ok;
}
