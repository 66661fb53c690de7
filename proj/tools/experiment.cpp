#include "experiment.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "causalop/error.hpp"
#include "causalop/textio.hpp"

namespace causalop::experiment {

namespace {

using textio::format;

void allow_keys(const YAML::Node& node, const std::string& where, std::set<std::string> keys) {
  require(node.IsMap(), Errc::config, where + " must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    require(keys.count(key) > 0, Errc::config, "unknown key '" + key + "' in " + where);
  }
}

template <class T>
T get(const YAML::Node& node, const char* key, const std::string& where, T fallback) {
  if (!node || !node[key]) return fallback;
  try {
    return node[key].as<T>();
  } catch (const YAML::Exception&) {
    fail(Errc::config, where + "." + key + " has the wrong type");
  }
}

std::vector<int> int_list(const YAML::Node& node, const char* key, const std::string& where, std::vector<int> fallback) {
  fallback = get(node, key, where, fallback);
  for (int w : fallback) require(w >= 1, Errc::config, where + "." + key + " entries must be positive");
  return fallback;
}

std::string list_text(const std::vector<int>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
  return s + "]";
}

std::string dims_text(int in, const std::vector<int>& hidden, int out) {
  std::string s = std::to_string(in);
  for (int h : hidden) s += "-" + std::to_string(h);
  return s + "-" + std::to_string(out);
}

std::uint64_t record_seed(std::uint64_t base, std::size_t index) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::size_t ExperimentConfig::m() const {
  const double steps = signals.duration / signals.dt;
  return std::size_t(std::llround(steps));
}

void ExperimentConfig::validate() const {
  require(!system.empty(), Errc::config, "system path is required");
  require(signals.dt > 0.0 && signals.duration > 0.0, Errc::config, "signals.dt and signals.duration must be positive");
  const double steps = signals.duration / signals.dt;
  require(std::abs(steps - std::round(steps)) <= 1e-9 * std::max(1.0, steps) && steps >= 2.0, Errc::config,
          "signals.duration / signals.dt must be an integer sample count >= 2");
  require(signals.band.low > 0.0 && signals.band.low < signals.band.high && signals.band.high < 0.5 / signals.dt,
          Errc::config, "signals.band must satisfy 0 < low < high < Nyquist");
  require(signals.pga_min > 0.0 && signals.pga_min <= signals.pga_max, Errc::config,
          "signals.pga needs 0 < min <= max");
  require(train_count <= signals.count, Errc::config, "split.train exceeds signals.count");
  require(dof >= 0, Errc::config, "output.dof must be non-negative");
  input_scale(signals.input_units);
  output_scale(output_units);
  training.validate();
}

double input_scale(const std::string& units) {
  if (units == "g") return 1.0 / 9.80665;
  if (units == "m/s^2") return 1.0;
  fail(Errc::config, "input units must be 'g' or 'm/s^2', got '" + units + "'");
}

double output_scale(const std::string& units) {
  if (units == "m") return 1.0;
  if (units == "cm") return 100.0;
  if (units == "mm") return 1000.0;
  fail(Errc::config, "output units must be m, cm or mm, got '" + units + "'");
}

ExperimentConfig parse_experiment(const std::string& yaml, const fs::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml);
  } catch (const YAML::Exception& e) {
    fail(Errc::config, std::string("config is not valid YAML: ") + e.what());
  }
  allow_keys(root, "config", {"name", "system", "signals", "solver", "output", "split", "architecture", "training", "out"});
  ExperimentConfig c;
  c.name = get(root, "name", "config", c.name);
  require(root["system"].IsDefined(), Errc::config, "config.system is required");
  c.system = get<std::string>(root, "system", "config", "");
  if (c.system.is_relative()) c.system = (base_dir / c.system).lexically_normal();
  c.out = get<std::string>(root, "out", "config", c.out.string());
  if (c.out.is_relative()) c.out = (base_dir / c.out).lexically_normal();
  c.solver = signalgen::parse_solver(get<std::string>(root, "solver", "config", "duhamel"));

  if (auto s = root["signals"]) {
    allow_keys(s, "signals", {"count", "duration", "dt", "band", "pga", "seed", "input_units"});
    auto& b = c.signals;
    b.count = get(s, "count", "signals", b.count);
    b.duration = get(s, "duration", "signals", b.duration);
    b.dt = get(s, "dt", "signals", b.dt);
    auto band = get(s, "band", "signals", std::vector<double>{b.band.low, b.band.high});
    require(band.size() == 2, Errc::config, "signals.band must be [low, high]");
    b.band = {band[0], band[1]};
    if (auto p = s["pga"]) {
      allow_keys(p, "signals.pga", {"min", "max"});
      b.pga_min = get(p, "min", "signals.pga", b.pga_min);
      b.pga_max = get(p, "max", "signals.pga", b.pga_max);
    }
    b.seed = get(s, "seed", "signals", b.seed);
    b.input_units = get(s, "input_units", "signals", b.input_units);
  }
  if (auto o = root["output"]) {
    allow_keys(o, "output", {"dof", "units"});
    c.dof = get(o, "dof", "output", c.dof);
    c.output_units = get(o, "units", "output", c.output_units);
  }
  c.train_count = std::min(c.train_count, c.signals.count);
  if (auto s = root["split"]) {
    allow_keys(s, "split", {"train"});
    c.train_count = get(s, "train", "split", c.train_count);
  }

  auto& t = c.training;
  if (auto a = root["architecture"]) {
    allow_keys(a, "architecture",
               {"tag", "branch_hidden", "trunk_hidden", "width", "activation", "pod_modes", "scales", "output_bias"});
    auto& m = t.model;
    m.arch = ops::parse_arch(get<std::string>(a, "tag", "architecture", ops::to_string(m.arch)));
    m.branch_hidden = int_list(a, "branch_hidden", "architecture", m.branch_hidden);
    m.trunk_hidden = int_list(a, "trunk_hidden", "architecture", m.trunk_hidden);
    m.width = get(a, "width", "architecture", m.width);
    m.activation = nn::parse_activation(get<std::string>(a, "activation", "architecture", to_string(m.activation)));
    m.pod_modes = get(a, "pod_modes", "architecture", m.pod_modes);
    m.scales = get(a, "scales", "architecture", m.scales);
    m.output_bias = get(a, "output_bias", "architecture", m.output_bias);
  }
  if (auto r = root["training"]) {
    allow_keys(r, "training",
               {"epochs", "loss", "schedule", "seed", "normalization", "time_batch", "include_ic_pair", "eval_every",
                "l2", "dropout", "adam"});
    t.epochs = get(r, "epochs", "training", t.epochs);
    t.loss = harness::parse_loss(get<std::string>(r, "loss", "training", to_string(t.loss)));
    if (r["schedule"]) {
      t.schedule.segments.clear();
      for (const auto& seg : r["schedule"]) {
        require(seg.IsSequence() && seg.size() == 2, Errc::config, "training.schedule entries are [epoch, rate]");
        try {
          t.schedule.segments.emplace_back(seg[0].as<long>(), seg[1].as<double>());
        } catch (const YAML::Exception&) {
          fail(Errc::config, "training.schedule entries are [epoch, rate]");
        }
      }
    }
    t.seed = get(r, "seed", "training", t.seed);
    t.normalization = harness::parse_normalization(get<std::string>(r, "normalization", "training", "none"));
    t.time_batch = get(r, "time_batch", "training", t.time_batch);
    t.include_ic_pair = get(r, "include_ic_pair", "training", t.include_ic_pair);
    t.eval_every = get(r, "eval_every", "training", t.eval_every);
    if (auto l2 = r["l2"]) {
      allow_keys(l2, "training.l2", {"branch", "trunk"});
      t.reg.l2_branch = get(l2, "branch", "training.l2", 0.0);
      t.reg.l2_trunk = get(l2, "trunk", "training.l2", 0.0);
    }
    if (auto d = r["dropout"]) {
      allow_keys(d, "training.dropout", {"branch", "trunk"});
      t.reg.dropout_branch = get(d, "branch", "training.dropout", 0.0);
      t.reg.dropout_trunk = get(d, "trunk", "training.dropout", 0.0);
    }
    if (auto ad = r["adam"]) {
      allow_keys(ad, "training.adam", {"beta1", "beta2", "epsilon"});
      t.adam.beta1 = get(ad, "beta1", "training.adam", t.adam.beta1);
      t.adam.beta2 = get(ad, "beta2", "training.adam", t.adam.beta2);
      t.adam.epsilon = get(ad, "epsilon", "training.adam", t.adam.epsilon);
    }
  }
  c.validate();
  return c;
}

ExperimentConfig load_experiment(const fs::path& file) {
  std::ifstream in(file);
  require(bool(in), Errc::config, "cannot read config " + file.string());
  std::stringstream text;
  text << in.rdbuf();
  return parse_experiment(text.str(), file.parent_path().empty() ? fs::path(".") : file.parent_path());
}

std::string resolved_yaml(const ExperimentConfig& c) {
  const auto& s = c.signals;
  const auto& t = c.training;
  const auto& m = t.model;
  std::ostringstream y;
  y << "name: " << c.name << "\n"
    << "system: " << fs::absolute(c.system).lexically_normal().string() << "\n"
    << "out: " << fs::absolute(c.out).lexically_normal().string() << "\n"
    << "solver: " << signalgen::to_string(c.solver) << "\n"
    << "signals:\n"
    << "  count: " << s.count << "\n"
    << "  duration: " << format(s.duration) << "\n"
    << "  dt: " << format(s.dt) << "\n"
    << "  band: [" << format(s.band.low) << ", " << format(s.band.high) << "]\n"
    << "  pga: {min: " << format(s.pga_min) << ", max: " << format(s.pga_max) << "}\n"
    << "  seed: " << s.seed << "\n"
    << "  input_units: " << s.input_units << "\n"
    << "output: {dof: " << c.dof << ", units: " << c.output_units << "}\n"
    << "split: {train: " << c.train_count << "}\n"
    << "architecture:\n"
    << "  tag: " << ops::to_string(m.arch) << "\n"
    << "  branch_hidden: " << list_text(m.branch_hidden) << "\n"
    << "  trunk_hidden: " << list_text(m.trunk_hidden) << "\n"
    << "  width: " << m.width << "\n"
    << "  activation: " << to_string(m.activation) << "\n"
    << "  pod_modes: " << m.pod_modes << "\n"
    << "  scales: [";
  for (std::size_t i = 0; i < m.scales.size(); ++i) y << (i ? ", " : "") << format(m.scales[i]);
  y << "]\n"
    << "  output_bias: " << (m.output_bias ? "true" : "false") << "\n"
    << "training:\n"
    << "  epochs: " << t.epochs << "\n"
    << "  loss: " << to_string(t.loss) << "\n"
    << "  schedule: [";
  for (std::size_t i = 0; i < t.schedule.segments.size(); ++i)
    y << (i ? ", " : "") << "[" << t.schedule.segments[i].first << ", " << format(t.schedule.segments[i].second) << "]";
  y << "]\n"
    << "  seed: " << t.seed << "\n"
    << "  normalization: " << to_string(t.normalization) << "\n"
    << "  time_batch: " << t.time_batch << "\n"
    << "  include_ic_pair: " << (t.include_ic_pair ? "true" : "false") << "\n"
    << "  eval_every: " << t.eval_every << "\n"
    << "  l2: {branch: " << format(t.reg.l2_branch) << ", trunk: " << format(t.reg.l2_trunk) << "}\n"
    << "  dropout: {branch: " << format(t.reg.dropout_branch) << ", trunk: " << format(t.reg.dropout_trunk) << "}\n"
    << "  adam: {beta1: " << format(t.adam.beta1) << ", beta2: " << format(t.adam.beta2)
    << ", epsilon: " << format(t.adam.epsilon) << "}\n";
  return y.str();
}

Split generate(const ExperimentConfig& c, int threads) {
  c.validate();
  const auto def = lindyn::load_system(c.system);
  require(c.dof < def.system.dofs(), Errc::config, "output.dof is outside the system");
  std::mt19937_64 rng(c.signals.seed);
  std::uniform_real_distribution<double> pga(c.signals.pga_min, c.signals.pga_max);
  std::vector<Signal> motions;
  motions.reserve(c.signals.count);
  for (std::size_t l = 0; l < c.signals.count; ++l) {
    const double target = pga(rng);
    motions.push_back(signalgen::synth_ground_motion(record_seed(c.signals.seed, l), c.signals.duration, c.signals.dt,
                                                     c.signals.band, target));
  }
  signalgen::BuildOptions opt;
  opt.solver = c.solver;
  opt.dof = c.dof;
  opt.output_scale = output_scale(c.output_units);
  opt.output_units = c.output_units;
  opt.input_scale = input_scale(c.signals.input_units);
  opt.input_units = c.signals.input_units;
  opt.threads = threads;
  auto all = signalgen::build_dataset(def, std::move(motions), opt);
  all.meta.system_id = c.system.stem().string();
  all.meta.seed = c.signals.seed;
  if (all.size() == 0) {
    all.dt = c.signals.dt;
    all.m = c.m();
    all.meta.input_units = c.signals.input_units;
  }

  std::vector<std::size_t> train_rows(c.train_count), test_rows(c.test_count());
  for (std::size_t i = 0; i < train_rows.size(); ++i) train_rows[i] = i;
  for (std::size_t i = 0; i < test_rows.size(); ++i) test_rows[i] = c.train_count + i;
  return {all.subset(train_rows), all.subset(test_rows)};
}

void save_split(const Split& split, const fs::path& dir) {
  fs::create_directories(dir);
  signalgen::save_dataset(split.train, dir / "train");
  signalgen::save_dataset(split.test, dir / "test");
  for (const auto& [ds, name] : {std::pair{&split.train, "stats.csv"}, std::pair{&split.test, "stats_test.csv"}}) {
    if (ds->size()) {
      signalgen::write_stats_csv(signalgen::compute_stats(ds->inputs), dir / name);
    } else {
      std::ofstream(dir / name) << "quantity,min,max,mean,sd\n";
    }
  }
}

Split load_split(const fs::path& dir) {
  require(fs::is_directory(dir / "train"), Errc::io, "no training set under " + dir.string());
  Split s;
  s.train = signalgen::load_dataset(dir / "train");
  if (fs::is_directory(dir / "test")) s.test = signalgen::load_dataset(dir / "test");
  return s;
}

Summary summarize(const ExperimentConfig& c, const harness::TrainResult& r) {
  const auto& m = c.training.model;
  const int sensors = int(ops::sensor_count(r.model.model));
  const int out = m.arch == ops::Arch::pod ? int(std::get<ops::PodDeepOnetModel>(r.model.model).basis.rows()) : m.width;
  Summary s;
  s.name = c.name;
  s.arch = ops::to_string(m.arch);
  s.branch = dims_text(sensors, m.branch_hidden, out);
  s.trunk = m.arch == ops::Arch::pod ? "pod" : dims_text(1, m.trunk_hidden, m.width);
  s.activation = to_string(m.activation);
  s.loss = to_string(c.training.loss);
  s.train_samples = std::size_t(r.history.final_train_rel_l2.size());
  s.test_samples = std::size_t(r.history.final_test_rel_l2.size());
  s.parameters = ops::parameter_count(r.model.model);
  s.train_rel_l2 = r.history.final_train_mean();
  s.test_rel_l2 = r.history.final_test_mean();
  s.best_test_rel_l2 = r.history.best_test_rel_l2;
  s.best_epoch = r.history.best_epoch;
  s.seconds = r.history.seconds;
  return s;
}

std::string summary_header() {
  return "name,arch,branch,trunk,activation,loss,train_samples,test_samples,parameters,train_rel_l2,test_rel_l2,"
         "best_test_rel_l2,best_epoch,seconds";
}

std::string summary_row(const Summary& s) {
  auto num = [](double v) { return std::isnan(v) ? std::string() : format(v); };
  std::ostringstream o;
  o << s.name << ',' << s.arch << ',' << s.branch << ',' << s.trunk << ',' << s.activation << ',' << s.loss << ','
    << s.train_samples << ',' << s.test_samples << ',' << s.parameters << ',' << num(s.train_rel_l2) << ','
    << num(s.test_rel_l2) << ',' << num(s.best_test_rel_l2) << ',' << s.best_epoch << ',' << num(s.seconds);
  return o.str();
}

void write_summaries(const std::vector<Summary>& rows, const fs::path& file) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file);
  require(bool(out), Errc::io, "cannot write " + file.string());
  out << summary_header() << '\n';
  for (const auto& r : rows) out << summary_row(r) << '\n';
}

std::vector<Summary> read_summaries(const fs::path& file) {
  std::ifstream in(file);
  require(bool(in), Errc::io, "cannot read " + file.string());
  std::string line;
  std::getline(in, line);
  require(line == summary_header(), Errc::malformed, file.string() + " has an unexpected header");
  std::vector<Summary> rows;
  auto num = [](std::string_view f) {
    return f.empty() ? std::numeric_limits<double>::quiet_NaN() : textio::parse_double(f);
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = textio::split(line, ',');
    require(f.size() == 14, Errc::malformed, file.string() + ": expected 14 fields");
    Summary s;
    s.name = f[0];
    s.arch = f[1];
    s.branch = f[2];
    s.trunk = f[3];
    s.activation = f[4];
    s.loss = f[5];
    s.train_samples = std::size_t(num(f[6]));
    s.test_samples = std::size_t(num(f[7]));
    s.parameters = std::size_t(num(f[8]));
    s.train_rel_l2 = num(f[9]);
    s.test_rel_l2 = num(f[10]);
    s.best_test_rel_l2 = num(f[11]);
    s.best_epoch = long(num(f[12]));
    s.seconds = num(f[13]);
    rows.push_back(std::move(s));
  }
  return rows;
}

}  // namespace causalop::experiment
