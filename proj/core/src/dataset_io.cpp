#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "causalop/error.hpp"
#include "causalop/signalgen.hpp"
#include "causalop/textio.hpp"

namespace causalop::signalgen {

namespace fs = std::filesystem;

namespace {

void write_rows(const std::vector<Signal>& rows, const fs::path& file) {
  std::ofstream out(file, std::ios::binary);
  require(bool(out), Errc::io, "cannot write " + file.string());
  for (std::size_t l = 0; l < rows.size(); ++l) {
    out << l;
    for (double v : rows[l].samples) out << ',' << textio::format(v);
    out << '\n';
  }
  require(bool(out), Errc::io, "write failed for " + file.string());
}

std::vector<Signal> read_rows(const fs::path& file, std::size_t count, std::size_t m, double dt,
                              const std::string& units) {
  std::ifstream in(file, std::ios::binary);
  require(bool(in), Errc::io, "cannot read " + file.string());
  std::vector<Signal> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto fields = textio::split(line);
    const double id = textio::parse_double(fields[0]);
    require(id == double(rows.size()), Errc::malformed,
            file.filename().string() + ": row ids must run 0, 1, 2, ...");
    require(fields.size() == m + 1, Errc::length_mismatch,
            file.filename().string() + " row " + std::to_string(rows.size()) + " has " +
                std::to_string(fields.size() - 1) + " values, expected " + std::to_string(m));
    std::vector<double> values(m);
    for (std::size_t j = 0; j < m; ++j) {
      values[j] = textio::parse_double(fields[j + 1]);
      require(std::isfinite(values[j]), Errc::non_finite,
              file.filename().string() + " row " + std::to_string(rows.size()) + " column " + std::to_string(j));
    }
    rows.emplace_back(dt, std::move(values), units);
  }
  require(rows.size() == count, Errc::length_mismatch,
          file.filename().string() + " has " + std::to_string(rows.size()) + " rows, meta says " +
              std::to_string(count));
  return rows;
}

}  // namespace

void save_dataset(const ResponseDataset& dataset, const fs::path& dir) {
  dataset.validate();
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec, Errc::io, "cannot create " + dir.string());

  std::ofstream meta(dir / "meta");
  require(bool(meta), Errc::io, "cannot write meta");
  meta << "format=causalop-dataset-1\n"
       << "dt=" << textio::format(dataset.dt) << '\n'
       << "m=" << dataset.m << '\n'
       << "count=" << dataset.size() << '\n'
       << "system=" << dataset.meta.system_id << '\n'
       << "solver=" << dataset.meta.solver << '\n'
       << "seed=" << dataset.meta.seed << '\n'
       << "input_units=" << dataset.meta.input_units << '\n'
       << "output_units=" << dataset.meta.output_units << '\n';
  require(bool(meta), Errc::io, "write failed for meta");
  write_rows(dataset.inputs, dir / "inputs.csv");
  write_rows(dataset.outputs, dir / "outputs.csv");
}

ResponseDataset load_dataset(const fs::path& dir) {
  std::ifstream in(dir / "meta");
  require(bool(in), Errc::io, "cannot read " + (dir / "meta").string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, Errc::malformed, "meta line without '=': " + line);
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto get = [&](const std::string& key) -> const std::string& {
    const auto it = kv.find(key);
    require(it != kv.end(), Errc::malformed, "meta is missing '" + key + "'");
    return it->second;
  };
  auto get_count = [&](const std::string& key) {
    const double v = textio::parse_double(get(key));
    require(v >= 0.0 && v == std::floor(v), Errc::malformed, "meta '" + key + "' must be a count");
    return static_cast<std::size_t>(v);
  };
  require(get("format") == "causalop-dataset-1", Errc::malformed, "unknown dataset format");

  ResponseDataset ds;
  ds.dt = textio::parse_double(get("dt"));
  require(std::isfinite(ds.dt) && ds.dt > 0.0, Errc::malformed, "meta dt must be positive");
  ds.m = get_count("m");
  const std::size_t count = get_count("count");
  ds.meta.system_id = get("system");
  ds.meta.solver = get("solver");
  const auto& seed = get("seed");
  const auto [end, ec] = std::from_chars(seed.data(), seed.data() + seed.size(), ds.meta.seed);
  require(ec == std::errc() && end == seed.data() + seed.size(), Errc::malformed, "meta seed must be an integer");
  ds.meta.input_units = get("input_units");
  ds.meta.output_units = get("output_units");

  ds.inputs = read_rows(dir / "inputs.csv", count, ds.m, ds.dt, ds.meta.input_units);
  ds.outputs = read_rows(dir / "outputs.csv", count, ds.m, ds.dt, ds.meta.output_units);
  ds.validate();
  return ds;
}

void write_stats_csv(const CorpusStats& stats, const fs::path& file) {
  std::ofstream out(file);
  require(bool(out), Errc::io, "cannot write " + file.string());
  out << "quantity,min,max,mean,sd\n";
  const std::pair<const char*, const Summary*> rows[] = {
      {"pga", &stats.pga}, {"max", &stats.max_value}, {"min", &stats.min_value}, {"energy", &stats.energy}};
  for (const auto& [name, s] : rows)
    out << name << ',' << textio::format(s->min) << ',' << textio::format(s->max) << ',' << textio::format(s->mean)
        << ',' << textio::format(s->sd) << '\n';
}

}  // namespace causalop::signalgen
