#include "causalop/model_io.hpp"


#include "causalop/checkpoint.hpp"
#include "causalop/error.hpp"

namespace causalop::io {

namespace {

constexpr std::string_view kMagic{"CAUSOPM\0", 8};
constexpr std::uint32_t kVersion = 1;

void write_vector(ckpt::Writer& w, const VectorXd& v) { w.f64s(v.data(), std::size_t(v.size())); }

VectorXd read_vector(ckpt::Reader& r, std::size_t n) {
  VectorXd v(static_cast<Eigen::Index>(n));
  r.f64s(v.data(), n);
  return v;
}

std::size_t read_count(ckpt::Reader& r, std::size_t limit, const char* what) {
  const std::uint64_t n = r.u64();
  require(n <= limit, Errc::malformed, std::string("implausible ") + what);
  return std::size_t(n);
}

}  // namespace

MatrixXd Normalizer::apply(const MatrixXd& rows) const {
  require(rows.cols() == mean.size(), Errc::dimension_mismatch, "normaliser length differs from signal length");
  return (rows.rowwise() - mean.transpose()).array().rowwise() / sd.transpose().array();
}

MatrixXd Normalizer::invert(const MatrixXd& rows) const {
  require(rows.cols() == mean.size(), Errc::dimension_mismatch, "normaliser length differs from signal length");
  return (rows.array().rowwise() * sd.transpose().array()).matrix().rowwise() + mean.transpose();
}

std::string encode(const SavedModel& saved) {
  ckpt::Writer w;
  w.raw(kMagic);
  w.u32(kVersion);
  const auto arch = ops::arch_of(saved.model);
  w.u32(static_cast<std::uint32_t>(arch));
  w.f64(ops::model_dt(saved.model));
  const std::size_t m = ops::sensor_count(saved.model);
  w.u64(m);

  if (const auto* d = std::get_if<ops::DeepOnetModel>(&saved.model)) {
    ckpt::write_mlp(w, d->branch);
    ckpt::write_mlp(w, d->trunk);
    w.u32(d->use_output_bias ? 1 : 0);
    w.f64(d->output_bias);
  } else if (const auto* p = std::get_if<ops::PodDeepOnetModel>(&saved.model)) {
    ckpt::write_mlp(w, p->branch);
    w.u64(std::uint64_t(p->basis.rows()));
    for (Eigen::Index r = 0; r < p->basis.rows(); ++r)
      for (Eigen::Index c = 0; c < p->basis.cols(); ++c) w.f64(p->basis(r, c));
    write_vector(w, p->mean);
  } else if (const auto* ms = std::get_if<ops::MsDeepOnetModel>(&saved.model)) {
    ckpt::write_mlp(w, ms->branch);
    w.u64(ms->trunk.subnets.size());
    for (std::size_t i = 0; i < ms->trunk.subnets.size(); ++i) {
      w.f64(ms->trunk.scales[i]);
      w.f64(ms->trunk.combo[i]);
      ckpt::write_mlp(w, ms->trunk.subnets[i]);
    }
  } else {
    const auto& c = std::get<ops::CausalityModel>(saved.model);
    ckpt::write_mlp(w, c.branch);
    ckpt::write_mlp(w, c.trunk);
  }

  w.u32(saved.input_norm ? 1 : 0);
  if (saved.input_norm) {
    require(std::size_t(saved.input_norm->mean.size()) == m && std::size_t(saved.input_norm->sd.size()) == m,
            Errc::dimension_mismatch, "normaliser length differs from model");
    write_vector(w, saved.input_norm->mean);
    write_vector(w, saved.input_norm->sd);
  }
  return w.finish();
}

SavedModel decode(std::string bytes) {
  ckpt::Reader r(std::move(bytes));
  require(r.raw(kMagic.size()) == kMagic, Errc::malformed, "not a model file");
  require(r.u32() == kVersion, Errc::malformed, "unsupported model file version");
  const std::uint32_t tag = r.u32();
  require(tag <= static_cast<std::uint32_t>(ops::Arch::causality_noconv), Errc::malformed, "unknown architecture tag");
  const auto arch = static_cast<ops::Arch>(tag);
  const double dt = r.f64();
  const std::size_t m = read_count(r, std::size_t(1) << 26, "sample count");

  SavedModel saved;
  switch (arch) {
    case ops::Arch::deeponet: {
      ops::DeepOnetModel d;
      d.branch = ckpt::read_mlp(r);
      d.trunk = ckpt::read_mlp(r);
      d.use_output_bias = r.u32() != 0;
      d.output_bias = r.f64();
      d.dt = dt;
      d.m = m;
      saved.model = std::move(d);
      break;
    }
    case ops::Arch::pod: {
      ops::PodDeepOnetModel p;
      p.branch = ckpt::read_mlp(r);
      const std::size_t count = read_count(r, m, "POD basis count");
      p.basis.resize(Eigen::Index(count), Eigen::Index(m));
      for (Eigen::Index row = 0; row < p.basis.rows(); ++row)
        for (Eigen::Index c = 0; c < p.basis.cols(); ++c) p.basis(row, c) = r.f64();
      p.mean = read_vector(r, m);
      p.dt = dt;
      saved.model = std::move(p);
      break;
    }
    case ops::Arch::msdeeponet: {
      ops::MsDeepOnetModel ms;
      ms.branch = ckpt::read_mlp(r);
      const std::size_t count = read_count(r, 4096, "subnet count");
      for (std::size_t i = 0; i < count; ++i) {
        ms.trunk.scales.push_back(r.f64());
        ms.trunk.combo.push_back(r.f64());
        ms.trunk.subnets.push_back(ckpt::read_mlp(r));
      }
      ms.dt = dt;
      ms.m = m;
      saved.model = std::move(ms);
      break;
    }
    case ops::Arch::causality:
    case ops::Arch::causality_noconv: {
      ops::CausalityModel c;
      c.branch = ckpt::read_mlp(r);
      c.trunk = ckpt::read_mlp(r);
      c.convolutional = arch == ops::Arch::causality;
      c.dt = dt;
      c.m = m;
      saved.model = std::move(c);
      break;
    }
  }
  if (r.u32() != 0) saved.input_norm = Normalizer{read_vector(r, m), read_vector(r, m)};
  require(r.done(), Errc::malformed, "trailing bytes in model file");
  return saved;
}

void save_model(const SavedModel& saved, const std::filesystem::path& file) { ckpt::write_file(file, encode(saved)); }
SavedModel load_model(const std::filesystem::path& file) { return decode(ckpt::read_file(file)); }

}  // namespace causalop::io
