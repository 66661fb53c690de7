#include "causalop/operators.hpp"

#include <algorithm>
#include <cmath>

#include "causalop/error.hpp"
#include "causalop/fft.hpp"
#include "causalop/linalg.hpp"

namespace causalop::ops {

using fft::cplx;
using Eigen::Index;
using Eigen::RowVectorXd;

std::string to_string(Arch a) {
  switch (a) {
    case Arch::deeponet: return "deeponet";
    case Arch::pod: return "pod";
    case Arch::msdeeponet: return "msdeeponet";
    case Arch::causality: return "causality";
    case Arch::causality_noconv: return "causality_noconv";
  }
  return "deeponet";
}

Arch parse_arch(const std::string& name) {
  for (auto a : {Arch::deeponet, Arch::pod, Arch::msdeeponet, Arch::causality, Arch::causality_noconv})
    if (to_string(a) == name) return a;
  fail(Errc::config, "unknown architecture '" + name + "'");
}

namespace {

template <class... F>
struct overloaded : F... {
  using F::operator()...;
};
template <class... F>
overloaded(F...) -> overloaded<F...>;

RowVectorXd time_grid(std::size_t m, double dt, double offset, double divisor) {
  RowVectorXd t(static_cast<Index>(m));
  for (std::size_t j = 0; j < m; ++j) t[Index(j)] = (double(j) + offset) * dt / divisor;
  return t;
}

double ms_divisor(const MsDeepOnetModel& model) {
  return model.m > 1 ? double(model.m - 1) * model.dt : 1.0;
}

void check_signal(std::span<const double> samples, std::size_t m) {
  require(samples.size() == m, Errc::length_mismatch,
          "signal has " + std::to_string(samples.size()) + " samples, model expects " + std::to_string(m));
}

VectorXd as_vector(std::span<const double> s) {
  return Eigen::Map<const VectorXd>(s.data(), Index(s.size()));
}

VectorXd run(const Mlp& net, const VectorXd& x, const nn::Dropout& dropout) {
  if (dropout.rate == 0.0) return nn::forward(net, x);
  nn::Cache cache;
  return nn::forward(net, MatrixXd(x), dropout, cache).col(0);
}

// Spectra of the signals (FFT length >= 2m) for the convolutional first layer.
struct SignalSpectra {
  std::unique_ptr<fft::Plan> plan;
  std::vector<std::vector<cplx>> spectra;
  std::vector<char> nonzero;
  std::size_t m = 0;

  SignalSpectra() = default;
  SignalSpectra(const MatrixXd& inputs) : m(std::size_t(inputs.rows())) {
    plan = std::make_unique<fft::Plan>(fft::next_pow2(2 * m));
    const auto n = std::size_t(inputs.cols());
    spectra.resize(n);
    nonzero.assign(n, 0);
    for (std::size_t s = 0; s < n; ++s) {
      nonzero[s] = inputs.col(Index(s)).cwiseAbs().maxCoeff() > 0.0;
      if (nonzero[s]) spectra[s] = fft::real_spectrum(*plan, {inputs.col(Index(s)).data(), m});
    }
  }
};

// z(r, s*m + i) = sum_k W0(r, L + k) u_s[k] with L = m - 1 - i.
MatrixXd conv_first_linear(const MatrixXd& w0, const SignalSpectra& sig) {
  const std::size_t m = sig.m;
  const Index h = w0.rows();
  const std::size_t n = sig.spectra.size();
  const std::size_t nfft = sig.plan->size();
  MatrixXd z = MatrixXd::Zero(h, Index(m * n));
  const MatrixXd wt = w0.transpose();  // rows of W0 as contiguous columns

  std::vector<std::vector<cplx>> rows(static_cast<std::size_t>(h));
  const std::vector<double> none;
  for (Index r = 0; r < h; r += 2) {
    std::span<const double> a(wt.col(r).data(), m);
    std::span<const double> b = r + 1 < h ? std::span<const double>(wt.col(r + 1).data(), m) : std::span<const double>(none);
    std::vector<cplx> sb;
    fft::real_spectrum_pair(*sig.plan, a, b, rows[std::size_t(r)], sb);
    if (r + 1 < h) rows[std::size_t(r + 1)] = std::move(sb);
  }

  std::vector<cplx> pa(nfft), pb(nfft), scratch;
  std::vector<double> ca(m), cb(m);
  for (std::size_t s = 0; s < n; ++s) {
    if (!sig.nonzero[s]) continue;
    const auto& u = sig.spectra[s];
    for (Index r = 0; r < h; r += 2) {
      const bool pair = r + 1 < h;
      const auto& ra = rows[std::size_t(r)];
      for (std::size_t k = 0; k < nfft; ++k) pa[k] = fft::mul_conj(ra[k], u[k]);
      if (pair) {
        const auto& rb = rows[std::size_t(r + 1)];
        for (std::size_t k = 0; k < nfft; ++k) pb[k] = fft::mul_conj(rb[k], u[k]);
      } else {
        std::fill(pb.begin(), pb.end(), cplx(0.0));
      }
      fft::real_inverse_pair(*sig.plan, pa, pb, ca, cb, scratch);
      const Index base = Index(s * m);
      for (std::size_t i = 0; i < m; ++i) {
        z(r, base + Index(i)) = ca[m - 1 - i];
        if (pair) z(r + 1, base + Index(i)) = cb[m - 1 - i];
      }
    }
  }
  return z;
}

// dW0(r, q) += sum_s sum_{L <= q} delta(r, s*m + m-1-L) u_s[q - L].
void conv_first_gradient(const MatrixXd& delta, const SignalSpectra& sig, MatrixXd& dw0) {
  const std::size_t m = sig.m;
  const Index h = delta.rows();
  const std::size_t nfft = sig.plan->size();
  std::vector<std::vector<cplx>> acc(std::size_t(h), std::vector<cplx>(nfft, cplx(0.0)));
  std::vector<double> da(m), db(m);
  std::vector<cplx> sa, sb;
  for (std::size_t s = 0; s < sig.spectra.size(); ++s) {
    if (!sig.nonzero[s]) continue;
    const auto& u = sig.spectra[s];
    const Index base = Index(s * m);
    for (Index r = 0; r < h; r += 2) {
      const bool pair = r + 1 < h;
      for (std::size_t l = 0; l < m; ++l) {
        da[l] = delta(r, base + Index(m - 1 - l));
        db[l] = pair ? delta(r + 1, base + Index(m - 1 - l)) : 0.0;
      }
      fft::real_spectrum_pair(*sig.plan, da, db, sa, sb);
      auto& ga = acc[std::size_t(r)];
      for (std::size_t k = 0; k < nfft; ++k) ga[k] += fft::mul(sa[k], u[k]);
      if (pair) {
        auto& gb = acc[std::size_t(r + 1)];
        for (std::size_t k = 0; k < nfft; ++k) gb[k] += fft::mul(sb[k], u[k]);
      }
    }
  }
  std::vector<double> ya(m), yb(m);
  std::vector<cplx> scratch;
  const std::vector<cplx> zeros(nfft, cplx(0.0));
  for (Index r = 0; r < h; r += 2) {
    const bool pair = r + 1 < h;
    fft::real_inverse_pair(*sig.plan, acc[std::size_t(r)], pair ? acc[std::size_t(r + 1)] : zeros, ya, yb, scratch);
    for (std::size_t q = 0; q < m; ++q) {
      dw0(r, Index(q)) += ya[q];
      if (pair) dw0(r + 1, Index(q)) += yb[q];
    }
  }
}

// z(:, s*m + i) = sum_{k <= i} W0(:, k) u_s[k].
MatrixXd noconv_first_linear(const MatrixXd& w0, const MatrixXd& inputs) {
  const Index m = inputs.rows();
  const Index n = inputs.cols();
  MatrixXd z(w0.rows(), m * n);
  for (Index s = 0; s < n; ++s) {
    VectorXd run = VectorXd::Zero(w0.rows());
    for (Index i = 0; i < m; ++i) {
      run += w0.col(i) * inputs(i, s);
      z.col(s * m + i) = run;
    }
  }
  return z;
}

// dW0(:, k) += u_s[k] * sum_{i >= k} delta(:, s*m + i).
void noconv_first_gradient(const MatrixXd& delta, const MatrixXd& inputs, MatrixXd& dw0) {
  const Index m = inputs.rows();
  for (Index s = 0; s < inputs.cols(); ++s) {
    VectorXd suffix = VectorXd::Zero(delta.rows());
    for (Index k = m - 1; k >= 0; --k) {
      suffix += delta.col(s * m + k);
      dw0.col(k) += inputs(k, s) * suffix;
    }
  }
}

// out(j, s) = <branch block s column j, trunk column j>.
MatrixXd paired_dot(const MatrixXd& branch_out, const MatrixXd& trunk_out, Index m, Index n) {
  MatrixXd pred(m, n);
  for (Index s = 0; s < n; ++s)
    pred.col(s) = branch_out.middleCols(s * m, m).cwiseProduct(trunk_out).colwise().sum().transpose();
  return pred;
}

}  // namespace

Arch arch_of(const OperatorModel& model) {
  return std::visit(overloaded{
                        [](const DeepOnetModel&) { return Arch::deeponet; },
                        [](const PodDeepOnetModel&) { return Arch::pod; },
                        [](const MsDeepOnetModel&) { return Arch::msdeeponet; },
                        [](const CausalityModel& c) { return c.convolutional ? Arch::causality : Arch::causality_noconv; },
                    },
                    model);
}

std::size_t sensor_count(const OperatorModel& model) {
  return std::visit(overloaded{
                        [](const PodDeepOnetModel& p) { return std::size_t(p.mean.size()); },
                        [](const auto& other) { return other.m; },
                    },
                    model);
}

double model_dt(const OperatorModel& model) {
  return std::visit([](const auto& mdl) { return mdl.dt; }, model);
}

std::vector<nn::ParamView> param_views(OperatorModel& model) {
  std::vector<nn::ParamView> v;
  std::visit(overloaded{
                 [&](DeepOnetModel& d) {
                   nn::append_views(d.branch, nn::Group::branch, v);
                   nn::append_views(d.trunk, nn::Group::trunk, v);
                   if (d.use_output_bias) v.push_back({&d.output_bias, 1, nn::Group::other, false});
                 },
                 [&](PodDeepOnetModel& p) { nn::append_views(p.branch, nn::Group::branch, v); },
                 [&](MsDeepOnetModel& ms) {
                   nn::append_views(ms.branch, nn::Group::branch, v);
                   for (auto& sub : ms.trunk.subnets) nn::append_views(sub, nn::Group::trunk, v);
                   v.push_back({ms.trunk.combo.data(), ms.trunk.combo.size(), nn::Group::trunk, false});
                 },
                 [&](CausalityModel& c) {
                   nn::append_views(c.branch, nn::Group::branch, v);
                   nn::append_views(c.trunk, nn::Group::trunk, v);
                 },
             },
             model);
  return v;
}

std::size_t parameter_count(const OperatorModel& model) {
  OperatorModel copy = model;
  std::size_t n = 0;
  for (const auto& v : param_views(copy)) n += v.size;
  return n;
}

OperatorModel zeros_like(const OperatorModel& model) {
  OperatorModel z = model;
  for (const auto& v : param_views(z)) std::fill(v.data, v.data + v.size, 0.0);
  return z;
}

double deeponet_forward(const DeepOnetModel& model, std::span<const double> samples, double t,
                        const nn::Dropout& dropout) {
  check_signal(samples, model.m);
  const VectorXd b = run(model.branch, as_vector(samples), dropout);
  const VectorXd tr = nn::forward(model.trunk, VectorXd(VectorXd::Constant(1, t)));
  require(b.size() == tr.size(), Errc::dimension_mismatch, "branch and trunk widths differ");
  return b.dot(tr) + (model.use_output_bias ? model.output_bias : 0.0);
}

PodBasis pod_basis(const MatrixXd& outputs, std::size_t p) {
  const Index n = outputs.rows();
  const Index m = outputs.cols();
  require(p >= 1, Errc::invalid_argument, "POD needs p >= 1");
  require(Index(p) <= n, Errc::invalid_argument,
          "POD asks for " + std::to_string(p) + " modes from " + std::to_string(n) + " trajectories");
  require(n <= m, Errc::invalid_argument, "POD expects no more trajectories than samples");

  PodBasis out;
  out.mean = outputs.colwise().mean().transpose();
  const MatrixXd centred = outputs.rowwise() - out.mean.transpose();
  const auto eig = linalg::jacobi_eigen(centred * centred.transpose());

  out.basis.resize(Index(p), m);
  out.singular_values.resize(Index(p));
  const double top = std::sqrt(std::max(eig.values[n - 1], 0.0));
  for (Index k = 0; k < Index(p); ++k) {
    const Index src = n - 1 - k;
    const double sigma = std::sqrt(std::max(eig.values[src], 0.0));
    require(top > 0.0 && sigma > 1e-7 * top, Errc::rank_deficient,
            "singular value " + std::to_string(k + 1) + " of the centred outputs is zero");
    out.singular_values[k] = sigma;
    out.basis.row(k) = (centred.transpose() * eig.vectors.col(src) / sigma).transpose();
  }
  // One Gram-Schmidt pass restores orthonormality lost in the Gram product.
  for (Index k = 0; k < Index(p); ++k) {
    for (Index j = 0; j < k; ++j) out.basis.row(k) -= out.basis.row(j).dot(out.basis.row(k)) * out.basis.row(j);
    out.basis.row(k).normalize();
    Index arg = 0;
    out.basis.row(k).cwiseAbs().maxCoeff(&arg);
    if (out.basis(k, arg) < 0.0) out.basis.row(k) *= -1.0;
  }
  return out;
}

VectorXd pod_forward(const PodDeepOnetModel& model, std::span<const double> samples, const nn::Dropout& dropout) {
  check_signal(samples, std::size_t(model.mean.size()));
  const VectorXd b = run(model.branch, as_vector(samples), dropout);
  require(b.size() == model.basis.rows(), Errc::dimension_mismatch, "branch width differs from POD basis count");
  return model.mean + model.basis.transpose() * b;
}

VectorXd mstrunk_forward(const MsTrunk& trunk, double t, const nn::Dropout& dropout) {
  require(!trunk.subnets.empty() && trunk.subnets.size() == trunk.scales.size() &&
              trunk.subnets.size() == trunk.combo.size(),
          Errc::dimension_mismatch, "multi-scale trunk lists differ in length");
  VectorXd out = VectorXd::Zero(trunk.subnets[0].output_dim());
  for (std::size_t i = 0; i < trunk.subnets.size(); ++i) {
    nn::Dropout d = dropout;
    d.seed += i;
    out += trunk.combo[i] * run(trunk.subnets[i], VectorXd::Constant(1, trunk.scales[i] * t), d);
  }
  return out;
}

std::vector<double> default_scales(std::size_t count, double span) {
  std::vector<double> s(count, 1.0);
  for (std::size_t i = 1; i < count; ++i) s[i] = 1.0 + double(i) * span / double(count - 1);
  return s;
}

std::vector<double> causal_branch_input(std::span<const double> signal, std::size_t p) {
  const std::size_t m = signal.size();
  require(p <= m, Errc::invalid_argument, "window length exceeds signal length");
  std::vector<double> v(m, 0.0);
  std::copy(signal.begin(), signal.begin() + std::ptrdiff_t(p), v.begin() + std::ptrdiff_t(m - p));
  return v;
}

std::vector<double> noconv_branch_input(std::span<const double> signal, std::size_t p) {
  require(p <= signal.size(), Errc::invalid_argument, "window length exceeds signal length");
  std::vector<double> v(signal.size(), 0.0);
  std::copy(signal.begin(), signal.begin() + std::ptrdiff_t(p), v.begin());
  return v;
}

VectorXd causality_branch_features(const CausalityModel& model, std::span<const double> signal, std::size_t p) {
  check_signal(signal, model.m);
  const auto window = model.convolutional ? causal_branch_input(signal, p) : noconv_branch_input(signal, p);
  return nn::forward(model.branch, as_vector(window));
}

double causality_forward(const CausalityModel& model, std::span<const double> signal, std::size_t p,
                         const nn::Dropout& dropout) {
  check_signal(signal, model.m);
  const auto window = model.convolutional ? causal_branch_input(signal, p) : noconv_branch_input(signal, p);
  const VectorXd b = run(model.branch, as_vector(window), dropout);
  const VectorXd tr = nn::forward(model.trunk, VectorXd(VectorXd::Constant(1, double(p) * model.dt)));
  require(b.size() == tr.size(), Errc::dimension_mismatch, "branch and trunk widths differ");
  return b.dot(tr);
}

VectorXd causality_forward_all(const CausalityModel& model, std::span<const double> signal, bool fast) {
  check_signal(signal, model.m);
  const std::size_t m = model.m;
  if (!fast) {
    VectorXd out(static_cast<Index>(m));
    for (std::size_t p = 1; p <= m; ++p) out[Index(p - 1)] = causality_forward(model, signal, p);
    return out;
  }
  require(model.convolutional, Errc::fast_path_undefined, "the FFT path needs convolutional branch weights");
  const MatrixXd u = as_vector(signal);
  const SignalSpectra sig(u);
  const MatrixXd z = conv_first_linear(model.branch.layers[0].weight, sig);
  nn::Cache cache;
  const MatrixXd b = nn::forward_from_linear(model.branch, z, {}, cache);
  const MatrixXd tr = nn::forward(model.trunk, MatrixXd(time_grid(m, model.dt, 1.0, 1.0)));
  return paired_dot(b, tr, Index(m), 1).col(0);
}

// ---- BatchEngine --------------------------------------------------------

struct BatchEngine::Impl {
  Arch arch;
  MatrixXd inputs;
  Index m = 0, n = 0;
  MatrixXd grid;  // 1 x m trunk inputs
  SignalSpectra spectra;

  nn::Cache branch_cache, trunk_cache;
  std::vector<nn::Cache> sub_caches;
  MatrixXd branch_out, trunk_out;
  std::vector<MatrixXd> sub_out;
  MatrixXd pred;

  Impl(const OperatorModel& model, const MatrixXd& x) : arch(arch_of(model)), inputs(x), m(x.rows()), n(x.cols()) {
    require(std::size_t(m) == sensor_count(model), Errc::dimension_mismatch,
            "inputs have " + std::to_string(m) + " samples, model expects " + std::to_string(sensor_count(model)));
    const double dt = model_dt(model);
    switch (arch) {
      case Arch::deeponet: grid = time_grid(std::size_t(m), dt, 0.0, 1.0); break;
      case Arch::msdeeponet: grid = time_grid(std::size_t(m), dt, 0.0, ms_divisor(std::get<MsDeepOnetModel>(model))); break;
      case Arch::causality:
        grid = time_grid(std::size_t(m), dt, 1.0, 1.0);
        spectra = SignalSpectra(inputs);
        break;
      case Arch::causality_noconv: grid = time_grid(std::size_t(m), dt, 1.0, 1.0); break;
      case Arch::pod: break;
    }
  }

  // Multi-scale trunk: sum_i combo_i subnet_i(scale_i * grid).
  MatrixXd ms_trunk(const MsTrunk& tr, double rate, std::uint64_t seed, bool train) {
    MatrixXd total;
    if (train) {
      sub_caches.resize(tr.subnets.size());
      sub_out.resize(tr.subnets.size());
    }
    for (std::size_t i = 0; i < tr.subnets.size(); ++i) {
      const MatrixXd x = tr.scales[i] * grid;
      MatrixXd y = train ? nn::forward(tr.subnets[i], x, {rate, seed + i}, sub_caches[i]) : nn::forward(tr.subnets[i], x);
      if (i == 0) total = MatrixXd::Zero(y.rows(), y.cols());
      total += tr.combo[i] * y;
      if (train) sub_out[i] = std::move(y);
    }
    return total;
  }

  MatrixXd run_forward(const OperatorModel& model, const nn::RegConfig* reg, std::uint64_t seed) {
    const bool train = reg != nullptr;
    const double rb = train ? reg->dropout_branch : 0.0;
    const double rt = train ? reg->dropout_trunk : 0.0;
    const std::uint64_t sb = seed * 4 + 1, st = seed * 4 + 2;
    auto branch = [&](const Mlp& net, const MatrixXd& x) {
      return train ? nn::forward(net, x, {rb, sb}, branch_cache) : nn::forward(net, x);
    };
    auto trunk = [&](const Mlp& net) {
      return train ? nn::forward(net, grid, {rt, st}, trunk_cache) : nn::forward(net, grid);
    };

    return std::visit(
        overloaded{
            [&](const DeepOnetModel& d) -> MatrixXd {
              MatrixXd b = branch(d.branch, inputs);
              MatrixXd t = trunk(d.trunk);
              MatrixXd p = t.transpose() * b;
              if (d.use_output_bias) p.array() += d.output_bias;
              if (train) {
                branch_out = std::move(b);
                trunk_out = std::move(t);
              }
              return p;
            },
            [&](const PodDeepOnetModel& pod) -> MatrixXd {
              MatrixXd b = branch(pod.branch, inputs);
              MatrixXd p = pod.basis.transpose() * b;
              p.colwise() += pod.mean;
              if (train) branch_out = std::move(b);
              return p;
            },
            [&](const MsDeepOnetModel& ms) -> MatrixXd {
              MatrixXd b = branch(ms.branch, inputs);
              MatrixXd t = ms_trunk(ms.trunk, rt, st, train);
              MatrixXd p = t.transpose() * b;
              if (train) {
                branch_out = std::move(b);
                trunk_out = std::move(t);
              }
              return p;
            },
            [&](const CausalityModel& c) -> MatrixXd {
              const MatrixXd& w0 = c.branch.layers[0].weight;
              MatrixXd z = c.convolutional ? conv_first_linear(w0, spectra) : noconv_first_linear(w0, inputs);
              nn::Cache scratch;
              MatrixXd b = nn::forward_from_linear(c.branch, std::move(z), {rb, sb}, train ? branch_cache : scratch);
              MatrixXd t = trunk(c.trunk);
              MatrixXd p = paired_dot(b, t, m, n);
              if (train) {
                branch_out = std::move(b);
                trunk_out = std::move(t);
              }
              return p;
            },
        },
        model);
  }

  void run_backward(const OperatorModel& model, const MatrixXd& up, OperatorModel& grad) {
    require(up.rows() == m && up.cols() == n, Errc::dimension_mismatch, "upstream gradient shape differs from predictions");
    require(arch_of(grad) == arch, Errc::dimension_mismatch, "gradient buffer has another architecture");
    std::visit(
        overloaded{
            [&](const DeepOnetModel& d) {
              auto& g = std::get<DeepOnetModel>(grad);
              nn::backward(d.branch, branch_cache, trunk_out * up, g.branch);
              nn::backward(d.trunk, trunk_cache, branch_out * up.transpose(), g.trunk);
              if (d.use_output_bias) g.output_bias += up.sum();
            },
            [&](const PodDeepOnetModel& pod) {
              auto& g = std::get<PodDeepOnetModel>(grad);
              nn::backward(pod.branch, branch_cache, pod.basis * up, g.branch);
            },
            [&](const MsDeepOnetModel& ms) {
              auto& g = std::get<MsDeepOnetModel>(grad);
              nn::backward(ms.branch, branch_cache, trunk_out * up, g.branch);
              const MatrixXd dt = branch_out * up.transpose();
              for (std::size_t i = 0; i < ms.trunk.subnets.size(); ++i) {
                g.trunk.combo[i] += sub_out[i].cwiseProduct(dt).sum();
                nn::backward(ms.trunk.subnets[i], sub_caches[i], ms.trunk.combo[i] * dt, g.trunk.subnets[i]);
              }
            },
            [&](const CausalityModel& c) {
              auto& g = std::get<CausalityModel>(grad);
              MatrixXd db(branch_out.rows(), branch_out.cols());
              MatrixXd dt = MatrixXd::Zero(trunk_out.rows(), m);
              for (Index s = 0; s < n; ++s) {
                db.middleCols(s * m, m) = trunk_out * up.col(s).asDiagonal();
                dt.noalias() += branch_out.middleCols(s * m, m) * up.col(s).asDiagonal();
              }
              const MatrixXd delta = nn::backward(c.branch, branch_cache, db, g.branch);
              auto& dw0 = g.branch.layers[0].weight;
              if (c.convolutional) {
                conv_first_gradient(delta, spectra, dw0);
              } else {
                noconv_first_gradient(delta, inputs, dw0);
              }
              nn::backward(c.trunk, trunk_cache, dt, g.trunk);
            },
        },
        model);
  }
};

BatchEngine::BatchEngine(const OperatorModel& model, const MatrixXd& inputs)
    : impl_(std::make_unique<Impl>(model, inputs)) {}
BatchEngine::~BatchEngine() = default;
BatchEngine::BatchEngine(BatchEngine&&) noexcept = default;
BatchEngine& BatchEngine::operator=(BatchEngine&&) noexcept = default;

std::size_t BatchEngine::signals() const noexcept { return std::size_t(impl_->n); }

const MatrixXd& BatchEngine::forward(const OperatorModel& model, const nn::RegConfig& reg, std::uint64_t seed) {
  require(arch_of(model) == impl_->arch, Errc::dimension_mismatch, "model architecture changed");
  impl_->pred = impl_->run_forward(model, &reg, seed);
  return impl_->pred;
}

void BatchEngine::backward(const OperatorModel& model, const MatrixXd& upstream, OperatorModel& grad) {
  impl_->run_backward(model, upstream, grad);
}

MatrixXd BatchEngine::predict(const OperatorModel& model) const {
  require(arch_of(model) == impl_->arch, Errc::dimension_mismatch, "model architecture changed");
  // Eval mode writes no members.
  return const_cast<Impl&>(*impl_).run_forward(model, nullptr, 0);
}

MatrixXd predict(const OperatorModel& model, const MatrixXd& inputs) {
  return BatchEngine(model, inputs).predict(model);
}

}  // namespace causalop::ops
