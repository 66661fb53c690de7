#include "causalop/neural.hpp"

#include <algorithm>
#include <cmath>

#include "causalop/error.hpp"

namespace causalop::nn {

using Eigen::Index;

std::string to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::sin: return "sin";
    case Activation::sigmoid: return "sigmoid";
    case Activation::shifted_sigmoid: return "shifted_sigmoid";
  }
  return "tanh";
}

Activation parse_activation(const std::string& name) {
  for (auto a : {Activation::relu, Activation::tanh, Activation::sin, Activation::sigmoid, Activation::shifted_sigmoid})
    if (to_string(a) == name) return a;
  fail(Errc::config, "unknown activation '" + name + "'");
}

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Vectorised tanh: exp-based away from zero, odd Taylor polynomial near it
// so that relative accuracy holds for tiny arguments.
void tanh_inplace(double* p, Index n, double in_scale, double out_scale) {
  constexpr Index block = 256;
  Eigen::Array<double, block, 1> abs_x, e, x2;
  for (Index s = 0; s < n; s += block) {
    const Index len = std::min(block, n - s);
    Eigen::Map<Eigen::ArrayXd> x(p + s, len);
    auto a = abs_x.head(len);
    auto ev = e.head(len);
    auto sq = x2.head(len);
    if (in_scale != 1.0) x *= in_scale;
    a = x.abs();
    ev = (-2.0 * a).exp();
    sq = x.square();
    x = out_scale *
        (a < 0.04).select(
            a * (1.0 + sq * (-1.0 / 3 + sq * (2.0 / 15 + sq * (-17.0 / 315 + sq * (62.0 / 2835 + sq * (-1382.0 / 155925)))))),
            (1.0 - ev) / (1.0 + ev)) *
        x.sign();
  }
}

void activate_inplace(Activation a, MatrixXd& m) {
  switch (a) {
    case Activation::relu: m = m.cwiseMax(0.0); break;
    case Activation::tanh: tanh_inplace(m.data(), m.size(), 1.0, 1.0); break;
    case Activation::sin: m = m.array().sin().matrix(); break;
    case Activation::sigmoid:
      // sigmoid(x) = (1 + tanh(x / 2)) / 2
      tanh_inplace(m.data(), m.size(), 0.5, 0.5);
      m.array() += 0.5;
      break;
    case Activation::shifted_sigmoid: tanh_inplace(m.data(), m.size(), 0.5, 0.5); break;
  }
}

// Multiplies `delta` in place by activation'(pre), using act = activation(pre) where cheaper.
void scale_by_derivative(Activation a, const MatrixXd& pre, const MatrixXd& act, MatrixXd& delta) {
  switch (a) {
    case Activation::relu:
      delta.array() *= (pre.array() > 0.0).cast<double>();
      break;
    case Activation::tanh:
      delta.array() *= 1.0 - act.array().square();
      break;
    case Activation::sin:
      delta.array() *= pre.array().cos();
      break;
    case Activation::sigmoid:
      delta.array() *= act.array() * (1.0 - act.array());
      break;
    case Activation::shifted_sigmoid:
      delta.array() *= (act.array() + 0.5) * (0.5 - act.array());
      break;
  }
}

// Buffers in `cache` are reused across calls of the same shape.
MatrixXd run_layers(const Mlp& net, MatrixXd&& first_linear, const Dropout& dropout, Cache& cache) {
  const std::size_t count = net.layers.size();
  cache.pre.resize(count);
  cache.act.resize(count - 1);
  cache.masks.resize(count - 1);
  cache.post.resize(count - 1);
  cache.pre[0].swap(first_linear);
  for (std::size_t l = 0;; ++l) {
    MatrixXd& z = cache.pre[l];
    z.colwise() += net.layers[l].bias;
    if (l + 1 == count) return z;
    MatrixXd& a = cache.act[l];
    a = z;
    activate_inplace(net.activation, a);
    if (dropout.rate > 0.0) {
      cache.masks[l] = dropout_mask(a.rows(), a.cols(), dropout.rate, splitmix64(dropout.seed + l));
      cache.post[l] = a.cwiseProduct(cache.masks[l]);
    } else {
      cache.masks[l].resize(0, 0);
      cache.post[l].resize(0, 0);
    }
    cache.pre[l + 1].noalias() = net.layers[l + 1].weight * cache.hidden_output(l);
  }
}

}  // namespace

double activate(Activation a, double x) {
  switch (a) {
    case Activation::relu: return x > 0.0 ? x : 0.0;
    case Activation::tanh: return std::tanh(x);
    case Activation::sin: return std::sin(x);
    case Activation::sigmoid: return sigmoid(x);
    case Activation::shifted_sigmoid: return 0.5 * std::tanh(0.5 * x);
  }
  return x;
}

double activate_derivative(Activation a, double x) {
  switch (a) {
    case Activation::relu: return x > 0.0 ? 1.0 : 0.0;
    case Activation::tanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case Activation::sin: return std::cos(x);
    case Activation::sigmoid:
    case Activation::shifted_sigmoid: {
      const double s = sigmoid(x);
      return s * (1.0 - s);
    }
  }
  return 1.0;
}

Mlp::Mlp(const std::vector<int>& dims, Activation act) : activation(act) {
  require(dims.size() >= 2, Errc::invalid_argument, "an Mlp needs at least input and output widths");
  for (int d : dims) require(d >= 1, Errc::invalid_argument, "layer widths must be positive");
  for (std::size_t l = 0; l + 1 < dims.size(); ++l)
    layers.push_back({MatrixXd::Zero(dims[l + 1], dims[l]), VectorXd::Zero(dims[l + 1])});
}

Mlp Mlp::glorot(const std::vector<int>& dims, Activation act, std::mt19937_64& rng) {
  Mlp net(dims, act);
  for (auto& layer : net.layers) {
    const double limit = std::sqrt(6.0 / double(layer.weight.rows() + layer.weight.cols()));
    std::uniform_real_distribution<double> dist(-limit, limit);
    // Row-major fill order so the draw sequence does not depend on storage order.
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = dist(rng);
  }
  return net;
}

std::vector<int> Mlp::dims() const {
  std::vector<int> d;
  if (layers.empty()) return d;
  d.push_back(input_dim());
  for (const auto& l : layers) d.push_back(int(l.weight.rows()));
  return d;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += std::size_t(l.weight.size() + l.bias.size());
  return n;
}

void Mlp::validate() const {
  require(!layers.empty(), Errc::dimension_mismatch, "Mlp has no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    require(layers[l].bias.size() == layers[l].weight.rows(), Errc::dimension_mismatch, "bias length differs from layer width");
    if (l > 0)
      require(layers[l].weight.cols() == layers[l - 1].weight.rows(), Errc::dimension_mismatch, "layer widths do not chain");
    require(layers[l].weight.allFinite() && layers[l].bias.allFinite(), Errc::non_finite, "Mlp parameter");
  }
}

Mlp zeros_like(const Mlp& net) {
  Mlp z;
  z.activation = net.activation;
  for (const auto& l : net.layers)
    z.layers.push_back({MatrixXd::Zero(l.weight.rows(), l.weight.cols()), VectorXd::Zero(l.bias.size())});
  return z;
}

MatrixXd dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, std::uint64_t seed) {
  require(rate >= 0.0 && rate < 1.0, Errc::invalid_argument, "dropout rate must be in [0, 1)");
  MatrixXd mask(rows, cols);
  const double keep = 1.0 / (1.0 - rate);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) {
      const std::uint64_t bits = splitmix64(seed ^ splitmix64(std::uint64_t(c) * std::uint64_t(rows) + std::uint64_t(r)));
      const double u = double(bits >> 11) * 0x1.0p-53;
      mask(r, c) = u < rate ? 0.0 : keep;
    }
  return mask;
}

MatrixXd forward(const Mlp& net, const MatrixXd& x) {
  require(x.rows() == net.input_dim(), Errc::dimension_mismatch,
          "input has " + std::to_string(x.rows()) + " rows, network expects " + std::to_string(net.input_dim()));
  MatrixXd z = x;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    z = net.layers[l].weight * z;
    z.colwise() += net.layers[l].bias;
    if (l + 1 < net.layers.size()) activate_inplace(net.activation, z);
  }
  return z;
}

VectorXd forward(const Mlp& net, const VectorXd& x) { return forward(net, MatrixXd(x)).col(0); }

MatrixXd forward(const Mlp& net, const MatrixXd& x, const Dropout& dropout, Cache& cache) {
  require(x.rows() == net.input_dim(), Errc::dimension_mismatch,
          "input has " + std::to_string(x.rows()) + " rows, network expects " + std::to_string(net.input_dim()));
  cache.input = x;
  MatrixXd z = net.layers[0].weight * x;
  return run_layers(net, std::move(z), dropout, cache);
}

MatrixXd forward_from_linear(const Mlp& net, MatrixXd first_linear, const Dropout& dropout, Cache& cache) {
  require(first_linear.rows() == net.layers[0].weight.rows(), Errc::dimension_mismatch,
          "first-layer pre-activation has the wrong height");
  cache.input.resize(0, 0);
  return run_layers(net, std::move(first_linear), dropout, cache);
}

MatrixXd backward(const Mlp& net, const Cache& cache, const MatrixXd& upstream, Mlp& grad) {
  const std::size_t count = net.layers.size();
  require(cache.pre.size() == count, Errc::dimension_mismatch, "cache does not match network");
  require(upstream.rows() == net.output_dim() && upstream.cols() == cache.pre.back().cols(),
          Errc::dimension_mismatch, "upstream gradient shape differs from output");
  MatrixXd delta = upstream;
  MatrixXd next;
  for (std::size_t l = count; l-- > 0;) {
    grad.layers[l].bias += delta.rowwise().sum();
    if (l == 0) {
      if (cache.input.size()) grad.layers[0].weight.noalias() += delta * cache.input.transpose();
      return delta;
    }
    grad.layers[l].weight.noalias() += delta * cache.hidden_output(l - 1).transpose();
    next.noalias() = net.layers[l].weight.transpose() * delta;
    if (cache.masks[l - 1].size()) next.array() *= cache.masks[l - 1].array();
    scale_by_derivative(net.activation, cache.pre[l - 1], cache.act[l - 1], next);
    delta.swap(next);
  }
  return delta;
}

MatrixXd input_gradient(const Mlp& net, const MatrixXd& first_delta) {
  return net.layers[0].weight.transpose() * first_delta;
}

void append_views(Mlp& net, Group group, std::vector<ParamView>& out) {
  for (auto& l : net.layers) {
    out.push_back({l.weight.data(), std::size_t(l.weight.size()), group, true});
    out.push_back({l.bias.data(), std::size_t(l.bias.size()), group, false});
  }
}

void RegConfig::validate() const {
  require(l2_branch >= 0.0 && l2_trunk >= 0.0, Errc::config, "l2 coefficients must be non-negative");
  require(dropout_branch >= 0.0 && dropout_branch < 1.0 && dropout_trunk >= 0.0 && dropout_trunk < 1.0,
          Errc::config, "dropout rates must be in [0, 1)");
}

void adam_step(AdamState& state, const std::vector<ParamView>& params, const std::vector<ParamView>& grads,
               double lr, const RegConfig& reg) {
  require(params.size() == grads.size(), Errc::dimension_mismatch, "parameter and gradient lists differ");
  if (state.first.empty()) {
    for (const auto& p : params) {
      state.first.emplace_back(p.size, 0.0);
      state.second.emplace_back(p.size, 0.0);
    }
  }
  require(state.first.size() == params.size(), Errc::dimension_mismatch, "optimiser state does not match parameters");
  ++state.step;
  const auto& c = state.config;
  const double correct1 = 1.0 - std::pow(c.beta1, double(state.step));
  const double correct2 = 1.0 - std::pow(c.beta2, double(state.step));
  for (std::size_t t = 0; t < params.size(); ++t) {
    const auto& p = params[t];
    const auto& g = grads[t];
    require(p.size == g.size && p.size == state.first[t].size(), Errc::dimension_mismatch, "tensor size changed");
    const double l2 = p.decay ? reg.l2(p.group) : 0.0;
    double* m1 = state.first[t].data();
    double* m2 = state.second[t].data();
    for (std::size_t i = 0; i < p.size; ++i) {
      const double gi = g.data[i] + 2.0 * l2 * p.data[i];
      m1[i] = c.beta1 * m1[i] + (1.0 - c.beta1) * gi;
      m2[i] = c.beta2 * m2[i] + (1.0 - c.beta2) * gi * gi;
      p.data[i] -= lr * (m1[i] / correct1) / (std::sqrt(m2[i] / correct2) + c.epsilon);
    }
  }
}

void LrSchedule::validate() const {
  require(!segments.empty(), Errc::config, "learning-rate schedule is empty");
  for (std::size_t i = 0; i < segments.size(); ++i) {
    require(segments[i].second >= 0.0 && std::isfinite(segments[i].second), Errc::config,
            "learning rates must be finite and non-negative");
    if (i > 0)
      require(segments[i].first > segments[i - 1].first, Errc::config, "schedule thresholds must increase strictly");
  }
}

double lr_at(const LrSchedule& schedule, long epoch) {
  require(!schedule.segments.empty(), Errc::invalid_argument, "learning-rate schedule is empty");
  for (const auto& [threshold, rate] : schedule.segments)
    if (threshold > epoch) return rate;
  return schedule.segments.back().second;
}

GradCheck check_gradients(const Mlp& net, const MatrixXd& x, const MatrixXd& upstream, double step, double floor) {
  Cache cache;
  forward(net, x, Dropout{}, cache);
  Mlp analytic = zeros_like(net);
  backward(net, cache, upstream, analytic);

  Mlp probe = net;
  auto objective = [&] { return (forward(probe, x).array() * upstream.array()).sum(); };
  GradCheck out;
  auto visit = [&](double& param, double exact) {
    const double saved = param;
    param = saved + step;
    const double up = objective();
    param = saved - step;
    const double down = objective();
    param = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double abs_err = std::abs(exact - numeric);
    out.max_abs_error = std::max(out.max_abs_error, abs_err);
    out.max_rel_error = std::max(out.max_rel_error, abs_err / std::max({std::abs(exact), std::abs(numeric), floor}));
    ++out.checked;
  };
  for (std::size_t l = 0; l < probe.layers.size(); ++l) {
    auto& w = probe.layers[l].weight;
    for (Eigen::Index i = 0; i < w.size(); ++i) visit(w.data()[i], analytic.layers[l].weight.data()[i]);
    auto& b = probe.layers[l].bias;
    for (Eigen::Index i = 0; i < b.size(); ++i) visit(b.data()[i], analytic.layers[l].bias.data()[i]);
  }
  return out;
}

}  // namespace causalop::nn
