#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

/// Dense networks with hand-written reverse mode, dropout, Adam and
/// piecewise-constant learning-rate schedules. Batches are matrices whose
/// columns are samples.
namespace causalop::nn {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class Activation { relu, tanh, sin, sigmoid, shifted_sigmoid };

std::string to_string(Activation a);
Activation parse_activation(const std::string& name);

double activate(Activation a, double x);
/// d/dx of activate; relu'(0) = 0.
double activate_derivative(Activation a, double x);

struct Layer {
  MatrixXd weight;  // out x in
  VectorXd bias;    // out
};

/// Affine layers with `activation` on every hidden layer and a linear output.
struct Mlp {
  std::vector<Layer> layers;
  Activation activation = Activation::tanh;

  Mlp() = default;
  /// Zero parameters with the given widths, dims.size() >= 2.
  Mlp(const std::vector<int>& dims, Activation act);

  /// Glorot-uniform weights, zero biases.
  static Mlp glorot(const std::vector<int>& dims, Activation act, std::mt19937_64& rng);

  int input_dim() const { return int(layers.front().weight.cols()); }
  int output_dim() const { return int(layers.back().weight.rows()); }
  std::vector<int> dims() const;
  std::size_t parameter_count() const;
  /// Widths chain and every parameter is finite.
  void validate() const;
};

/// Same shapes as `net`, all zeros.
Mlp zeros_like(const Mlp& net);

/// Training-mode dropout on hidden activations. rate == 0 is the identity.
struct Dropout {
  double rate = 0.0;
  std::uint64_t seed = 0;
};

/// Inverted-dropout mask: each entry is 0 with probability `rate`, else
/// 1 / (1 - rate). Entry (r, c) depends only on (seed, r, c, rows).
MatrixXd dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, std::uint64_t seed);

/// Activations kept by a forward pass for the matching backward pass.
struct Cache {
  MatrixXd input;                // empty when the caller supplied layer-1 pre-activations
  std::vector<MatrixXd> pre;     // pre[l] = W_l a_{l-1} + b_l
  std::vector<MatrixXd> act;     // activation(pre[l]), hidden layers only
  std::vector<MatrixXd> masks;   // empty when no dropout
  std::vector<MatrixXd> post;    // act .* mask, empty when no dropout

  const MatrixXd& hidden_output(std::size_t l) const { return masks[l].size() ? post[l] : act[l]; }
};

/// Evaluation forward: no dropout, no cache.
MatrixXd forward(const Mlp& net, const MatrixXd& x);
VectorXd forward(const Mlp& net, const VectorXd& x);

/// Forward that records a cache. Layer l (0-based hidden index) uses the
/// mask seeded by splitmix(dropout.seed + l).
MatrixXd forward(const Mlp& net, const MatrixXd& x, const Dropout& dropout, Cache& cache);

/// As above but starting from W_0 x for layer 0 (bias not yet added).
/// Lets callers compute the first layer with structured (e.g. FFT) kernels.
MatrixXd forward_from_linear(const Mlp& net, MatrixXd first_linear, const Dropout& dropout, Cache& cache);

/// Accumulates parameter gradients of sum(upstream .* output) into `grad`
/// and returns the gradient with respect to the layer-0 pre-activation.
/// The layer-0 weight gradient is only accumulated when the cache holds the
/// input.
MatrixXd backward(const Mlp& net, const Cache& cache, const MatrixXd& upstream, Mlp& grad);

/// Gradient with respect to the network input: W_0^T delta_0.
MatrixXd input_gradient(const Mlp& net, const MatrixXd& first_delta);

/// Flat view of one parameter tensor for the optimiser.
enum class Group { branch, trunk, other };

struct ParamView {
  double* data = nullptr;
  std::size_t size = 0;
  Group group = Group::other;
  bool decay = false;  // receives L2 (weights only)
};

/// Views in a fixed order: layer by layer, weight then bias.
void append_views(Mlp& net, Group group, std::vector<ParamView>& out);

struct RegConfig {
  double l2_branch = 0.0;
  double l2_trunk = 0.0;
  double dropout_branch = 0.0;
  double dropout_trunk = 0.0;

  double l2(Group g) const noexcept {
    return g == Group::branch ? l2_branch : g == Group::trunk ? l2_trunk : 0.0;
  }
  void validate() const;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::vector<std::vector<double>> first;
  std::vector<std::vector<double>> second;
  std::uint64_t step = 0;
};

/// One bias-corrected Adam update; gradients of decayed tensors get 2 l2 w
/// added first. Buffers are sized on the first call.
void adam_step(AdamState& state, const std::vector<ParamView>& params, const std::vector<ParamView>& grads,
               double lr, const RegConfig& reg);

/// Ascending (threshold, rate) segments.
struct LrSchedule {
  std::vector<std::pair<long, double>> segments;
  void validate() const;
};

/// Rate of the first segment whose threshold exceeds `epoch`, else the last.
double lr_at(const LrSchedule& schedule, long epoch);

struct GradCheck {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t checked = 0;
};

/// Analytic vs central-difference gradients of sum(upstream .* net(x)) over
/// every parameter. Relative error is |a - n| / max(|a|, |n|, floor).
GradCheck check_gradients(const Mlp& net, const MatrixXd& x, const MatrixXd& upstream, double step = 1e-5,
                          double floor = 1e-8);

}  // namespace causalop::nn
