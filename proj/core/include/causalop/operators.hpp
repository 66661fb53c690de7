#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "causalop/neural.hpp"

/// Branch-trunk operator networks mapping a sampled ground motion
/// (m samples, step dt) to the response trajectory on the same grid.
namespace causalop::ops {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using nn::Mlp;

enum class Arch { deeponet, pod, msdeeponet, causality, causality_noconv };

std::string to_string(Arch a);
Arch parse_arch(const std::string& name);

/// Output sample j is evaluated with trunk input t = j * dt.
struct DeepOnetModel {
  Mlp branch;  // m -> N
  Mlp trunk;   // 1 -> N
  double output_bias = 0.0;
  bool use_output_bias = false;
  double dt = 0.0;
  std::size_t m = 0;
};

/// Trunk replaced by a fixed basis: prediction = mean + basis^T branch(u).
struct PodDeepOnetModel {
  Mlp branch;      // m -> p
  MatrixXd basis;  // p x m, orthonormal rows
  VectorXd mean;   // m
  double dt = 0.0;
};

struct MsTrunk {
  std::vector<Mlp> subnets;    // 1 -> N each
  std::vector<double> scales;  // input multipliers
  std::vector<double> combo;   // trainable mixing weights
};

/// Output sample j uses trunk input t_j / T with T = (m - 1) dt.
struct MsDeepOnetModel {
  Mlp branch;
  MsTrunk trunk;
  double dt = 0.0;
  std::size_t m = 0;
};

/// Output sample j is the prediction for the window of the first p = j + 1
/// samples, with trunk input t_p = p * dt.
struct CausalityModel {
  Mlp branch;  // m -> N
  Mlp trunk;   // 1 -> N
  bool convolutional = true;
  double dt = 0.0;
  std::size_t m = 0;
};

using OperatorModel = std::variant<DeepOnetModel, PodDeepOnetModel, MsDeepOnetModel, CausalityModel>;

Arch arch_of(const OperatorModel& model);
std::size_t sensor_count(const OperatorModel& model);
double model_dt(const OperatorModel& model);
std::size_t parameter_count(const OperatorModel& model);
/// Same structure with every trainable tensor zeroed (a gradient buffer).
/// Fixed POD basis and mean are copied unchanged.
OperatorModel zeros_like(const OperatorModel& model);
/// Trainable tensors in a fixed order; identical order for a zeros_like copy.
std::vector<nn::ParamView> param_views(OperatorModel& model);

// ---- single evaluations -------------------------------------------------

double deeponet_forward(const DeepOnetModel& model, std::span<const double> samples, double t,
                        const nn::Dropout& dropout = {});

struct PodBasis {
  VectorXd mean;            // m
  MatrixXd basis;           // p x m
  VectorXd singular_values; // p, non-increasing
};

/// Rows of `outputs` are training trajectories (n x m). Top-p right singular
/// vectors of the centred matrix via the n x n Gram matrix; each vector's
/// largest-magnitude entry is positive.
PodBasis pod_basis(const MatrixXd& outputs, std::size_t p);

VectorXd pod_forward(const PodDeepOnetModel& model, std::span<const double> samples,
                     const nn::Dropout& dropout = {});

/// sum_i combo_i * subnet_i(scale_i * t).
VectorXd mstrunk_forward(const MsTrunk& trunk, double t, const nn::Dropout& dropout = {});

/// 1 + (i - 1) * span / (count - 1) for i = 1..count (all ones when count == 1).
std::vector<double> default_scales(std::size_t count = 20, double span = 780.0 * 3.14159265358979323846);

/// First p samples right-aligned in m slots, zeros on the left.
std::vector<double> causal_branch_input(std::span<const double> signal, std::size_t p);
/// First p samples left-aligned, zeros on the right.
std::vector<double> noconv_branch_input(std::span<const double> signal, std::size_t p);

/// Branch(window(p)) . trunk(p dt).
double causality_forward(const CausalityModel& model, std::span<const double> signal, std::size_t p,
                         const nn::Dropout& dropout = {});

/// Branch output for window p, evaluated on its own so that equal windows
/// give bit-identical features.
VectorXd causality_branch_features(const CausalityModel& model, std::span<const double> signal, std::size_t p);

/// causality_forward for p = 1..m. `fast` computes every first-layer
/// pre-activation at once as FFT cross-correlations (convolutional models
/// only; Errc::fast_path_undefined otherwise).
VectorXd causality_forward_all(const CausalityModel& model, std::span<const double> signal, bool fast);

// ---- batches ------------------------------------------------------------

/// Evaluation-mode predictions for the columns of `inputs` (m x n).
MatrixXd predict(const OperatorModel& model, const MatrixXd& inputs);

/// Forward/backward over a fixed set of input signals. Signal-dependent
/// precomputation (spectra, grids) happens once in the constructor.
class BatchEngine {
 public:
  BatchEngine(const OperatorModel& model, const MatrixXd& inputs);
  ~BatchEngine();
  BatchEngine(BatchEngine&&) noexcept;
  BatchEngine& operator=(BatchEngine&&) noexcept;

  std::size_t signals() const noexcept;

  /// Predictions (m x n). Dropout rates come from `reg`; masks depend only
  /// on `seed`. Keeps the activations for backward().
  const MatrixXd& forward(const OperatorModel& model, const nn::RegConfig& reg, std::uint64_t seed);
  /// Accumulates d(sum(upstream .* prediction)) into `grad`.
  void backward(const OperatorModel& model, const MatrixXd& upstream, OperatorModel& grad);
  /// Eval-mode predictions without touching the training cache.
  MatrixXd predict(const OperatorModel& model) const;

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

}  // namespace causalop::ops
