#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "causalop/operators.hpp"

namespace causalop::io {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Per-time-sample Gaussian statistics; rows of a batch are samples.
struct Normalizer {
  VectorXd mean;  // m
  VectorXd sd;    // m, floored at 1e-12

  MatrixXd apply(const MatrixXd& rows) const;
  MatrixXd invert(const MatrixXd& rows) const;
};

/// A trained model plus the input transform it was trained with.
struct SavedModel {
  ops::OperatorModel model;
  std::optional<Normalizer> input_norm;
};

/// Model file layout (little-endian, FNV-1a 64 trailer as in checkpoints):
///
///     magic "CAUSOPM\0", u32 version (1), u32 architecture
///       (0 deeponet, 1 pod, 2 msdeeponet, 3 causality, 4 causality_noconv)
///     f64 dt, u64 m
///     deeponet:          branch net, trunk net, u32 use_bias, f64 bias
///     pod:               branch net, u64 p, basis p x m row-major, mean m
///     msdeeponet:        branch net, u64 S, S x (f64 scale, f64 combo, net)
///     causality(_noconv): branch net, trunk net
///     u32 has_norm, then mean m and sd m when set
///
/// where "net" is the network checkpoint body (activation, widths, params).
std::string encode(const SavedModel& saved);
SavedModel decode(std::string bytes);

void save_model(const SavedModel& saved, const std::filesystem::path& file);
SavedModel load_model(const std::filesystem::path& file);

}  // namespace causalop::io
