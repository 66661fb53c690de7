#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "causalop/lindyn.hpp"

namespace causalop::lindyn {

/// A system ready for every solver: concrete damping matrix for the Newmark
/// and state-space paths, modal ratios for the classical path.
struct SystemDefinition {
  MdofSystem system;
  std::vector<double> modal_xi;
  std::string damping_model;  // "modal_xi", "rayleigh" or "matrix"
};

/// YAML system file. Units are SI (kg, N s/m, N/m); matrices are row-major
/// nested sequences. Either `mass` + `stiffness` or a `shear_building`
/// block; exactly one of `damping` (matrix), `rayleigh: {a, b}` or
/// `modal_xi: [...]`. `influence` defaults to all ones.
///
///     n: 2
///     mass: [[1, 0], [0, 1]]
///     stiffness: [[2, -1], [-1, 1]]
///     influence: [1, 1]
///     modal_xi: [0.05, 0.05]
///
/// Throws Errc::config on schema errors and Errc::invalid_system on
/// physically invalid input.
SystemDefinition parse_system(const std::string& text);
SystemDefinition load_system(const std::filesystem::path& path);

/// Closes the definition for a system whose matrices are already set:
/// derives whichever of damping matrix / modal ratios is missing.
SystemDefinition with_modal_damping(MdofSystem system, std::vector<double> modal_xi);
SystemDefinition with_rayleigh_damping(MdofSystem system, double a, double b);
SystemDefinition with_damping_matrix(MdofSystem system);

}  // namespace causalop::lindyn
