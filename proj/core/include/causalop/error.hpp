#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace causalop {

/// Failure categories. The CLI maps these onto its documented exit codes.
enum class Errc {
  invalid_argument,
  invalid_system,
  eigen_failure,
  singular_matrix,
  length_mismatch,
  non_finite,
  malformed,
  rank_deficient,
  divergence,
  fast_path_undefined,
  dimension_mismatch,
  config,
  io,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] void fail(Errc code, const std::string& detail);

inline void require(bool condition, Errc code, const std::string& detail) {
  if (!condition) fail(code, detail);
}

}  // namespace causalop
