#include "causalop/error.hpp"

namespace causalop {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid argument";
    case Errc::invalid_system: return "invalid system";
    case Errc::eigen_failure: return "eigen failure";
    case Errc::singular_matrix: return "singular matrix";
    case Errc::length_mismatch: return "length mismatch";
    case Errc::non_finite: return "non-finite value";
    case Errc::malformed: return "malformed file";
    case Errc::rank_deficient: return "rank deficient";
    case Errc::divergence: return "divergence";
    case Errc::fast_path_undefined: return "fast path undefined";
    case Errc::dimension_mismatch: return "dimension mismatch";
    case Errc::config: return "config error";
    case Errc::io: return "io error";
  }
  return "unknown error";
}

Error::Error(Errc code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + (detail.empty() ? "" : ": " + detail)),
      code_(code) {}

void fail(Errc code, const std::string& detail) { throw Error(code, detail); }

}  // namespace causalop
