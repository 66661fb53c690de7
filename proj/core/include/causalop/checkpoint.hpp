#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "causalop/neural.hpp"

/// Little-endian binary records closed by an FNV-1a 64 checksum.
///
/// Network checkpoint layout (all integers little-endian):
///
///     offset  size  field
///     0       8     magic "CAUSNET\0"
///     8       4     u32 version (1)
///     12      4     u32 activation (0 relu, 1 tanh, 2 sin, 3 sigmoid, 4 shifted_sigmoid)
///     16      4     u32 width count D
///     20      4*D   u32 widths, input first
///     ...           f64 per layer: weight row-major (out x in), then bias
///     end-8   8     u64 FNV-1a 64 of every preceding byte
namespace causalop::ckpt {

std::uint64_t fnv1a64(std::string_view bytes) noexcept;

class Writer {
 public:
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void raw(std::string_view bytes);
  void f64s(const double* data, std::size_t count);
  /// Bytes plus trailing checksum.
  std::string finish() const;

 private:
  std::string buf_;
};

class Reader {
 public:
  /// Verifies and strips the trailing checksum; throws Errc::malformed.
  explicit Reader(std::string bytes);

  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  std::string raw(std::size_t count);
  void f64s(double* data, std::size_t count);
  bool done() const noexcept { return pos_ == buf_.size(); }

 private:
  void need(std::size_t count) const;
  std::string buf_;
  std::size_t pos_ = 0;
};

inline constexpr std::string_view kNetMagic{"CAUSNET\0", 8};
inline constexpr std::uint32_t kNetVersion = 1;

std::uint32_t activation_tag(nn::Activation a);
nn::Activation activation_from_tag(std::uint32_t tag);

/// Activation, widths and parameters without magic or checksum; reused by
/// model files.
void write_mlp(Writer& w, const nn::Mlp& net);
nn::Mlp read_mlp(Reader& r);

std::string encode(const nn::Mlp& net);
nn::Mlp decode(std::string bytes);

void save(const nn::Mlp& net, const std::filesystem::path& file);
nn::Mlp load(const std::filesystem::path& file);

std::string read_file(const std::filesystem::path& file);
void write_file(const std::filesystem::path& file, std::string_view bytes);

}  // namespace causalop::ckpt
