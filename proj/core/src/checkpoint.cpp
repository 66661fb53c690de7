#include "causalop/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "causalop/error.hpp"

namespace causalop::ckpt {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

namespace {

template <class T>
void put_le(std::string& buf, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) buf.push_back(char((v >> (8 * i)) & 0xff));
}

template <class T>
T get_le(const char* p) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= T(static_cast<unsigned char>(p[i])) << (8 * i);
  return v;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void Writer::u32(std::uint32_t v) { put_le(buf_, v); }
void Writer::u64(std::uint64_t v) { put_le(buf_, v); }
void Writer::f64(double v) { put_le(buf_, std::bit_cast<std::uint64_t>(v)); }
void Writer::raw(std::string_view bytes) { buf_.append(bytes); }
void Writer::f64s(const double* data, std::size_t count) {
  for (std::size_t i = 0; i < count; ++i) f64(data[i]);
}

std::string Writer::finish() const {
  std::string out = buf_;
  put_le(out, fnv1a64(buf_));
  return out;
}

Reader::Reader(std::string bytes) : buf_(std::move(bytes)) {
  require(buf_.size() >= 8, Errc::malformed, "file too short for a checksum");
  const std::uint64_t stored = get_le<std::uint64_t>(buf_.data() + buf_.size() - 8);
  buf_.resize(buf_.size() - 8);
  require(stored == fnv1a64(buf_), Errc::malformed, "checksum mismatch");
}

void Reader::need(std::size_t count) const {
  require(buf_.size() - pos_ >= count, Errc::malformed, "unexpected end of data");
}

std::uint32_t Reader::u32() {
  need(4);
  const auto v = get_le<std::uint32_t>(buf_.data() + pos_);
  pos_ += 4;
  return v;
}

std::uint64_t Reader::u64() {
  need(8);
  const auto v = get_le<std::uint64_t>(buf_.data() + pos_);
  pos_ += 8;
  return v;
}

double Reader::f64() { return std::bit_cast<double>(u64()); }

std::string Reader::raw(std::size_t count) {
  need(count);
  std::string s = buf_.substr(pos_, count);
  pos_ += count;
  return s;
}

void Reader::f64s(double* data, std::size_t count) {
  need(count * 8);
  for (std::size_t i = 0; i < count; ++i) data[i] = f64();
}

std::uint32_t activation_tag(nn::Activation a) { return static_cast<std::uint32_t>(a); }

nn::Activation activation_from_tag(std::uint32_t tag) {
  require(tag <= static_cast<std::uint32_t>(nn::Activation::shifted_sigmoid), Errc::malformed,
          "unknown activation tag " + std::to_string(tag));
  return static_cast<nn::Activation>(tag);
}

void write_mlp(Writer& w, const nn::Mlp& net) {
  net.validate();
  w.u32(activation_tag(net.activation));
  const auto dims = net.dims();
  w.u32(std::uint32_t(dims.size()));
  for (int d : dims) w.u32(std::uint32_t(d));
  for (const auto& layer : net.layers) {
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) w.f64(layer.weight(r, c));
    w.f64s(layer.bias.data(), std::size_t(layer.bias.size()));
  }
}

nn::Mlp read_mlp(Reader& r) {
  const auto act = activation_from_tag(r.u32());
  const std::uint32_t count = r.u32();
  require(count >= 2 && count <= 4096, Errc::malformed, "implausible layer count");
  std::vector<int> dims(count);
  for (auto& d : dims) {
    const std::uint32_t v = r.u32();
    require(v >= 1 && v <= (1u << 24), Errc::malformed, "implausible layer width");
    d = int(v);
  }
  nn::Mlp net(dims, act);
  for (auto& layer : net.layers) {
    for (Eigen::Index row = 0; row < layer.weight.rows(); ++row)
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(row, c) = r.f64();
    r.f64s(layer.bias.data(), std::size_t(layer.bias.size()));
  }
  return net;
}

std::string encode(const nn::Mlp& net) {
  Writer w;
  w.raw(kNetMagic);
  w.u32(kNetVersion);
  write_mlp(w, net);
  return w.finish();
}

nn::Mlp decode(std::string bytes) {
  Reader r(std::move(bytes));
  require(r.raw(kNetMagic.size()) == kNetMagic, Errc::malformed, "not a network checkpoint");
  require(r.u32() == kNetVersion, Errc::malformed, "unsupported checkpoint version");
  auto net = read_mlp(r);
  require(r.done(), Errc::malformed, "trailing bytes after network");
  return net;
}

std::string read_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  require(bool(in), Errc::io, "cannot read " + file.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::filesystem::path& file, std::string_view bytes) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  require(bool(out), Errc::io, "cannot write " + file.string());
  out.write(bytes.data(), std::streamsize(bytes.size()));
  require(bool(out), Errc::io, "write failed for " + file.string());
}

void save(const nn::Mlp& net, const std::filesystem::path& file) { write_file(file, encode(net)); }
nn::Mlp load(const std::filesystem::path& file) { return decode(read_file(file)); }

}  // namespace causalop::ckpt
