#include "syntone/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>

namespace syntone::io {
namespace {

static_assert(std::endian::native == std::endian::little, "SYNT I/O assumes a little-endian host");

void put_bytes(std::vector<std::uint8_t>& out, const void* p, std::size_t n) {
  const auto* b = static_cast<const std::uint8_t*>(p);
  out.insert(out.end(), b, b + n);
}

template <typename T>
void put(std::vector<std::uint8_t>& out, T v) {
  put_bytes(out, &v, sizeof(T));
}

class Reader {
public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  void get_bytes(void* dst, std::size_t n) {
    need(n);
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::size_t position() const { return pos_; }

private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw std::runtime_error("synt: truncated input");
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::size_t product(const std::vector<std::uint32_t>& dims) {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

}  // namespace

std::size_t Tensor::element_count() const { return product(dims); }

std::vector<std::uint8_t> encode_tensor(const Tensor& t) {
  if (t.dims.size() > 255) throw std::invalid_argument("synt: rank exceeds 255");
  if (t.values.size() != t.element_count()) throw std::invalid_argument("synt: dims do not match value count");
  std::vector<std::uint8_t> out;
  out.reserve(6 + 4 * t.dims.size() + 4 * t.values.size());
  put_bytes(out, "SYNT", 4);
  put<std::uint8_t>(out, kTensorVersion);
  put<std::uint8_t>(out, static_cast<std::uint8_t>(t.dims.size()));
  for (auto d : t.dims) put<std::uint32_t>(out, d);
  put_bytes(out, t.values.data(), t.values.size() * sizeof(float));
  return out;
}

Tensor decode_tensor(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  char magic[4];
  r.get_bytes(magic, 4);
  if (std::memcmp(magic, "SYNT", 4) != 0) throw std::runtime_error("synt: bad magic");
  const auto version = r.get<std::uint8_t>();
  if (version != kTensorVersion) throw std::runtime_error("synt: unsupported version " + std::to_string(version));
  const auto rank = r.get<std::uint8_t>();
  Tensor t;
  t.dims.resize(rank);
  for (auto& d : t.dims) d = r.get<std::uint32_t>();
  const std::size_t n = t.element_count();
  if (r.remaining() != n * sizeof(float)) throw std::runtime_error("synt: payload size mismatch");
  t.values.resize(n);
  r.get_bytes(t.values.data(), n * sizeof(float));
  return t;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_tensor(const std::filesystem::path& path, const Tensor& t) { write_file(path, encode_tensor(t)); }

Tensor read_tensor(const std::filesystem::path& path) {
  try {
    return decode_tensor(read_file(path));
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

Tensor make_tensor(std::vector<std::uint32_t> dims, std::span<const double> values) {
  Tensor t;
  t.dims = std::move(dims);
  if (values.size() != t.element_count()) throw std::invalid_argument("synt: dims do not match value count");
  t.values.assign(values.begin(), values.end());
  return t;
}

std::vector<double> to_doubles(const Tensor& t) { return {t.values.begin(), t.values.end()}; }

const Tensor& Container::at(std::string_view name) const {
  for (const auto& e : entries) {
    if (e.name == name) return e.tensor;
  }
  throw std::runtime_error("checkpoint: missing tensor '" + std::string(name) + "'");
}

void write_container(const std::filesystem::path& path, const Container& c) {
  std::vector<std::uint8_t> out;
  put_bytes(out, "SYNC", 4);
  put<std::uint8_t>(out, kContainerVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(c.meta.size()));
  put_bytes(out, c.meta.data(), c.meta.size());
  put<std::uint32_t>(out, static_cast<std::uint32_t>(c.entries.size()));
  std::uint64_t offset = 0;
  for (const auto& e : c.entries) {
    if (e.name.size() > 0xffff) throw std::invalid_argument("checkpoint: tensor name too long");
    if (e.tensor.values.size() != e.tensor.element_count()) {
      throw std::invalid_argument("checkpoint: tensor '" + e.name + "' has inconsistent dims");
    }
    put<std::uint16_t>(out, static_cast<std::uint16_t>(e.name.size()));
    put_bytes(out, e.name.data(), e.name.size());
    put<std::uint8_t>(out, static_cast<std::uint8_t>(e.tensor.dims.size()));
    for (auto d : e.tensor.dims) put<std::uint32_t>(out, d);
    put<std::uint64_t>(out, offset);
    offset += e.tensor.values.size() * sizeof(float);
  }
  for (const auto& e : c.entries) put_bytes(out, e.tensor.values.data(), e.tensor.values.size() * sizeof(float));
  write_file(path, out);
}

Container read_container(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  Reader r(bytes);
  char magic[4];
  r.get_bytes(magic, 4);
  if (std::memcmp(magic, "SYNC", 4) != 0) throw std::runtime_error(path.string() + ": not a SYNT container");
  const auto version = r.get<std::uint8_t>();
  if (version != kContainerVersion) throw std::runtime_error(path.string() + ": unsupported container version");
  Container c;
  c.meta.resize(r.get<std::uint32_t>());
  r.get_bytes(c.meta.data(), c.meta.size());
  const auto count = r.get<std::uint32_t>();
  std::vector<std::uint64_t> offsets;
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor e;
    e.name.resize(r.get<std::uint16_t>());
    r.get_bytes(e.name.data(), e.name.size());
    e.tensor.dims.resize(r.get<std::uint8_t>());
    for (auto& d : e.tensor.dims) d = r.get<std::uint32_t>();
    offsets.push_back(r.get<std::uint64_t>());
    c.entries.push_back(std::move(e));
  }
  const std::size_t payload = r.position();
  for (std::size_t i = 0; i < c.entries.size(); ++i) {
    auto& t = c.entries[i].tensor;
    const std::size_t n = t.element_count();
    const std::size_t begin = payload + offsets[i];
    if (begin + n * sizeof(float) > bytes.size()) throw std::runtime_error(path.string() + ": truncated payload");
    t.values.resize(n);
    std::memcpy(t.values.data(), bytes.data() + begin, n * sizeof(float));
  }
  return c;
}

}  // namespace syntone::io
