#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace syntone::io {

/// SYNT tensor: "SYNT", version u8 = 1, rank u8, rank x u32 LE dims, then
/// prod(dims) float32 LE values in row-major order.
struct Tensor {
  std::vector<std::uint32_t> dims;
  std::vector<float> values;

  std::size_t element_count() const;
  friend bool operator==(const Tensor&, const Tensor&) = default;
};

inline constexpr std::uint8_t kTensorVersion = 1;

std::vector<std::uint8_t> encode_tensor(const Tensor& t);
Tensor decode_tensor(std::span<const std::uint8_t> bytes);

void write_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor read_tensor(const std::filesystem::path& path);

/// Narrows doubles to float32 for storage.
Tensor make_tensor(std::vector<std::uint32_t> dims, std::span<const double> values);
std::vector<double> to_doubles(const Tensor& t);

/// Named-tensor container used for checkpoints:
///   "SYNC", version u8 = 1, u32 meta length, meta bytes (JSON text),
///   u32 entry count, entries {u16 name length, name, u8 rank, rank x u32 dims,
///   u64 byte offset into payload}, then the float32 LE payload.
struct NamedTensor {
  std::string name;
  Tensor tensor;
};

struct Container {
  std::string meta;
  std::vector<NamedTensor> entries;

  const Tensor& at(std::string_view name) const;
};

inline constexpr std::uint8_t kContainerVersion = 1;

void write_container(const std::filesystem::path& path, const Container& c);
Container read_container(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace syntone::io
