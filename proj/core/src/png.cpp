#include "syntone/png.hpp"

#include "syntone/tensor_io.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace syntone::png {
namespace {

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>((v >> s) & 0xff));
}

void put_chunk(std::vector<std::uint8_t>& out, const char* type, const std::vector<std::uint8_t>& data) {
  put_be32(out, static_cast<std::uint32_t>(data.size()));
  const std::size_t start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data.begin(), data.end());
  const auto crc = crc32(0L, out.data() + start, static_cast<uInt>(out.size() - start));
  put_be32(out, static_cast<std::uint32_t>(crc));
}

}  // namespace

std::vector<std::uint8_t> encode_gray8(const std::vector<std::uint8_t>& pixels, int width, int height) {
  if (width < 1 || height < 1 || pixels.size() != static_cast<std::size_t>(width) * height) {
    throw std::invalid_argument("png: pixel buffer does not match the image size");
  }
  std::vector<std::uint8_t> raw;
  raw.reserve(static_cast<std::size_t>(width + 1) * height);
  for (int y = 0; y < height; ++y) {
    raw.push_back(0);  // filter: none
    raw.insert(raw.end(), pixels.begin() + static_cast<long>(y) * width,
               pixels.begin() + static_cast<long>(y + 1) * width);
  }
  uLongf packed_size = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> packed(packed_size);
  if (compress2(packed.data(), &packed_size, raw.data(), static_cast<uLong>(raw.size()), 9) != Z_OK) {
    throw std::runtime_error("png: deflate failed");
  }
  packed.resize(packed_size);

  std::vector<std::uint8_t> out{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  std::vector<std::uint8_t> header;
  put_be32(header, static_cast<std::uint32_t>(width));
  put_be32(header, static_cast<std::uint32_t>(height));
  header.insert(header.end(), {8, 0, 0, 0, 0});  // 8-bit grayscale, no interlace
  put_chunk(out, "IHDR", header);
  put_chunk(out, "IDAT", packed);
  put_chunk(out, "IEND", {});
  return out;
}

void write_heatmap(const std::filesystem::path& path, const Matrix& values) {
  if (values.data.empty()) throw std::invalid_argument("png: empty matrix");
  const auto [lo_it, hi_it] = std::minmax_element(values.data.begin(), values.data.end());
  const double lo = *lo_it, range = *hi_it - *lo_it;
  const int width = static_cast<int>(values.cols), height = static_cast<int>(values.rows);
  std::vector<std::uint8_t> pixels(values.data.size());
  for (int y = 0; y < height; ++y) {
    const auto src_row = static_cast<std::size_t>(height - 1 - y);
    for (int x = 0; x < width; ++x) {
      const double t = range > 0.0 ? (values(src_row, static_cast<std::size_t>(x)) - lo) / range : 0.0;
      pixels[static_cast<std::size_t>(y) * width + x] = static_cast<std::uint8_t>(std::lround(255.0 * t));
    }
  }
  io::write_file(path, encode_gray8(pixels, width, height));
}

}  // namespace syntone::png
