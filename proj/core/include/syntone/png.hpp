#pragma once

#include "syntone/matrix.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace syntone::png {

/// 8-bit grayscale PNG bytes for a width x height image (row-major).
std::vector<std::uint8_t> encode_gray8(const std::vector<std::uint8_t>& pixels, int width, int height);

/// Heatmap of a mel matrix: min-max normalized, low mel bands at the bottom.
void write_heatmap(const std::filesystem::path& path, const Matrix& values);

}  // namespace syntone::png
