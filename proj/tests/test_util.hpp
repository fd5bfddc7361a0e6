#pragma once

#include <cmath>
#include <filesystem>
#include <numbers>
#include <span>
#include <string>

namespace test {

inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "syntone_tests" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// |X(f)|^2 of a direct DFT at frequency `bin` on a length-`n` grid.
inline double dft_power(std::span<const double> x, double bin, int n) {
  double re = 0.0, im = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    const double ph = 2.0 * std::numbers::pi * bin * static_cast<double>(t) / n;
    re += x[t] * std::cos(ph);
    im -= x[t] * std::sin(ph);
  }
  return re * re + im * im;
}

}  // namespace test
