#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace syntone::wav {

/// round(x * 32767) clamped to the int16 range.
std::int16_t quantize(double x);
double dequantize(std::int16_t q);

/// RIFF/WAVE, PCM 16-bit little-endian, mono.
std::vector<std::uint8_t> encode_pcm16(std::span<const double> samples, int sample_rate);

void write_pcm16(const std::filesystem::path& path, std::span<const double> samples,
                 int sample_rate);

struct PcmClip {
  int sample_rate = 0;
  std::vector<double> samples;  // dequantized, in [-1, 1]
};

/// Reads a mono 16-bit PCM file; anything else is rejected with
/// std::runtime_error.
PcmClip read_pcm16(const std::filesystem::path& path);

}  // namespace syntone::wav
