#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace syntone::synth {

inline constexpr int kSampleRate = 16000;
inline constexpr int kClipLength = 16000;
inline constexpr int kNumTimbres = 4;
inline constexpr int kNumAmplitudes = 20;
inline constexpr int kNumFrequencies = 400;
inline constexpr int kGridSize = kNumTimbres * kNumAmplitudes * kNumFrequencies;
inline constexpr double kMinFrequency = 440.0;
inline constexpr double kMaxFrequency = 8000.0;

enum class Timbre : std::uint8_t { Sine = 0, Triangle = 1, Square = 2, Sawtooth = 3 };

inline constexpr std::array<Timbre, kNumTimbres> kAllTimbres{
    Timbre::Sine, Timbre::Triangle, Timbre::Square, Timbre::Sawtooth};

/// Lowercase name used in file names and manifests.
std::string_view timbre_name(Timbre t);
Timbre timbre_from_name(std::string_view name);
Timbre timbre_from_index(int index);

struct FactorTuple {
  Timbre timbre = Timbre::Sine;
  int amp_index = 0;
  int freq_index = 0;

  friend bool operator==(const FactorTuple&, const FactorTuple&) = default;
  friend auto operator<=>(const FactorTuple&, const FactorTuple&) = default;
};

/// Throws std::invalid_argument if an index is out of range.
void validate(const FactorTuple& f);

/// Position of the tuple in the full lexicographic grid; used as the
/// dataset id everywhere (stable across subsets).
int flat_id(const FactorTuple& f);
FactorTuple from_flat_id(int id);

/// Amplitude level i maps to (i + 1) / 20. Silence is not on the grid.
double amplitude_of(int amp_index);

/// Half-open linear grid 440 + k * 7560 / 400, so the top step stays below
/// the Nyquist frequency.
double frequency_of(int freq_index);

struct AudioClip {
  std::vector<double> samples;
  int sample_rate = kSampleRate;
  FactorTuple factors;
};

/// Phase-zero, non-band-limited oscillator for the tuple.
AudioClip synth_waveform(const FactorTuple& factors);

/// All 32,000 tuples in (timbre, amp_index, freq_index) lexicographic order.
std::vector<FactorTuple> factor_grid();

/// Keeps every n-th level on each axis (index % stride == 0).
struct GridStride {
  int timbre = 1;
  int amp = 1;
  int freq = 1;

  /// Parses "T,A,F"; throws std::invalid_argument on malformed input.
  static GridStride parse(std::string_view text);
  std::string to_string() const;
};

std::vector<FactorTuple> strided_grid(const GridStride& stride);

/// File name `{timbre}_{amp:02}_{freq:03}.wav`.
std::string clip_file_name(const FactorTuple& f);

struct ManifestRow {
  int id = 0;
  FactorTuple factors;
  double amplitude = 0.0;
  double frequency_hz = 0.0;
  std::string path;  // relative to the manifest's directory
};

struct DatasetManifest {
  std::filesystem::path root;
  std::vector<ManifestRow> rows;

  std::filesystem::path clip_path(const ManifestRow& row) const { return root / row.path; }
};

inline constexpr std::string_view kManifestName = "manifest.csv";
inline constexpr std::string_view kPartialMarker = ".generating";

/// Writes one WAV per tuple plus `manifest.csv`. Re-running yields
/// byte-identical files. On failure the partial marker is removed, no manifest
/// is left behind and std::runtime_error is thrown.
DatasetManifest generate_dataset(const std::filesystem::path& output_dir,
                                 const std::optional<GridStride>& subset = std::nullopt);

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& csv_path);
DatasetManifest read_manifest(const std::filesystem::path& csv_path);

}  // namespace syntone::synth
