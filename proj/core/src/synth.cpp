#include "syntone/synth.hpp"

#include "syntone/csv.hpp"
#include "syntone/wav.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <system_error>

namespace syntone::synth {

namespace fs = std::filesystem;

std::string_view timbre_name(Timbre t) {
  switch (t) {
    case Timbre::Sine: return "sine";
    case Timbre::Triangle: return "triangle";
    case Timbre::Square: return "square";
    case Timbre::Sawtooth: return "sawtooth";
  }
  throw std::invalid_argument("unknown timbre");
}

Timbre timbre_from_name(std::string_view name) {
  for (Timbre t : kAllTimbres) {
    if (timbre_name(t) == name) return t;
  }
  throw std::invalid_argument("unknown timbre name '" + std::string(name) + "'");
}

Timbre timbre_from_index(int index) {
  if (index < 0 || index >= kNumTimbres) {
    throw std::invalid_argument("timbre index out of range: " + std::to_string(index));
  }
  return static_cast<Timbre>(index);
}

void validate(const FactorTuple& f) {
  const int t = static_cast<int>(f.timbre);
  if (t < 0 || t >= kNumTimbres) throw std::invalid_argument("timbre out of range");
  if (f.amp_index < 0 || f.amp_index >= kNumAmplitudes) {
    throw std::invalid_argument("amp_index out of range: " + std::to_string(f.amp_index));
  }
  if (f.freq_index < 0 || f.freq_index >= kNumFrequencies) {
    throw std::invalid_argument("freq_index out of range: " + std::to_string(f.freq_index));
  }
}

int flat_id(const FactorTuple& f) {
  validate(f);
  return (static_cast<int>(f.timbre) * kNumAmplitudes + f.amp_index) * kNumFrequencies + f.freq_index;
}

FactorTuple from_flat_id(int id) {
  if (id < 0 || id >= kGridSize) throw std::invalid_argument("id out of range: " + std::to_string(id));
  return FactorTuple{timbre_from_index(id / (kNumAmplitudes * kNumFrequencies)),
                     (id / kNumFrequencies) % kNumAmplitudes, id % kNumFrequencies};
}

double amplitude_of(int amp_index) {
  if (amp_index < 0 || amp_index >= kNumAmplitudes) {
    throw std::invalid_argument("amp_index out of range: " + std::to_string(amp_index));
  }
  return static_cast<double>(amp_index + 1) / kNumAmplitudes;
}

double frequency_of(int freq_index) {
  if (freq_index < 0 || freq_index >= kNumFrequencies) {
    throw std::invalid_argument("freq_index out of range: " + std::to_string(freq_index));
  }
  return kMinFrequency + freq_index * (kMaxFrequency - kMinFrequency) / kNumFrequencies;
}

AudioClip synth_waveform(const FactorTuple& factors) {
  validate(factors);
  const double a = amplitude_of(factors.amp_index);
  const double f = frequency_of(factors.freq_index);
  const double sr = kSampleRate;

  AudioClip clip;
  clip.factors = factors;
  clip.samples.resize(kClipLength);
  for (int n = 0; n < kClipLength; ++n) {
    const double cycles = f * n / sr;
    double v = 0.0;
    switch (factors.timbre) {
      case Timbre::Sine:
        v = std::sin(2.0 * std::numbers::pi * cycles);
        break;
      case Timbre::Square:
        v = std::sin(2.0 * std::numbers::pi * cycles) >= 0.0 ? 1.0 : -1.0;
        break;
      case Timbre::Sawtooth: {
        const double frac = cycles - std::floor(cycles);
        v = 2.0 * frac - 1.0;
        break;
      }
      case Timbre::Triangle: {
        const double frac = cycles - std::floor(cycles);
        v = 2.0 * std::abs(2.0 * frac - 1.0) - 1.0;
        break;
      }
    }
    clip.samples[n] = a * v;
  }
  return clip;
}

std::vector<FactorTuple> factor_grid() { return strided_grid(GridStride{}); }

GridStride GridStride::parse(std::string_view text) {
  const auto parts = csv::split(text);
  if (parts.size() != 3) throw std::invalid_argument("subset must be T,A,F (got '" + std::string(text) + "')");
  GridStride s{csv::parse_int(parts[0]), csv::parse_int(parts[1]), csv::parse_int(parts[2])};
  if (s.timbre < 1 || s.amp < 1 || s.freq < 1) throw std::invalid_argument("subset strides must be >= 1");
  return s;
}

std::string GridStride::to_string() const {
  return std::to_string(timbre) + "," + std::to_string(amp) + "," + std::to_string(freq);
}

std::vector<FactorTuple> strided_grid(const GridStride& stride) {
  if (stride.timbre < 1 || stride.amp < 1 || stride.freq < 1) {
    throw std::invalid_argument("grid strides must be >= 1");
  }
  std::vector<FactorTuple> grid;
  for (int t = 0; t < kNumTimbres; t += stride.timbre) {
    for (int a = 0; a < kNumAmplitudes; a += stride.amp) {
      for (int f = 0; f < kNumFrequencies; f += stride.freq) {
        grid.push_back(FactorTuple{static_cast<Timbre>(t), a, f});
      }
    }
  }
  return grid;
}

std::string clip_file_name(const FactorTuple& f) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%02d_%03d.wav", std::string(timbre_name(f.timbre)).c_str(),
                f.amp_index, f.freq_index);
  return buf;
}

DatasetManifest generate_dataset(const fs::path& output_dir, const std::optional<GridStride>& subset) {
  const auto grid = strided_grid(subset.value_or(GridStride{}));
  const fs::path marker = output_dir / kPartialMarker;
  const fs::path manifest_path = output_dir / kManifestName;

  DatasetManifest manifest;
  manifest.root = output_dir;
  try {
    fs::create_directories(output_dir);
    fs::remove(manifest_path);
    {
      std::ofstream m(marker, std::ios::trunc);
      if (!m) throw std::runtime_error("cannot write to " + output_dir.string());
    }
    manifest.rows.reserve(grid.size());
    for (const auto& f : grid) {
      const auto clip = synth_waveform(f);
      ManifestRow row{flat_id(f), f, amplitude_of(f.amp_index), frequency_of(f.freq_index),
                      clip_file_name(f)};
      wav::write_pcm16(output_dir / row.path, clip.samples, clip.sample_rate);
      manifest.rows.push_back(std::move(row));
    }
    write_manifest(manifest, manifest_path);
    fs::remove(marker);
  } catch (const std::exception& e) {
    std::error_code ec;
    fs::remove(marker, ec);
    fs::remove(manifest_path, ec);
    throw std::runtime_error(std::string("generate_dataset failed: ") + e.what());
  }
  return manifest;
}

void write_manifest(const DatasetManifest& manifest, const fs::path& csv_path) {
  csv::Table t;
  t.header = {"id", "timbre", "amp_index", "amplitude", "freq_index", "frequency_hz", "path"};
  t.rows.reserve(manifest.rows.size());
  for (const auto& r : manifest.rows) {
    t.rows.push_back({std::to_string(r.id), std::string(timbre_name(r.factors.timbre)),
                      std::to_string(r.factors.amp_index), csv::format_double(r.amplitude),
                      std::to_string(r.factors.freq_index), csv::format_double(r.frequency_hz),
                      r.path});
  }
  csv::write(csv_path, t);
}

DatasetManifest read_manifest(const fs::path& csv_path) {
  const auto t = csv::read(csv_path);
  const auto c_id = t.column("id"), c_t = t.column("timbre"), c_a = t.column("amp_index"),
             c_amp = t.column("amplitude"), c_f = t.column("freq_index"),
             c_hz = t.column("frequency_hz"), c_p = t.column("path");
  DatasetManifest m;
  m.root = csv_path.parent_path();
  m.rows.reserve(t.rows.size());
  for (const auto& r : t.rows) {
    ManifestRow row;
    row.id = csv::parse_int(r[c_id]);
    row.factors = FactorTuple{timbre_from_name(r[c_t]), csv::parse_int(r[c_a]), csv::parse_int(r[c_f])};
    validate(row.factors);
    row.amplitude = csv::parse_double(r[c_amp]);
    row.frequency_hz = csv::parse_double(r[c_hz]);
    row.path = r[c_p];
    m.rows.push_back(std::move(row));
  }
  return m;
}

}  // namespace syntone::synth
