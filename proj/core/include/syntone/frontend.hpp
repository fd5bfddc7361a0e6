#pragma once

#include "syntone/matrix.hpp"

#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

namespace syntone::frontend {

struct FrontendConfig {
  int sample_rate = 16000;
  int window_size = 2024;
  int hop_size = 512;
  int n_mels = 64;
  double fmin = 0.0;
  double fmax = 8000.0;
  double log_floor = 1e-10;

  /// Throws ConfigError on an inconsistent configuration.
  void validate() const;
  int n_bins() const { return window_size / 2 + 1; }
  /// Frames for a centered transform: floor(length / hop) + 1.
  int n_frames(std::size_t signal_length) const;
};

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct MelSpectrogram {
  Matrix values;  // n_mels x n_frames, natural-log energies
  int source_id = -1;

  std::size_t n_mels() const { return values.rows; }
  std::size_t n_frames() const { return values.cols; }
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Periodic Hann window of the given length.
std::vector<double> hann_window(int length);

/// Triangular filters, peaks equally spaced on the mel scale, apex weight 1.
/// Shape n_mels x (window_size / 2 + 1).
Matrix mel_filterbank(const FrontendConfig& cfg);

/// Reusable analysis state (window, filterbank and FFT plan) for one config.
/// Not thread-safe; use one instance per thread.
class MelFrontend {
public:
  explicit MelFrontend(const FrontendConfig& cfg);
  ~MelFrontend();
  MelFrontend(const MelFrontend&) = delete;
  MelFrontend& operator=(const MelFrontend&) = delete;

  const FrontendConfig& config() const { return cfg_; }
  const Matrix& filterbank() const { return filterbank_; }

  /// Centered, reflect-padded STFT magnitudes; (window/2 + 1) x n_frames.
  Matrix stft_magnitude(std::span<const double> signal);
  /// log(floor + filterbank * |STFT|^2); n_mels x n_frames.
  MelSpectrogram mel_spectrogram(std::span<const double> signal, int source_id = -1);

private:
  struct Plan;
  FrontendConfig cfg_;
  std::vector<double> window_;
  Matrix filterbank_;
  std::unique_ptr<Plan> plan_;
};

Matrix stft_magnitude(std::span<const double> signal, const FrontendConfig& cfg);
MelSpectrogram mel_spectrogram(std::span<const double> signal, const FrontendConfig& cfg,
                               int source_id = -1);

}  // namespace syntone::frontend
