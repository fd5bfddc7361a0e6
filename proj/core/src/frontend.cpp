#include "syntone/frontend.hpp"

#include <fftw3.h>

#include <cmath>
#include <numbers>
#include <string>

namespace syntone::frontend {

void FrontendConfig::validate() const {
  if (sample_rate <= 0) throw ConfigError("sample_rate must be positive");
  if (window_size < 2) throw ConfigError("window_size must be >= 2");
  if (hop_size < 1 || hop_size > window_size) throw ConfigError("hop_size must be in [1, window_size]");
  if (n_mels < 1) throw ConfigError("n_mels must be >= 1");
  if (fmin < 0.0 || fmax <= fmin) throw ConfigError("need 0 <= fmin < fmax");
  if (fmax > sample_rate / 2.0) throw ConfigError("fmax exceeds the Nyquist frequency");
  if (!(log_floor > 0.0)) throw ConfigError("log_floor must be positive");
}

int FrontendConfig::n_frames(std::size_t signal_length) const {
  return static_cast<int>(signal_length / static_cast<std::size_t>(hop_size)) + 1;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<double> hann_window(int length) {
  std::vector<double> w(static_cast<std::size_t>(length));
  for (int n = 0; n < length; ++n) {
    w[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / length);
  }
  return w;
}

Matrix mel_filterbank(const FrontendConfig& cfg) {
  cfg.validate();
  const int n_bins = cfg.n_bins();
  const double mel_lo = hz_to_mel(cfg.fmin);
  const double mel_hi = hz_to_mel(cfg.fmax);
  std::vector<double> edges(static_cast<std::size_t>(cfg.n_mels) + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) / (cfg.n_mels + 1));
  }
  Matrix fb(static_cast<std::size_t>(cfg.n_mels), static_cast<std::size_t>(n_bins));
  for (int m = 0; m < cfg.n_mels; ++m) {
    const double lo = edges[m], centre = edges[m + 1], hi = edges[m + 2];
    bool any = false;
    for (int b = 0; b < n_bins; ++b) {
      const double f = static_cast<double>(b) * cfg.sample_rate / cfg.window_size;
      const double rising = (f - lo) / (centre - lo);
      const double falling = (hi - f) / (hi - centre);
      const double w = std::max(0.0, std::min(rising, falling));
      fb(m, b) = w;
      any = any || w > 0.0;
    }
    if (!any) {
      throw ConfigError("mel filter " + std::to_string(m) +
                        " is empty; n_mels too large for the FFT resolution");
    }
  }
  return fb;
}

struct MelFrontend::Plan {
  double* in = nullptr;
  fftw_complex* out = nullptr;
  fftw_plan plan = nullptr;

  explicit Plan(int n) {
    in = fftw_alloc_real(static_cast<std::size_t>(n));
    out = fftw_alloc_complex(static_cast<std::size_t>(n / 2 + 1));
    plan = fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE);
  }
  ~Plan() {
    fftw_destroy_plan(plan);
    fftw_free(in);
    fftw_free(out);
  }
};

MelFrontend::MelFrontend(const FrontendConfig& cfg)
    : cfg_(cfg), window_(hann_window(cfg.window_size)), filterbank_(mel_filterbank(cfg)),
      plan_(std::make_unique<Plan>(cfg.window_size)) {}

MelFrontend::~MelFrontend() = default;

Matrix MelFrontend::stft_magnitude(std::span<const double> signal) {
  const int pad = cfg_.window_size / 2;
  const auto length = static_cast<long>(signal.size());
  if (length < 1 || pad >= length) {
    throw ConfigError("window of " + std::to_string(cfg_.window_size) +
                      " samples is larger than the padded signal");
  }
  const int frames = cfg_.n_frames(signal.size());
  const int bins = cfg_.n_bins();
  Matrix mag(static_cast<std::size_t>(bins), static_cast<std::size_t>(frames));
  for (int t = 0; t < frames; ++t) {
    const long start = static_cast<long>(t) * cfg_.hop_size - pad;
    for (int n = 0; n < cfg_.window_size; ++n) {
      long i = start + n;
      if (i < 0) i = -i;
      if (i >= length) i = 2 * (length - 1) - i;
      plan_->in[n] = (i >= 0 && i < length) ? signal[static_cast<std::size_t>(i)] * window_[n] : 0.0;
    }
    fftw_execute(plan_->plan);
    for (int b = 0; b < bins; ++b) {
      mag(b, t) = std::hypot(plan_->out[b][0], plan_->out[b][1]);
    }
  }
  return mag;
}

MelSpectrogram MelFrontend::mel_spectrogram(std::span<const double> signal, int source_id) {
  const Matrix mag = stft_magnitude(signal);
  MelSpectrogram out;
  out.source_id = source_id;
  out.values = Matrix(filterbank_.rows, mag.cols);
  for (std::size_t m = 0; m < filterbank_.rows; ++m) {
    const auto weights = filterbank_.row(m);
    for (std::size_t t = 0; t < mag.cols; ++t) {
      double energy = 0.0;
      for (std::size_t b = 0; b < mag.rows; ++b) {
        if (weights[b] == 0.0) continue;
        const double a = mag(b, t);
        energy += weights[b] * a * a;
      }
      out.values(m, t) = std::log(cfg_.log_floor + energy);
    }
  }
  return out;
}

Matrix stft_magnitude(std::span<const double> signal, const FrontendConfig& cfg) {
  MelFrontend fe(cfg);
  return fe.stft_magnitude(signal);
}

MelSpectrogram mel_spectrogram(std::span<const double> signal, const FrontendConfig& cfg,
                               int source_id) {
  MelFrontend fe(cfg);
  return fe.mel_spectrogram(signal, source_id);
}

}  // namespace syntone::frontend
