#pragma once

#include "syntone/matrix.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace syntone::models {

/// Convolutional VAE geometry. Every encoder stage is a kernel-4, stride-2,
/// pad-1 convolution producing ceil(n / 2) rows and columns; the decoder
/// mirrors the recorded stage sizes with transpose convolutions.
struct NetworkSpec {
  int n_mels = 64;
  int n_frames = 32;
  std::array<int, 4> channels{16, 32, 32, 64};
  int hidden = 128;
  int latent_dim = 8;

  /// 8x4 input, 2/2/2/2 channels, D = 3; used for gradient checks.
  static NetworkSpec tiny();

  void validate() const;
  int input_size() const { return n_mels * n_frames; }
  /// Spatial size after `stage` stride-2 stages (stage 0 is the input).
  std::array<int, 2> stage_shape(int stage) const;
  int flat_size() const;

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

struct ParamEntry {
  std::string name;
  std::vector<std::size_t> shape;
  std::size_t offset = 0;
  std::size_t size = 0;
};

/// Named slices of one flat parameter vector.
class ParameterLayout {
public:
  std::size_t add(std::string name, std::vector<std::size_t> shape);
  const std::vector<ParamEntry>& entries() const { return entries_; }
  const ParamEntry& at(std::size_t index) const { return entries_[index]; }
  const ParamEntry& find(std::string_view name) const;
  std::size_t total() const { return total_; }

private:
  std::vector<ParamEntry> entries_;
  std::size_t total_ = 0;
};

struct GaussianPosterior {
  std::vector<double> mu;
  std::vector<double> logvar;  // clamped to [-10, 10]
};

inline constexpr double kLogvarMin = -10.0;
inline constexpr double kLogvarMax = 10.0;
inline constexpr double kLeakySlope = 0.01;

class ConvVae {
public:
  explicit ConvVae(const NetworkSpec& spec);

  const NetworkSpec& spec() const { return spec_; }
  const ParameterLayout& layout() const { return layout_; }
  std::size_t param_count() const { return layout_.total(); }

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for every weight and bias.
  std::vector<double> init_params(std::uint64_t seed) const;

  struct EncoderTape {
    std::vector<double> input;
    std::array<std::vector<double>, 4> cols;  // im2col buffers
    std::array<std::vector<double>, 4> pre;
    std::array<std::vector<double>, 4> post;
    std::vector<double> fc1_pre, fc1_post;
    std::vector<double> raw_logvar;
    GaussianPosterior posterior;
  };

  struct DecoderTape {
    std::vector<double> z;
    std::vector<double> fc1_pre, fc1_post;
    std::vector<double> fc2_pre, fc2_post;
    std::array<std::vector<double>, 4> pre;
    std::array<std::vector<double>, 4> post;  // post[3] is the linear output
  };

  GaussianPosterior encode(std::span<const double> params, std::span<const double> x) const;
  std::vector<double> decode(std::span<const double> params, std::span<const double> z) const;

  void encode_forward(std::span<const double> params, std::span<const double> x, EncoderTape& tape) const;
  /// Accumulates parameter gradients into `grad`.
  void encode_backward(std::span<const double> params, const EncoderTape& tape,
                       std::span<const double> d_mu, std::span<const double> d_logvar,
                       std::span<double> grad) const;

  void decode_forward(std::span<const double> params, std::span<const double> z, DecoderTape& tape) const;
  /// Accumulates parameter gradients into `grad` and writes dL/dz into `d_z`.
  void decode_backward(std::span<const double> params, const DecoderTape& tape,
                       std::span<const double> d_out, std::span<double> grad,
                       std::span<double> d_z) const;

private:
  struct Conv {
    int in_ch, out_ch, in_h, in_w, out_h, out_w;
    std::size_t weight, bias;  // layout indices
  };
  struct Dense {
    int in, out;
    std::size_t weight, bias;
  };

  NetworkSpec spec_;
  ParameterLayout layout_;
  std::array<Conv, 4> enc_conv_{};
  Dense enc_fc1_{}, enc_fc2_{};
  Dense dec_fc1_{}, dec_fc2_{};
  std::array<Conv, 4> dec_deconv_{};  // in_* is the small side, out_* the large side
};

}  // namespace syntone::models
