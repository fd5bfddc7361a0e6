#pragma once

#include "syntone/metrics.hpp"
#include "syntone/network.hpp"
#include "syntone/objectives.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

namespace syntone::models {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
public:
  Adam(std::size_t n, const AdamConfig& cfg) : cfg_(cfg), m_(n, 0.0), v_(n, 0.0) {}
  void step(std::span<double> params, std::span<const double> grad);
  long steps_taken() const { return t_; }

private:
  AdamConfig cfg_;
  std::vector<double> m_, v_;
  long t_ = 0;
};

struct TrainConfig {
  AdamConfig optimizer{};
  AdamConfig disc_optimizer{1e-4, 0.9, 0.999, 1e-8};
  int batch_size = 64;
  int steps = 200;
  std::uint64_t seed = 0;
};

struct LossRecord {
  int step = 0;
  double loss = 0.0;
  double recon = 0.0;
  double kl = 0.0;
  double extra = 0.0;
};

struct TrainedModel {
  NetworkSpec spec;
  ObjectiveConfig objective;
  std::vector<double> params;
  std::vector<double> disc_params;  // Factor-VAE only
  std::vector<LossRecord> trace;
};

struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Seeded, single-threaded optimization. `features` is N x input_size, one
/// flattened mel-spectrogram per row. Throws DivergenceError on a non-finite
/// loss.
TrainedModel train(const Matrix& features, const ObjectiveConfig& objective, const TrainConfig& cfg,
                   const NetworkSpec& spec = {});

/// Posterior means (use_mean) or reparameterized samples for every row.
metrics::Representation extract_representation(const TrainedModel& model, const Matrix& features,
                                               const std::vector<synth::FactorTuple>& factors,
                                               bool use_mean = true, std::uint64_t seed = 0);

/// Ten equispaced values in [-3, 3].
std::vector<double> default_traversal_values();

/// Decodes `base_z` with coordinate `dim` replaced by each value.
std::vector<std::vector<double>> latent_traverse(const TrainedModel& model, std::span<const double> base_z,
                                                 int dim, std::span<const double> values);

void save_checkpoint(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_checkpoint(const std::filesystem::path& path);

/// CSV `step,loss,recon,kl,extra_term`.
void write_loss_trace(const std::vector<LossRecord>& trace, const std::filesystem::path& path);

}  // namespace syntone::models
