#pragma once

#include "syntone/matrix.hpp"
#include "syntone/synth.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace syntone::metrics {

/// Ground-truth factors in a fixed order: timbre, amp_index, freq_index.
inline constexpr int kNumFactors = 3;
inline constexpr std::array<const char*, kNumFactors> kFactorNames{"timbre", "amp_index", "freq_index"};
inline constexpr int kDefaultBins = 20;
/// Latents whose largest MI falls below this (nats) are ignored by modularity.
inline constexpr double kDeadLatentThreshold = 1e-6;

/// Raised when the evaluation data cannot support a score (zero factor
/// entropy, every latent dead, a class missing from a split).
struct DegenerateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Representation {
  Matrix codes;  // N x D
  std::vector<synth::FactorTuple> factors;

  std::size_t size() const { return codes.rows; }
  std::size_t latent_dim() const { return codes.cols; }
  /// N >= 2, D >= 1, rows aligned with factors.
  void validate() const;
  /// Rows selected by `indices`, in that order.
  Representation subset(std::span<const std::size_t> indices) const;
};

/// Integer label of factor k for a tuple (the raw grid index).
int factor_label(const synth::FactorTuple& f, int k);

/// Per-column equal-width binning over [min, max]; the maximum lands in the
/// top bin and constant columns map to bin 0. Result is N x D, row-major.
std::vector<int> discretize(const Matrix& codes, int n_bins = kDefaultBins);

/// Plug-in entropy in nats.
double entropy(std::span<const int> labels);

struct MIMatrix {
  Matrix mi;             // D x K, nats
  Matrix joint_entropy;  // D x K, H(z_j, v_k)
  std::vector<double> latent_entropy;  // D, H(z_j) of the discretized latent
  std::vector<double> factor_entropy;  // K, H(v_k)

  std::size_t latent_dim() const { return mi.rows; }
};

MIMatrix mi_matrix(const Representation& rep, int n_bins = kDefaultBins);

double mig(const MIMatrix& m);
double jemmig(const MIMatrix& m);
double dcimig(const MIMatrix& m);
double modularity(const MIMatrix& m);

/// Per-(latent, factor) held-out balanced accuracy of a one-dimensional
/// nearest-centroid classifier on a seeded 50/50 split. D x K.
Matrix sap_scores(const Representation& rep, std::uint64_t seed);
double sap(const Representation& rep, std::uint64_t seed);

struct MetricStat {
  double mean = 0.0;
  double std = 0.0;
  std::optional<std::string> error;

  bool ok() const { return !error.has_value(); }
};

/// Field order follows the published table: MIG, SAP, DCIMIG, JEMMIG,
/// Modularity.
struct MetricReport {
  MetricStat mig;
  MetricStat sap;
  MetricStat dcimig;
  MetricStat jemmig;
  MetricStat modularity;
  int runs = 0;
};

/// Row indices of one evaluation resample: each factor axis keeps a seeded
/// random subset of its levels so that roughly `fraction` of the rows
/// survive and the kept rows stay a product of per-axis level sets.
std::vector<std::size_t> resample_rows(const Representation& rep, std::uint64_t seed,
                                       double fraction = 0.8);

struct EvalOptions {
  int n_bins = kDefaultBins;
  double resample_fraction = 0.8;
};

/// Scores `runs` seeded resamples and reports mean and (population) std.
MetricReport evaluate(const Representation& rep, int runs, std::uint64_t seed,
                      const EvalOptions& options = {});

}  // namespace syntone::metrics
