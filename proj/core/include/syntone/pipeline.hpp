#pragma once

#include "syntone/frontend.hpp"
#include "syntone/metrics.hpp"
#include "syntone/objectives.hpp"
#include "syntone/probes.hpp"
#include "syntone/report.hpp"
#include "syntone/synth.hpp"
#include "syntone/trainer.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

/// Stage entry points behind the `syntone` CLI. Every command writes a
/// `run_config.json` describing its inputs next to its outputs.
namespace syntone::harness {

namespace fs = std::filesystem;

inline constexpr std::string_view kRunConfigName = "run_config.json";
inline constexpr std::string_view kFeaturesManifestName = "features.csv";

/// Deterministic 90/10 split keyed on the dataset id.
bool is_heldout(int id);

enum class Split { All, Train, Heldout };
Split split_from_name(std::string_view name);
std::string_view split_name(Split s);
bool in_split(int id, Split s);

// generate ------------------------------------------------------------------

struct GenerateOptions {
  fs::path out;
  std::optional<synth::GridStride> subset;
  std::uint64_t seed = 0;
};

struct GenerateSummary {
  std::size_t clips = 0;
  fs::path manifest;
};

GenerateSummary cmd_generate(const GenerateOptions& opts);

// featurize -----------------------------------------------------------------

struct FeatureRow {
  int id = 0;
  std::string path;  // relative to the features manifest
  int n_mels = 0;
  int n_frames = 0;
};

struct FeatureSet {
  fs::path root;
  std::vector<FeatureRow> rows;
};

struct FeaturizeOptions {
  fs::path manifest;
  fs::path out;
  frontend::FrontendConfig frontend{};
  std::uint64_t seed = 0;
};

FeatureSet cmd_featurize(const FeaturizeOptions& opts);
FeatureSet read_feature_set(const fs::path& features_csv);
void write_feature_set(const FeatureSet& set, const fs::path& features_csv);

/// Loads the listed feature files into an N x (n_mels * n_frames) matrix.
Matrix load_features(const FeatureSet& set, const std::vector<std::size_t>& rows);
/// Indices of rows whose id falls in `split`.
std::vector<std::size_t> rows_in_split(const FeatureSet& set, Split split);

// train ---------------------------------------------------------------------

struct TrainOptions {
  fs::path features;  // features.csv
  fs::path out;
  models::ObjectiveConfig objective{};
  models::TrainConfig train{};  // train.seed is ignored; derived from `seed`
  Split split = Split::Train;
  std::uint64_t seed = 0;
};

struct TrainSummary {
  fs::path checkpoint;
  fs::path loss_trace;
  std::size_t clips = 0;
  double initial_loss = 0.0;
  double final_loss = 0.0;
};

inline constexpr std::string_view kCheckpointName = "checkpoint.synt";
inline constexpr std::string_view kLossTraceName = "loss.csv";

TrainSummary cmd_train(const TrainOptions& opts);

// eval ----------------------------------------------------------------------

struct EvalOptions {
  fs::path checkpoint;  // either checkpoint + features ...
  fs::path features;
  fs::path codes;       // ... or a codes tensor with its codes.csv index
  fs::path manifest;    // dataset manifest with the factors
  fs::path out;
  int runs = 10;
  Split split = Split::All;
  bool use_mean = true;
  std::string label;  // report row name; defaults to the checkpoint's model
  std::uint64_t seed = 0;
};

inline constexpr std::string_view kReportCsvName = "report.csv";
inline constexpr std::string_view kReportMarkdownName = "report.md";
inline constexpr std::string_view kCodesName = "codes.synt";
inline constexpr std::string_view kCodesIndexName = "codes.csv";

report::ModelReport cmd_eval(const EvalOptions& opts);

/// Codes tensor (N x D) plus `row,id` index, joined with the manifest on id.
void write_codes(const metrics::Representation& rep, const std::vector<int>& ids, const fs::path& dir);
metrics::Representation read_codes(const fs::path& codes, const synth::DatasetManifest& manifest);

// probe ---------------------------------------------------------------------

struct ProbeOptions {
  metrics::ProbeKind kind = metrics::ProbeKind::Perfect;
  double sigma = 0.1;
  synth::GridStride stride{1, 4, 20};
  std::optional<std::size_t> rows;
  int runs = 10;
  std::uint64_t seed = 0;
  fs::path out;  // optional
};

report::ModelReport cmd_probe(const ProbeOptions& opts);

// traverse ------------------------------------------------------------------

struct TraverseOptions {
  fs::path checkpoint;
  fs::path features;  // for held-out reconstructions; optional
  fs::path out;
  std::vector<int> dims;  // empty: every latent
  int samples = 8;        // decoded standard-normal codes
  bool png = true;
  std::uint64_t seed = 0;
};

struct TraverseSummary {
  std::size_t traversal_grids = 0;
  std::size_t reconstruction_pairs = 0;
  std::size_t random_samples = 0;
};

TraverseSummary cmd_traverse(const TraverseOptions& opts);

// report --------------------------------------------------------------------

struct ReportOptions {
  std::vector<fs::path> inputs;  // report.csv files or directories holding one
  fs::path out;                  // Markdown file; CSV written alongside
};

std::string cmd_report(const ReportOptions& opts);

}  // namespace syntone::harness
