#include "syntone/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <stdexcept>

namespace fs = std::filesystem;
namespace h = syntone::harness;

namespace {

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

fs::path resolve(const fs::path& p, std::string_view default_name) {
  if (fs::is_directory(p)) return p / default_name;
  return p;
}

std::optional<syntone::synth::GridStride> parse_subset(const std::string& text) {
  if (text.empty()) return std::nullopt;
  try {
    return syntone::synth::GridStride::parse(text);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

h::Split parse_split(const std::string& text) {
  try {
    return h::split_from_name(text);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

void print_metric(const char* name, const syntone::metrics::MetricStat& s) {
  if (s.error) {
    std::printf("  %-11s error: %s\n", name, s.error->c_str());
  } else {
    std::printf("  %-11s %.6f +/- %.6f\n", name, s.mean, s.std);
  }
}

void print_report(const syntone::report::ModelReport& r) {
  std::printf("%s (%d runs)\n", r.model.c_str(), r.metrics.runs);
  print_metric("MIG", r.metrics.mig);
  print_metric("SAP", r.metrics.sap);
  print_metric("DCIMIG", r.metrics.dcimig);
  print_metric("JEMMIG", r.metrics.jemmig);
  print_metric("Mod. Score", r.metrics.modularity);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SynTone dataset generation, VAE training and disentanglement scoring"};
  app.require_subcommand(1);
  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "Master seed")->capture_default_str();

  // generate
  auto* gen = app.add_subcommand("generate", "Synthesize the tone grid as WAV files plus manifest.csv");
  h::GenerateOptions gen_opts;
  std::string gen_subset;
  gen->add_option("--out", gen_opts.out, "Output directory")->required();
  gen->add_option("--subset", gen_subset, "Grid strides T,A,F (e.g. 1,4,20 for 400 clips)");
  gen->add_option("--seed", seed, "Master seed");

  // featurize
  auto* feat = app.add_subcommand("featurize", "Compute log-mel spectrograms for every clip");
  h::FeaturizeOptions feat_opts;
  feat->add_option("--manifest", feat_opts.manifest, "Dataset manifest.csv or its directory")->required();
  feat->add_option("--out", feat_opts.out, "Output directory")->required();
  feat->add_option("--window", feat_opts.frontend.window_size, "STFT window length")->capture_default_str();
  feat->add_option("--hop", feat_opts.frontend.hop_size, "STFT hop length")->capture_default_str();
  feat->add_option("--n-mels", feat_opts.frontend.n_mels, "Mel band count")->capture_default_str();
  feat->add_option("--fmin", feat_opts.frontend.fmin, "Lowest filter edge in Hz")->capture_default_str();
  feat->add_option("--fmax", feat_opts.frontend.fmax, "Highest filter edge in Hz")->capture_default_str();
  feat->add_option("--seed", seed, "Master seed");

  // train
  auto* train = app.add_subcommand("train", "Train one VAE-family model");
  h::TrainOptions train_opts;
  std::string model_name = "vae";
  std::optional<double> beta, gamma, alpha, tc_gamma;
  std::string train_split = "train";
  train->add_option("--features", train_opts.features, "features.csv or its directory")->required();
  train->add_option("--out", train_opts.out, "Output directory")->required();
  train->add_option("--model", model_name, "vae | beta-vae | factor-vae | beta-tcvae")->capture_default_str();
  train->add_option("--beta", beta, "KL weight (beta-vae) or TC weight (beta-tcvae)");
  train->add_option("--gamma", gamma, "TC surrogate weight (factor-vae)");
  train->add_option("--alpha", alpha, "Index-code MI weight (beta-tcvae)");
  train->add_option("--tc-gamma", tc_gamma, "Dimension-wise KL weight (beta-tcvae)");
  train->add_option("--steps", train_opts.train.steps, "Optimization steps")->capture_default_str();
  train->add_option("--batch-size", train_opts.train.batch_size, "Minibatch size")->capture_default_str();
  train->add_option("--lr", train_opts.train.optimizer.lr, "Adam learning rate")->capture_default_str();
  train->add_option("--split", train_split, "all | train | heldout")->capture_default_str();
  train->add_option("--seed", seed, "Master seed");

  // eval
  auto* eval = app.add_subcommand("eval", "Score a checkpoint or a codes tensor with the five metrics");
  h::EvalOptions eval_opts;
  std::string eval_split = "all";
  bool eval_sample = false;
  eval->add_option("--checkpoint", eval_opts.checkpoint, "Checkpoint file or training directory");
  eval->add_option("--features", eval_opts.features, "features.csv or its directory");
  eval->add_option("--codes", eval_opts.codes, "Precomputed codes.synt (with codes.csv beside it)");
  eval->add_option("--manifest", eval_opts.manifest, "Dataset manifest.csv or its directory")->required();
  eval->add_option("--out", eval_opts.out, "Output directory")->required();
  eval->add_option("--runs", eval_opts.runs, "Evaluation runs")->capture_default_str();
  eval->add_option("--split", eval_split, "all | train | heldout")->capture_default_str();
  eval->add_flag("--sample", eval_sample, "Score sampled codes instead of posterior means");
  eval->add_option("--label", eval_opts.label, "Row name in the report");
  eval->add_option("--seed", seed, "Master seed");

  // probe
  auto* probe = app.add_subcommand("probe", "Score synthetic oracle codes");
  h::ProbeOptions probe_opts;
  std::string probe_kind = "perfect";
  std::string probe_subset = "1,4,20";
  std::optional<std::size_t> probe_rows;
  probe->add_option("--kind", probe_kind, "perfect | duplicated | entangled | noisy | random | constant")
      ->capture_default_str();
  probe->add_option("--sigma", probe_opts.sigma, "Noise level for the noisy probe")->capture_default_str();
  probe->add_option("--subset", probe_subset, "Grid strides T,A,F")->capture_default_str();
  probe->add_option("--rows", probe_rows, "Cycle the grid to this many rows");
  probe->add_option("--runs", probe_opts.runs, "Evaluation runs")->capture_default_str();
  probe->add_option("--out", probe_opts.out, "Output directory");
  probe->add_option("--seed", seed, "Master seed");

  // traverse
  auto* trav = app.add_subcommand("traverse", "Decode latent traversals, reconstructions and random samples");
  h::TraverseOptions trav_opts;
  bool no_png = false;
  trav->add_option("--checkpoint", trav_opts.checkpoint, "Checkpoint file or training directory")->required();
  trav->add_option("--features", trav_opts.features, "features.csv for held-out reconstructions");
  trav->add_option("--out", trav_opts.out, "Output directory")->required();
  trav->add_option("--dims", trav_opts.dims, "Latent dimensions to traverse (default: all)");
  trav->add_option("--samples", trav_opts.samples, "Random codes to decode")->capture_default_str();
  trav->add_flag("--no-png", no_png, "Skip heatmap images");
  trav->add_option("--seed", seed, "Master seed");

  // report
  auto* rep = app.add_subcommand("report", "Merge per-model report CSVs into one Markdown table");
  h::ReportOptions rep_opts;
  rep->add_option("inputs", rep_opts.inputs, "report.csv files or eval directories")->required();
  rep->add_option("--out", rep_opts.out, "Markdown output path (CSV written alongside)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      gen_opts.subset = parse_subset(gen_subset);
      gen_opts.seed = seed;
      const auto s = h::cmd_generate(gen_opts);
      std::printf("generated %zu clips -> %s\n", s.clips, s.manifest.c_str());
    } else if (feat->parsed()) {
      feat_opts.manifest = resolve(feat_opts.manifest, syntone::synth::kManifestName);
      feat_opts.seed = seed;
      const auto s = h::cmd_featurize(feat_opts);
      std::printf("featurized %zu clips -> %s\n", s.rows.size(),
                  (feat_opts.out / h::kFeaturesManifestName).c_str());
    } else if (train->parsed()) {
      namespace m = syntone::models;
      m::ObjectiveKind kind;
      try {
        kind = m::model_kind_from_name(model_name);
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      switch (kind) {
        case m::ObjectiveKind::Vanilla: train_opts.objective = m::ObjectiveConfig::vanilla(); break;
        case m::ObjectiveKind::Beta: train_opts.objective = m::ObjectiveConfig::beta_vae(beta.value_or(4.0)); break;
        case m::ObjectiveKind::FactorVae:
          train_opts.objective = m::ObjectiveConfig::factor_vae(gamma.value_or(10.0));
          break;
        case m::ObjectiveKind::BetaTcVae:
          train_opts.objective =
              m::ObjectiveConfig::beta_tcvae(alpha.value_or(1.0), beta.value_or(6.0), tc_gamma.value_or(1.0));
          break;
      }
      train_opts.features = resolve(train_opts.features, h::kFeaturesManifestName);
      train_opts.split = parse_split(train_split);
      train_opts.seed = seed;
      const auto s = h::cmd_train(train_opts);
      std::printf("trained %s on %zu clips: loss %.4f -> %.4f\n", model_name.c_str(), s.clips, s.initial_loss,
                  s.final_loss);
    } else if (eval->parsed()) {
      if (eval_opts.codes.empty() && (eval_opts.checkpoint.empty() || eval_opts.features.empty())) {
        throw UsageError("eval needs --codes or both --checkpoint and --features");
      }
      if (!eval_opts.checkpoint.empty()) eval_opts.checkpoint = resolve(eval_opts.checkpoint, h::kCheckpointName);
      if (!eval_opts.features.empty()) eval_opts.features = resolve(eval_opts.features, h::kFeaturesManifestName);
      eval_opts.manifest = resolve(eval_opts.manifest, syntone::synth::kManifestName);
      eval_opts.split = parse_split(eval_split);
      eval_opts.use_mean = !eval_sample;
      eval_opts.seed = seed;
      print_report(h::cmd_eval(eval_opts));
    } else if (probe->parsed()) {
      try {
        probe_opts.kind = syntone::metrics::probe_kind_from_name(probe_kind);
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      probe_opts.stride = *parse_subset(probe_subset);
      probe_opts.rows = probe_rows;
      probe_opts.seed = seed;
      print_report(h::cmd_probe(probe_opts));
    } else if (trav->parsed()) {
      trav_opts.checkpoint = resolve(trav_opts.checkpoint, h::kCheckpointName);
      if (!trav_opts.features.empty()) trav_opts.features = resolve(trav_opts.features, h::kFeaturesManifestName);
      trav_opts.png = !no_png;
      trav_opts.seed = seed;
      const auto s = h::cmd_traverse(trav_opts);
      std::printf("wrote %zu traversal grids, %zu reconstruction pairs, %zu samples\n", s.traversal_grids,
                  s.reconstruction_pairs, s.random_samples);
    } else if (rep->parsed()) {
      std::cout << h::cmd_report(rep_opts);
    }
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
