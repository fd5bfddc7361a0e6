#include "syntone/pipeline.hpp"
#include "syntone/csv.hpp"
#include "syntone/rng.hpp"
#include "syntone/tensor_io.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace syntone;
using namespace syntone::harness;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// 200-clip dataset and features shared by the tests in this file.
class PipelineTest : public ::testing::Test {
protected:
  static void SetUpTestSuite() {
    root_ = new fs::path(test::scratch_dir("pipeline"));
    GenerateOptions g;
    g.out = *root_ / "data";
    g.subset = synth::GridStride{1, 4, 40};
    cmd_generate(g);
    FeaturizeOptions f;
    f.manifest = *root_ / "data" / synth::kManifestName;
    f.out = *root_ / "feat";
    cmd_featurize(f);
  }
  static void TearDownTestSuite() { delete root_; }

  static fs::path data() { return *root_ / "data"; }
  static fs::path features() { return *root_ / "feat" / kFeaturesManifestName; }
  static fs::path dir(const std::string& name) { return *root_ / name; }

  static TrainOptions quick_train(const std::string& out, models::ObjectiveConfig obj) {
    TrainOptions t;
    t.features = features();
    t.out = dir(out);
    t.objective = obj;
    t.train.steps = 3;
    t.train.batch_size = 8;
    t.seed = 5;
    return t;
  }

  static fs::path* root_;
};

fs::path* PipelineTest::root_ = nullptr;

}  // namespace

TEST(Split, HashIsStableAndRoughlyTenPercent) {
  int held = 0;
  for (int id = 0; id < synth::kGridSize; ++id) held += is_heldout(id);
  EXPECT_NEAR(held / static_cast<double>(synth::kGridSize), 0.1, 0.01);
  EXPECT_EQ(is_heldout(1234), fnv1a64("1234") % 10 == 0);
  EXPECT_TRUE(in_split(5, Split::All));
  EXPECT_NE(in_split(7, Split::Train), in_split(7, Split::Heldout));
  EXPECT_EQ(split_from_name("heldout"), Split::Heldout);
  EXPECT_THROW(split_from_name("test"), std::invalid_argument);
}

TEST_F(PipelineTest, GenerateCountsAndConfig) {
  EXPECT_EQ(synth::read_manifest(data() / synth::kManifestName).rows.size(), 200u);
  EXPECT_TRUE(fs::exists(data() / kRunConfigName));
}

TEST_F(PipelineTest, FeaturesAre64By32) {
  const auto set = read_feature_set(features());
  ASSERT_EQ(set.rows.size(), 200u);
  for (const auto& r : set.rows) {
    EXPECT_EQ(r.n_mels, 64);
    EXPECT_EQ(r.n_frames, 32);
    const auto t = io::read_tensor(set.root / r.path);
    EXPECT_EQ(t.dims, (std::vector<std::uint32_t>{64, 32}));
  }
  const auto t = csv::read(features());
  EXPECT_EQ(t.header, (std::vector<std::string>{"id", "path", "n_mels", "n_frames"}));
  EXPECT_TRUE(fs::exists(features().parent_path() / kRunConfigName));
}

TEST_F(PipelineTest, FeaturizeRerunIsByteIdentical) {
  FeaturizeOptions f;
  f.manifest = data() / synth::kManifestName;
  f.out = dir("feat_again");
  const auto set = cmd_featurize(f);
  for (const auto& r : set.rows) {
    ASSERT_EQ(io::read_file(f.out / r.path), io::read_file(features().parent_path() / r.path)) << r.id;
  }
  EXPECT_EQ(slurp(f.out / kFeaturesManifestName), slurp(features()));
}

TEST_F(PipelineTest, FeaturizeMissingWavNamesId) {
  const auto copy = dir("data_missing");
  fs::copy(data(), copy, fs::copy_options::recursive);
  const auto manifest = synth::read_manifest(copy / synth::kManifestName);
  const auto& victim = manifest.rows[7];
  fs::remove(manifest.clip_path(victim));
  FeaturizeOptions f;
  f.manifest = copy / synth::kManifestName;
  f.out = dir("feat_missing");
  try {
    cmd_featurize(f);
    FAIL() << "expected an error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("id " + std::to_string(victim.id)), std::string::npos) << e.what();
  }
}

TEST_F(PipelineTest, TrainVaeEqualsBetaVaeWithBetaOne) {
  const auto a = cmd_train(quick_train("train_vae", models::ObjectiveConfig::vanilla()));
  const auto b = cmd_train(quick_train("train_beta1", models::ObjectiveConfig::beta_vae(1.0)));
  EXPECT_EQ(slurp(a.loss_trace), slurp(b.loss_trace));
  EXPECT_TRUE(fs::exists(a.checkpoint));
  EXPECT_TRUE(fs::exists(dir("train_vae") / kRunConfigName));
  int heldout = 0;
  for (const auto& r : read_feature_set(features()).rows) heldout += is_heldout(r.id);
  EXPECT_EQ(a.clips, 200u - static_cast<std::size_t>(heldout));
}

TEST_F(PipelineTest, EvalReportsAndDeterminism) {
  cmd_train(quick_train("train_eval", models::ObjectiveConfig::beta_tcvae()));
  EvalOptions e;
  e.checkpoint = dir("train_eval") / kCheckpointName;
  e.features = features();
  e.manifest = data() / synth::kManifestName;
  e.runs = 3;
  e.seed = 2;
  e.out = dir("eval_a");
  const auto r = cmd_eval(e);
  EXPECT_EQ(r.model, "beta-tcvae");
  e.out = dir("eval_b");
  cmd_eval(e);
  EXPECT_EQ(slurp(dir("eval_a") / kReportCsvName), slurp(dir("eval_b") / kReportCsvName));
  EXPECT_EQ(slurp(dir("eval_a") / kReportMarkdownName), slurp(dir("eval_b") / kReportMarkdownName));
  EXPECT_EQ(csv::read(dir("eval_a") / kReportCsvName).header, csv::split(report::csv_header()));
  EXPECT_TRUE(fs::exists(dir("eval_a") / kCodesName));

  // Scoring the stored codes reproduces the checkpoint evaluation.
  EvalOptions c;
  c.codes = dir("eval_a") / kCodesName;
  c.manifest = e.manifest;
  c.runs = 3;
  c.seed = 2;
  c.label = "beta-tcvae";
  c.out = dir("eval_codes");
  cmd_eval(c);
  EXPECT_EQ(slurp(dir("eval_codes") / kReportCsvName), slurp(dir("eval_a") / kReportCsvName));

  e.runs = 1;
  e.out = dir("eval_one");
  const auto one = cmd_eval(e);
  for (const auto* s : {&one.metrics.mig, &one.metrics.sap, &one.metrics.dcimig, &one.metrics.jemmig}) {
    EXPECT_EQ(s->std, 0.0);
  }
}

TEST_F(PipelineTest, TraverseWritesGridsPairsAndSamples) {
  cmd_train(quick_train("train_trav", models::ObjectiveConfig::vanilla()));
  TraverseOptions t;
  t.checkpoint = dir("train_trav") / kCheckpointName;
  t.features = features();
  t.out = dir("trav");
  t.samples = 3;
  t.seed = 4;
  const auto s = cmd_traverse(t);
  EXPECT_EQ(s.traversal_grids, 80u);
  int heldout = 0;
  for (const auto& r : read_feature_set(features()).rows) heldout += is_heldout(r.id);
  EXPECT_EQ(s.reconstruction_pairs, static_cast<std::size_t>(heldout));
  EXPECT_EQ(s.random_samples, 3u);
  EXPECT_TRUE(fs::exists(t.out / "traversal" / "dim7_step9.synt"));
  EXPECT_TRUE(fs::exists(t.out / "traversal" / "dim0_step0.png"));
  const auto png = io::read_file(t.out / "traversal" / "dim0_step0.png");
  ASSERT_GT(png.size(), 8u);
  EXPECT_EQ(png[1], 'P');

  t.out = dir("trav_again");
  cmd_traverse(t);
  EXPECT_EQ(io::read_file(dir("trav") / "samples" / "sample2.synt"),
            io::read_file(dir("trav_again") / "samples" / "sample2.synt"));
}

TEST_F(PipelineTest, ReportMergesInCanonicalOrder) {
  std::vector<fs::path> inputs;
  for (const char* kind : {"random", "perfect"}) {
    ProbeOptions p;
    p.kind = metrics::probe_kind_from_name(kind);
    p.runs = 2;
    p.out = dir(std::string("probe_") + kind);
    cmd_probe(p);
    inputs.push_back(p.out);
  }
  report::ModelReport vae{"vae", {}};
  vae.metrics.runs = 1;
  report::write_csv(dir("fake_vae.csv"), {vae});
  inputs.push_back(dir("fake_vae.csv"));
  ReportOptions r{inputs, dir("merged") / "table.md"};
  const auto md = cmd_report(r);
  EXPECT_EQ(md, slurp(dir("merged") / "table.md"));
  EXPECT_LT(md.find("Vanilla VAE"), md.find("random"));
  EXPECT_LT(md.find("random"), md.find("perfect"));
  EXPECT_TRUE(fs::exists(dir("merged") / "table.csv"));
}

TEST(Probe, CommandEndpoints) {
  ProbeOptions p;
  p.runs = 3;
  const auto perfect = cmd_probe(p);
  EXPECT_EQ(perfect.metrics.mig.mean, 1.0);
  EXPECT_EQ(perfect.metrics.jemmig.mean, 0.0);
  EXPECT_EQ(perfect.metrics.dcimig.mean, 1.0);
  EXPECT_EQ(perfect.metrics.modularity.mean, 1.0);

  p.kind = metrics::ProbeKind::Constant;
  const auto constant = cmd_probe(p);
  EXPECT_EQ(constant.metrics.mig.mean, 0.0);
  ASSERT_FALSE(constant.metrics.modularity.ok());
  EXPECT_NE(constant.metrics.modularity.error->find("degenerate representation"), std::string::npos);

  p.kind = metrics::ProbeKind::Random;
  p.rows = 10000;
  EXPECT_LT(cmd_probe(p).metrics.mig.mean, 0.05);
}
