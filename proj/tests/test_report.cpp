#include "syntone/report.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace syntone;
using namespace syntone::report;

namespace {

ModelReport row(const std::string& name, double base) {
  ModelReport r;
  r.model = name;
  r.metrics.runs = 10;
  r.metrics.mig = {base, 0.01, std::nullopt};
  r.metrics.sap = {base / 2, 0.0, std::nullopt};
  r.metrics.dcimig = {base / 3, 0.002, std::nullopt};
  r.metrics.jemmig = {1.0 - base, 0.1, std::nullopt};
  r.metrics.modularity = {0.5 + base / 4, 0.014, std::nullopt};
  return r;
}

}  // namespace

TEST(Report, CsvHeaderOrder) {
  EXPECT_EQ(csv_header(),
            "model,mig_mean,mig_std,sap_mean,sap_std,dcimig_mean,dcimig_std,jemmig_mean,jemmig_std,modularity_mean,"
            "modularity_std");
}

TEST(Report, DisplayNames) {
  EXPECT_EQ(display_name("vae"), "Vanilla VAE");
  EXPECT_EQ(display_name("beta-tcvae"), "β-TCVAE");
  EXPECT_EQ(display_name("perfect"), "perfect");
}

TEST(Report, MarkdownShape) {
  const auto md = markdown_table({row("vae", 0.28), row("factor-vae", 0.4)});
  const std::string header = "| Model | MIG | SAP | DCIMIG | JEMMIG | Mod. Score |\n";
  ASSERT_EQ(md.substr(0, header.size()), header);
  EXPECT_NE(md.find("| Vanilla VAE | 0.280 ± 0.010 |"), std::string::npos);
  // Factor-VAE has the higher MIG and the lower JEMMIG: both bold.
  EXPECT_NE(md.find("**0.400 ± 0.010**"), std::string::npos);
  EXPECT_NE(md.find("**0.600 ± 0.100**"), std::string::npos);
  EXPECT_EQ(md.find("**0.280"), std::string::npos);
}

TEST(Report, SingleRowHasNoBold) {
  EXPECT_EQ(markdown_table({row("vae", 0.3)}).find("**"), std::string::npos);
}

TEST(Report, ErrorCells) {
  auto r = row("constant", 0.0);
  r.metrics.modularity = {0.0, 0.0, std::string("degenerate representation: every latent is dead")};
  const auto md = markdown_table({r});
  EXPECT_NE(md.find("n/a (degenerate representation"), std::string::npos);
  const auto dir = test::scratch_dir("report_error");
  write_csv(dir / "r.csv", {r});
  const auto back = read_csv(dir / "r.csv");
  ASSERT_EQ(back.size(), 1u);
  EXPECT_FALSE(back[0].metrics.modularity.ok());
  EXPECT_TRUE(back[0].metrics.mig.ok());
}

TEST(Report, CsvRoundTripExact) {
  const auto dir = test::scratch_dir("report_roundtrip");
  const std::vector<ModelReport> rows{row("vae", 0.123456789), row("beta-vae", 1.0 / 3.0)};
  write_csv(dir / "r.csv", rows);
  const auto back = read_csv(dir / "r.csv");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].model, "beta-vae");
  EXPECT_EQ(back[1].metrics.mig.mean, 1.0 / 3.0);
  EXPECT_EQ(back[0].metrics.modularity.std, 0.014);
  EXPECT_EQ(markdown_table(back), markdown_table(rows));
}
