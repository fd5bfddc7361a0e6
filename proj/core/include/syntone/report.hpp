#pragma once

#include "syntone/metrics.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace syntone::report {

struct ModelReport {
  std::string model;  // vae, beta-vae, factor-vae, beta-tcvae, or a probe name
  metrics::MetricReport metrics;
};

/// Header row of the metric CSV.
std::string csv_header();

/// Human-readable row label: "Vanilla VAE", "β-VAE", "Factor-VAE", "β-TCVAE";
/// anything else is returned unchanged.
std::string display_name(const std::string& model);

void write_csv(const std::filesystem::path& path, const std::vector<ModelReport>& rows);
std::vector<ModelReport> read_csv(const std::filesystem::path& path);

/// Markdown table with the columns Model | MIG | SAP | DCIMIG | JEMMIG |
/// Mod. Score, cells "mean ± std" to three decimals. With more than one row
/// the best value per column is bold (lowest for JEMMIG).
std::string markdown_table(const std::vector<ModelReport>& rows);

}  // namespace syntone::report
