#include "syntone/report.hpp"

#include "syntone/csv.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace syntone::report {
namespace {

using metrics::MetricReport;
using metrics::MetricStat;

constexpr std::array<const char*, 5> kColumns{"mig", "sap", "dcimig", "jemmig", "modularity"};
constexpr std::array<const char*, 5> kTitles{"MIG", "SAP", "DCIMIG", "JEMMIG", "Mod. Score"};

std::array<const MetricStat*, 5> stats(const MetricReport& r) {
  return {&r.mig, &r.sap, &r.dcimig, &r.jemmig, &r.modularity};
}

std::array<MetricStat*, 5> stats(MetricReport& r) {
  return {&r.mig, &r.sap, &r.dcimig, &r.jemmig, &r.modularity};
}

}  // namespace

std::string csv_header() {
  std::string h = "model";
  for (const char* c : kColumns) {
    h += std::string(",") + c + "_mean," + c + "_std";
  }
  return h;
}

std::string display_name(const std::string& model) {
  if (model == "vae") return "Vanilla VAE";
  if (model == "beta-vae") return "β-VAE";
  if (model == "factor-vae") return "Factor-VAE";
  if (model == "beta-tcvae") return "β-TCVAE";
  return model;
}

void write_csv(const std::filesystem::path& path, const std::vector<ModelReport>& rows) {
  csv::Table t;
  t.header = csv::split(csv_header());
  for (const auto& r : rows) {
    std::vector<std::string> fields{r.model};
    for (const MetricStat* s : stats(r.metrics)) {
      fields.push_back(s->ok() ? csv::format_double(s->mean) : "nan");
      fields.push_back(s->ok() ? csv::format_double(s->std) : "nan");
    }
    t.rows.push_back(std::move(fields));
  }
  csv::write(path, t);
}

std::vector<ModelReport> read_csv(const std::filesystem::path& path) {
  const auto t = csv::read(path);
  if (t.header != csv::split(csv_header())) {
    throw std::runtime_error(path.string() + ": not a metric report (unexpected header)");
  }
  std::vector<ModelReport> out;
  for (const auto& row : t.rows) {
    ModelReport r;
    r.model = row[0];
    auto s = stats(r.metrics);
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double mean = csv::parse_double(row[1 + 2 * i]);
      const double sd = csv::parse_double(row[2 + 2 * i]);
      if (std::isnan(mean)) {
        s[i]->error = "degenerate representation";
      } else {
        s[i]->mean = mean;
        s[i]->std = sd;
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string markdown_table(const std::vector<ModelReport>& rows) {
  std::array<double, 5> best{};
  std::array<bool, 5> have{};
  for (const auto& r : rows) {
    const auto s = stats(r.metrics);
    for (std::size_t c = 0; c < s.size(); ++c) {
      if (!s[c]->ok()) continue;
      const double v = std::round(s[c]->mean * 1000.0) / 1000.0;
      const bool lower_is_better = (c == 3);
      if (!have[c] || (lower_is_better ? v < best[c] : v > best[c])) best[c] = v;
      have[c] = true;
    }
  }

  std::ostringstream out;
  out << "| Model |";
  for (const char* t : kTitles) out << ' ' << t << " |";
  out << "\n|:--|";
  for (std::size_t c = 0; c < kTitles.size(); ++c) out << ":-:|";
  out << '\n';
  for (const auto& r : rows) {
    out << "| " << display_name(r.model) << " |";
    const auto s = stats(r.metrics);
    for (std::size_t c = 0; c < s.size(); ++c) {
      if (!s[c]->ok()) {
        out << " n/a (" << *s[c]->error << ") |";
        continue;
      }
      std::string cell = csv::format_fixed(s[c]->mean, 3) + " ± " + csv::format_fixed(s[c]->std, 3);
      const double v = std::round(s[c]->mean * 1000.0) / 1000.0;
      if (rows.size() > 1 && have[c] && v == best[c]) cell = "**" + cell + "**";
      out << ' ' << cell << " |";
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace syntone::report
