#include "syntone/metrics.hpp"

#include "syntone/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>

namespace syntone::metrics {
namespace {

/// Counts of each distinct key, in ascending key order.
std::vector<long> sorted_counts(std::vector<long> keys) {
  std::sort(keys.begin(), keys.end());
  std::vector<long> counts;
  for (std::size_t i = 0; i < keys.size();) {
    std::size_t j = i;
    while (j < keys.size() && keys[j] == keys[i]) ++j;
    counts.push_back(static_cast<long>(j - i));
    i = j;
  }
  return counts;
}

double entropy_from_counts(std::span<const long> counts, long total) {
  const double n = static_cast<double>(total);
  double h = 0.0;
  for (long c : counts) {
    const double cd = static_cast<double>(c);
    h += (cd / n) * std::log(n / cd);
  }
  return h;
}

struct TopTwo {
  std::size_t first = 0;
  std::size_t second = 0;
  double first_value = 0.0;
  double second_value = 0.0;
  bool has_second = false;
};

/// Largest and second-largest entries of column k; ties go to the lower
/// latent index.
TopTwo top_two(const Matrix& mi, std::size_t k) {
  TopTwo t;
  t.first_value = mi(0, k);
  for (std::size_t j = 1; j < mi.rows; ++j) {
    const double v = mi(j, k);
    if (v > t.first_value) {
      t.second = t.first;
      t.second_value = t.first_value;
      t.has_second = true;
      t.first = j;
      t.first_value = v;
    } else if (!t.has_second || v > t.second_value) {
      t.second = j;
      t.second_value = v;
      t.has_second = true;
    }
  }
  if (!t.has_second) t.second_value = 0.0;
  return t;
}

void require_factor_entropy(const MIMatrix& m) {
  for (std::size_t k = 0; k < m.factor_entropy.size(); ++k) {
    if (!(m.factor_entropy[k] > 0.0)) {
      throw DegenerateError(std::string("degenerate evaluation set: factor '") + kFactorNames[k] +
                            "' has zero entropy");
    }
  }
  if (m.mi.rows == 0) throw DegenerateError("representation has no latents");
}

}  // namespace

void Representation::validate() const {
  if (codes.rows < 2) throw std::invalid_argument("representation needs at least 2 samples");
  if (codes.cols < 1) throw std::invalid_argument("representation needs at least 1 latent");
  if (factors.size() != codes.rows) throw std::invalid_argument("codes and factors are not aligned");
}

Representation Representation::subset(std::span<const std::size_t> indices) const {
  Representation out;
  out.codes = Matrix(indices.size(), codes.cols);
  out.factors.reserve(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto src = codes.row(indices[i]);
    std::copy(src.begin(), src.end(), out.codes.row(i).begin());
    out.factors.push_back(factors[indices[i]]);
  }
  return out;
}

int factor_label(const synth::FactorTuple& f, int k) {
  switch (k) {
    case 0: return static_cast<int>(f.timbre);
    case 1: return f.amp_index;
    case 2: return f.freq_index;
    default: throw std::invalid_argument("factor index out of range");
  }
}

std::vector<int> discretize(const Matrix& codes, int n_bins) {
  if (n_bins < 2) throw std::invalid_argument("discretize: n_bins must be >= 2");
  std::vector<int> bins(codes.rows * codes.cols, 0);
  for (std::size_t j = 0; j < codes.cols; ++j) {
    double lo = 0.0, hi = 0.0;
    for (std::size_t i = 0; i < codes.rows; ++i) {
      const double v = codes(i, j);
      if (!std::isfinite(v)) throw std::invalid_argument("discretize: non-finite code value");
      if (i == 0 || v < lo) lo = v;
      if (i == 0 || v > hi) hi = v;
    }
    const double width = hi - lo;
    if (!(width > 0.0)) continue;
    for (std::size_t i = 0; i < codes.rows; ++i) {
      const double scaled = (codes(i, j) - lo) / width * n_bins;
      bins[i * codes.cols + j] = std::clamp(static_cast<int>(std::floor(scaled)), 0, n_bins - 1);
    }
  }
  return bins;
}

double entropy(std::span<const int> labels) {
  if (labels.empty()) throw std::invalid_argument("entropy: empty label sequence");
  const auto counts = sorted_counts(std::vector<long>(labels.begin(), labels.end()));
  return entropy_from_counts(counts, static_cast<long>(labels.size()));
}

MIMatrix mi_matrix(const Representation& rep, int n_bins) {
  rep.validate();
  const std::size_t n = rep.size();
  const std::size_t d = rep.latent_dim();
  const long total = static_cast<long>(n);
  const double nd = static_cast<double>(n);
  const auto bins = discretize(rep.codes, n_bins);

  MIMatrix m;
  m.mi = Matrix(d, kNumFactors);
  m.joint_entropy = Matrix(d, kNumFactors);
  m.latent_entropy.resize(d);
  m.factor_entropy.resize(kNumFactors);

  std::vector<std::vector<int>> labels(kNumFactors, std::vector<int>(n));
  for (int k = 0; k < kNumFactors; ++k) {
    for (std::size_t i = 0; i < n; ++i) labels[k][i] = factor_label(rep.factors[i], k);
    m.factor_entropy[k] = entropy(labels[k]);
  }

  std::vector<long> keys(n);
  for (std::size_t j = 0; j < d; ++j) {
    std::vector<long> z_count(static_cast<std::size_t>(n_bins), 0);
    for (std::size_t i = 0; i < n; ++i) ++z_count[bins[i * d + j]];
    std::vector<long> occupied;
    for (long c : z_count) {
      if (c > 0) occupied.push_back(c);
    }
    m.latent_entropy[j] = entropy_from_counts(occupied, total);

    for (int k = 0; k < kNumFactors; ++k) {
      std::map<int, long> v_count;
      for (int v : labels[k]) ++v_count[v];
      // Cells ordered by (factor value, bin) so a one-to-one code visits its
      // cells in the same order as the factor entropy sum.
      for (std::size_t i = 0; i < n; ++i) {
        keys[i] = static_cast<long>(labels[k][i]) * n_bins + bins[i * d + j];
      }
      std::vector<long> sorted = keys;
      std::sort(sorted.begin(), sorted.end());
      double mi = 0.0;
      double joint = 0.0;
      for (std::size_t a = 0; a < sorted.size();) {
        std::size_t b = a;
        while (b < sorted.size() && sorted[b] == sorted[a]) ++b;
        const double c = static_cast<double>(b - a);
        const int v = static_cast<int>(sorted[a] / n_bins);
        const int z = static_cast<int>(sorted[a] % n_bins);
        const double cz = static_cast<double>(z_count[z]);
        const double cv = static_cast<double>(v_count[v]);
        mi += (c / nd) * std::log((c * nd) / (cz * cv));
        joint += (c / nd) * std::log(nd / c);
        a = b;
      }
      const double bound = std::min(m.latent_entropy[j], m.factor_entropy[k]);
      m.mi(j, k) = std::clamp(mi, 0.0, bound);
      m.joint_entropy(j, k) = joint;
    }
  }
  return m;
}

double mig(const MIMatrix& m) {
  require_factor_entropy(m);
  double total = 0.0;
  for (int k = 0; k < kNumFactors; ++k) {
    const auto t = top_two(m.mi, static_cast<std::size_t>(k));
    total += (t.first_value - t.second_value) / m.factor_entropy[k];
  }
  return std::clamp(total / kNumFactors, 0.0, 1.0);
}

double jemmig(const MIMatrix& m) {
  require_factor_entropy(m);
  double total = 0.0;
  for (int k = 0; k < kNumFactors; ++k) {
    const auto t = top_two(m.mi, static_cast<std::size_t>(k));
    total += m.joint_entropy(t.first, k) - t.first_value + t.second_value;
  }
  return std::max(0.0, total / kNumFactors);
}

double dcimig(const MIMatrix& m) {
  require_factor_entropy(m);
  std::array<double, kNumFactors> claimed{};
  for (std::size_t j = 0; j < m.mi.rows; ++j) {
    int best = 0;
    for (int k = 1; k < kNumFactors; ++k) {
      if (m.mi(j, k) > m.mi(j, best)) best = k;
    }
    double runner_up = 0.0;
    bool first = true;
    for (int k = 0; k < kNumFactors; ++k) {
      if (k == best) continue;
      if (first || m.mi(j, k) > runner_up) runner_up = m.mi(j, k);
      first = false;
    }
    claimed[best] = std::max(claimed[best], m.mi(j, best) - runner_up);
  }
  double num = 0.0, den = 0.0;
  for (int k = 0; k < kNumFactors; ++k) {
    num += claimed[k];
    den += m.factor_entropy[k];
  }
  return std::clamp(num / den, 0.0, 1.0);
}

double modularity(const MIMatrix& m) {
  require_factor_entropy(m);
  double total = 0.0;
  int alive = 0;
  for (std::size_t j = 0; j < m.mi.rows; ++j) {
    int best = 0;
    for (int k = 1; k < kNumFactors; ++k) {
      if (m.mi(j, k) > m.mi(j, best)) best = k;
    }
    const double theta = m.mi(j, best);
    if (theta < kDeadLatentThreshold) continue;
    double off = 0.0;
    for (int k = 0; k < kNumFactors; ++k) {
      if (k != best) off += m.mi(j, k) * m.mi(j, k);
    }
    total += 1.0 - off / (theta * theta * (kNumFactors - 1));
    ++alive;
  }
  if (alive == 0) throw DegenerateError("degenerate representation: every latent is dead");
  return std::clamp(total / alive, 0.0, 1.0);
}

Matrix sap_scores(const Representation& rep, std::uint64_t seed) {
  rep.validate();
  const std::size_t n = rep.size();
  Rng rng(seed);
  const auto order = rng.permutation(n);
  const std::size_t n_train = n / 2;
  const std::span<const std::size_t> train(order.data(), n_train);
  const std::span<const std::size_t> test(order.data() + n_train, n - n_train);

  Matrix scores(rep.latent_dim(), kNumFactors);
  for (int k = 0; k < kNumFactors; ++k) {
    std::map<int, std::size_t> class_slot;
    for (const auto& f : rep.factors) class_slot.emplace(factor_label(f, k), 0);
    std::size_t slot = 0;
    for (auto& [label, s] : class_slot) s = slot++;
    const std::size_t n_classes = class_slot.size();

    std::vector<std::size_t> train_count(n_classes, 0), test_count(n_classes, 0);
    for (auto i : train) ++train_count[class_slot.at(factor_label(rep.factors[i], k))];
    for (auto i : test) ++test_count[class_slot.at(factor_label(rep.factors[i], k))];
    for (std::size_t c = 0; c < n_classes; ++c) {
      if (test_count[c] > 0 && train_count[c] == 0) {
        throw DegenerateError(std::string("SAP: a class of factor '") + kFactorNames[k] +
                              "' is missing from the training split");
      }
    }

    for (std::size_t j = 0; j < rep.latent_dim(); ++j) {
      std::vector<double> centroid(n_classes, 0.0);
      for (auto i : train) centroid[class_slot.at(factor_label(rep.factors[i], k))] += rep.codes(i, j);
      for (std::size_t c = 0; c < n_classes; ++c) {
        if (train_count[c] > 0) centroid[c] /= static_cast<double>(train_count[c]);
      }
      std::vector<std::size_t> correct(n_classes, 0);
      for (auto i : test) {
        const double z = rep.codes(i, j);
        std::size_t best = n_classes;
        double best_dist = 0.0;
        for (std::size_t c = 0; c < n_classes; ++c) {
          if (train_count[c] == 0) continue;
          const double dist = std::abs(z - centroid[c]);
          if (best == n_classes || dist < best_dist) {
            best = c;
            best_dist = dist;
          }
        }
        const std::size_t truth = class_slot.at(factor_label(rep.factors[i], k));
        if (best == truth) ++correct[truth];
      }
      double acc = 0.0;
      std::size_t present = 0;
      for (std::size_t c = 0; c < n_classes; ++c) {
        if (test_count[c] == 0) continue;
        acc += static_cast<double>(correct[c]) / static_cast<double>(test_count[c]);
        ++present;
      }
      scores(j, k) = present ? acc / static_cast<double>(present) : 0.0;
    }
  }
  return scores;
}

double sap(const Representation& rep, std::uint64_t seed) {
  const Matrix s = sap_scores(rep, seed);
  double total = 0.0;
  for (int k = 0; k < kNumFactors; ++k) {
    const auto t = top_two(s, static_cast<std::size_t>(k));
    total += t.first_value - t.second_value;
  }
  return std::clamp(total / kNumFactors, 0.0, 1.0);
}

std::vector<std::size_t> resample_rows(const Representation& rep, std::uint64_t seed, double fraction) {
  rep.validate();
  if (!(fraction > 0.0 && fraction <= 1.0)) throw std::invalid_argument("resample fraction must be in (0, 1]");
  Rng rng(seed);

  std::array<std::vector<int>, kNumFactors> levels;
  for (int k = 0; k < kNumFactors; ++k) {
    for (const auto& f : rep.factors) levels[k].push_back(factor_label(f, k));
    std::sort(levels[k].begin(), levels[k].end());
    levels[k].erase(std::unique(levels[k].begin(), levels[k].end()), levels[k].end());
  }
  // Per-axis kept-level counts whose product fraction is closest to the
  // target; ties favour keeping more rows, then the most possible subsets.
  std::array<long, kNumFactors> count{}, lo{}, best{};
  for (int k = 0; k < kNumFactors; ++k) {
    count[k] = static_cast<long>(levels[k].size());
    lo[k] = std::min<long>(2, count[k]);
  }
  const auto log_choose = [](long n, long k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
  };
  double best_gap = std::numeric_limits<double>::infinity(), best_frac = 0.0, best_variety = -1.0;
  for (long a = lo[0]; a <= count[0]; ++a) {
    for (long b = lo[1]; b <= count[1]; ++b) {
      for (long c = lo[2]; c <= count[2]; ++c) {
        const double frac = static_cast<double>(a * b * c) / static_cast<double>(count[0] * count[1] * count[2]);
        const double gap = std::abs(frac - fraction);
        const double variety = log_choose(count[0], a) + log_choose(count[1], b) + log_choose(count[2], c);
        const bool tie_gap = std::abs(gap - best_gap) <= 1e-12;
        const bool tie_frac = std::abs(frac - best_frac) <= 1e-12;
        if (gap < best_gap - 1e-12 || (tie_gap && frac > best_frac + 1e-12) ||
            (tie_gap && tie_frac && variety > best_variety + 1e-9)) {
          best_gap = gap;
          best_frac = frac;
          best_variety = variety;
          best = {a, b, c};
        }
      }
    }
  }

  std::array<std::vector<bool>, kNumFactors> keep;
  std::array<std::map<int, std::size_t>, kNumFactors> slot;
  for (int k = 0; k < kNumFactors; ++k) {
    keep[k].assign(levels[k].size(), false);
    const auto perm = rng.permutation(levels[k].size());
    for (long i = 0; i < best[k]; ++i) keep[k][perm[static_cast<std::size_t>(i)]] = true;
    for (std::size_t i = 0; i < levels[k].size(); ++i) slot[k][levels[k][i]] = i;
  }

  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < rep.size(); ++i) {
    bool ok = true;
    for (int k = 0; k < kNumFactors && ok; ++k) ok = keep[k][slot[k].at(factor_label(rep.factors[i], k))];
    if (ok) rows.push_back(i);
  }
  return rows;
}

MetricReport evaluate(const Representation& rep, int runs, std::uint64_t seed, const EvalOptions& options) {
  if (runs < 1) throw std::invalid_argument("evaluate: runs must be >= 1");
  rep.validate();

  constexpr int kMetrics = 5;
  std::array<std::vector<double>, kMetrics> values;
  std::array<std::optional<std::string>, kMetrics> errors;

  for (int r = 0; r < runs; ++r) {
    const std::string tag = std::to_string(r);
    const auto rows = resample_rows(rep, derive_seed(seed, "resample/" + tag), options.resample_fraction);
    const Representation sample = rep.subset(rows);
    const MIMatrix m = mi_matrix(sample, options.n_bins);

    auto record = [&](int slot, auto&& fn) {
      if (errors[slot]) return;
      try {
        values[slot].push_back(fn());
      } catch (const DegenerateError& e) {
        errors[slot] = e.what();
      }
    };
    record(0, [&] { return mig(m); });
    record(1, [&] { return sap(sample, derive_seed(seed, "sap/" + tag)); });
    record(2, [&] { return dcimig(m); });
    record(3, [&] { return jemmig(m); });
    record(4, [&] { return modularity(m); });
  }

  auto summarize = [&](int slot) {
    MetricStat s;
    if (errors[slot]) {
      s.error = errors[slot];
      return s;
    }
    const auto& v = values[slot];
    s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(var / static_cast<double>(v.size()));
    return s;
  };

  MetricReport report;
  report.runs = runs;
  report.mig = summarize(0);
  report.sap = summarize(1);
  report.dcimig = summarize(2);
  report.jemmig = summarize(3);
  report.modularity = summarize(4);
  return report;
}

}  // namespace syntone::metrics
