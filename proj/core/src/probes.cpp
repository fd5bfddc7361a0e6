#include "syntone/probes.hpp"

#include "syntone/rng.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>
#include <string>

namespace syntone::metrics {

ProbeKind probe_kind_from_name(std::string_view name) {
  for (auto k : {ProbeKind::Perfect, ProbeKind::Duplicated, ProbeKind::Entangled, ProbeKind::Noisy,
                 ProbeKind::Random, ProbeKind::Constant}) {
    if (probe_kind_name(k) == name) return k;
  }
  throw std::invalid_argument("unknown probe kind '" + std::string(name) +
                              "' (expected perfect, duplicated, entangled, noisy, random or constant)");
}

std::string_view probe_kind_name(ProbeKind kind) {
  switch (kind) {
    case ProbeKind::Perfect: return "perfect";
    case ProbeKind::Duplicated: return "duplicated";
    case ProbeKind::Entangled: return "entangled";
    case ProbeKind::Noisy: return "noisy";
    case ProbeKind::Random: return "random";
    case ProbeKind::Constant: return "constant";
  }
  return "unknown";
}

Representation probe_representation(ProbeKind kind, const std::vector<synth::FactorTuple>& grid,
                                    std::uint64_t seed, double sigma) {
  if (grid.empty()) throw std::invalid_argument("probe grid is empty");
  const std::size_t n = grid.size();

  std::array<int, kNumFactors> lo{}, hi{};
  for (int k = 0; k < kNumFactors; ++k) {
    lo[k] = hi[k] = factor_label(grid[0], k);
    for (const auto& f : grid) {
      lo[k] = std::min(lo[k], factor_label(f, k));
      hi[k] = std::max(hi[k], factor_label(f, k));
    }
  }
  auto normalized = [&](const synth::FactorTuple& f, int k) {
    if (hi[k] == lo[k]) return 0.0;
    return static_cast<double>(factor_label(f, k) - lo[k]) / static_cast<double>(hi[k] - lo[k]);
  };

  Representation rep;
  rep.factors = grid;
  rep.codes = Matrix(n, kProbeLatents, 0.0);
  Rng rng(seed);

  switch (kind) {
    case ProbeKind::Perfect:
    case ProbeKind::Duplicated:
    case ProbeKind::Noisy:
      for (std::size_t i = 0; i < n; ++i) {
        for (int k = 0; k < kNumFactors; ++k) rep.codes(i, k) = normalized(grid[i], k);
        if (kind == ProbeKind::Duplicated) rep.codes(i, 3) = rep.codes(i, 0);
      }
      if (kind == ProbeKind::Noisy) {
        for (double& v : rep.codes.data) v += sigma * rng.normal();
      }
      break;
    case ProbeKind::Entangled:
      for (std::size_t i = 0; i < n; ++i) {
        rep.codes(i, 0) = normalized(grid[i], 0);
        rep.codes(i, 1) = normalized(grid[i], 1) + normalized(grid[i], 2);
      }
      break;
    case ProbeKind::Random:
      for (double& v : rep.codes.data) v = rng.uniform();
      break;
    case ProbeKind::Constant:
      break;
  }
  return rep;
}

std::vector<synth::FactorTuple> probe_grid(const synth::GridStride& stride, std::optional<std::size_t> rows) {
  auto base = synth::strided_grid(stride);
  if (!rows) return base;
  std::vector<synth::FactorTuple> out;
  out.reserve(*rows);
  for (std::size_t i = 0; i < *rows; ++i) out.push_back(base[i % base.size()]);
  return out;
}

}  // namespace syntone::metrics
