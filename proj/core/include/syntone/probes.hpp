#pragma once

#include "syntone/metrics.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace syntone::metrics {

/// Oracle codes with known metric behaviour, used to validate the scores.
enum class ProbeKind { Perfect, Duplicated, Entangled, Noisy, Random, Constant };

inline constexpr int kProbeLatents = 8;

ProbeKind probe_kind_from_name(std::string_view name);
std::string_view probe_kind_name(ProbeKind kind);

/// Perfect: latents 0..2 hold the min-max normalized factor indices, the rest
/// are constant. Duplicated: Perfect with latent 3 replaced by a copy of
/// latent 0. Entangled: latent 0 = timbre, latent 1 = amp + freq (normalized),
/// rest constant. Noisy: Perfect plus sigma * N(0, 1) on every latent.
/// Random: i.i.d. uniform [0, 1). Constant: all zeros.
Representation probe_representation(ProbeKind kind, const std::vector<synth::FactorTuple>& grid,
                                    std::uint64_t seed, double sigma = 0.0);

/// Strided factor grid, cycled to `rows` entries when given.
std::vector<synth::FactorTuple> probe_grid(const synth::GridStride& stride,
                                           std::optional<std::size_t> rows = std::nullopt);

}  // namespace syntone::metrics
