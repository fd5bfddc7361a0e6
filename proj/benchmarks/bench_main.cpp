#include "syntone/frontend.hpp"
#include "syntone/metrics.hpp"
#include "syntone/objectives.hpp"
#include "syntone/probes.hpp"
#include "syntone/rng.hpp"
#include "syntone/synth.hpp"

#include <benchmark/benchmark.h>

using namespace syntone;

namespace {

void BM_SynthWaveform(benchmark::State& state) {
  const synth::FactorTuple f{synth::Timbre::Sawtooth, 10, 200};
  for (auto _ : state) benchmark::DoNotOptimize(synth::synth_waveform(f).samples.data());
}
BENCHMARK(BM_SynthWaveform);

void BM_MelSpectrogram(benchmark::State& state) {
  const auto clip = synth::synth_waveform({synth::Timbre::Square, 12, 100});
  frontend::MelFrontend mel(frontend::FrontendConfig{});
  for (auto _ : state) benchmark::DoNotOptimize(mel.mel_spectrogram(clip.samples).values.data.data());
}
BENCHMARK(BM_MelSpectrogram)->Unit(benchmark::kMicrosecond);

void BM_MiMatrix(benchmark::State& state) {
  const auto rep = metrics::probe_representation(metrics::ProbeKind::Noisy, metrics::probe_grid({1, 4, 20}), 1, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(metrics::mi_matrix(rep).mi.data.data());
}
BENCHMARK(BM_MiMatrix)->Unit(benchmark::kMicrosecond);

void BM_VaeStep(benchmark::State& state) {
  const models::NetworkSpec spec;
  const models::ConvVae net(spec);
  const auto params = net.init_params(7);
  const auto batch = static_cast<std::size_t>(state.range(0));
  Matrix x(batch, static_cast<std::size_t>(spec.input_size())), eps(batch, static_cast<std::size_t>(spec.latent_dim));
  Rng rng(3);
  for (double& v : x.data) v = rng.normal();
  for (double& v : eps.data) v = rng.normal();
  models::ObjectiveConfig cfg;
  cfg.kind = models::ObjectiveKind::BetaTcVae;
  for (auto _ : state) {
    auto r = models::vae_batch(net, params, cfg, x, eps, 400, nullptr, {}, true);
    benchmark::DoNotOptimize(r.grad.data());
  }
}
BENCHMARK(BM_VaeStep)->Arg(8)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
