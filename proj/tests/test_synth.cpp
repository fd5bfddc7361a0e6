#include "syntone/synth.hpp"
#include "syntone/csv.hpp"
#include "syntone/tensor_io.hpp"
#include "syntone/wav.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

using namespace syntone;
using namespace syntone::synth;

TEST(Amplitude, Endpoints) {
  EXPECT_EQ(amplitude_of(19), 1.0);
  EXPECT_DOUBLE_EQ(amplitude_of(0), 0.05);
  EXPECT_THROW(amplitude_of(20), std::invalid_argument);
  EXPECT_THROW(amplitude_of(-1), std::invalid_argument);
}

TEST(Amplitude, DistinctAndEquallySpaced) {
  for (int i = 1; i < kNumAmplitudes; ++i) {
    EXPECT_GT(amplitude_of(i), amplitude_of(i - 1));
    EXPECT_NEAR(amplitude_of(i) - amplitude_of(i - 1), 0.05, 1e-12);
  }
}

TEST(Frequency, GridValues) {
  EXPECT_EQ(frequency_of(0), 440.0);
  EXPECT_NEAR(frequency_of(1), 458.9, 1e-9);
  EXPECT_NEAR(frequency_of(399), 7981.1, 1e-9);
  for (int k = 0; k < kNumFrequencies; ++k) EXPECT_LT(frequency_of(k), 8000.0);
  EXPECT_THROW(frequency_of(400), std::invalid_argument);
}

TEST(FactorGrid, CardinalityAndOrder) {
  const auto grid = factor_grid();
  ASSERT_EQ(grid.size(), 32000u);
  EXPECT_EQ(grid.front(), (FactorTuple{Timbre::Sine, 0, 0}));
  EXPECT_TRUE(std::is_sorted(grid.begin(), grid.end()));
  EXPECT_EQ(std::set<FactorTuple>(grid.begin(), grid.end()).size(), 32000u);
  int squares = 0;
  for (const auto& f : grid) squares += f.timbre == Timbre::Square;
  EXPECT_EQ(squares, 8000);
}

TEST(FactorGrid, FlatIdRoundTrip) {
  const auto grid = factor_grid();
  for (std::size_t i = 0; i < grid.size(); i += 97) {
    EXPECT_EQ(flat_id(grid[i]), static_cast<int>(i));
    EXPECT_EQ(from_flat_id(static_cast<int>(i)), grid[i]);
  }
}

TEST(StridedGrid, SubsetCount) {
  EXPECT_EQ(strided_grid({1, 4, 20}).size(), 400u);
  EXPECT_EQ(strided_grid({1, 1, 1}).size(), 32000u);
  EXPECT_EQ(GridStride::parse("1,4,20").amp, 4);
  EXPECT_EQ(GridStride::parse("2,5,40").to_string(), "2,5,40");
  EXPECT_THROW(GridStride::parse("1,4"), std::invalid_argument);
  EXPECT_THROW(GridStride::parse("0,1,1"), std::invalid_argument);
  EXPECT_THROW(GridStride::parse("a,b,c"), std::invalid_argument);
}

TEST(Waveform, SineStartsAtZero) {
  const auto clip = synth_waveform({Timbre::Sine, 7, 123});
  ASSERT_EQ(clip.samples.size(), 16000u);
  EXPECT_EQ(clip.samples[0], 0.0);
  EXPECT_EQ(clip.sample_rate, 16000);
}

TEST(Waveform, SquareTakesTwoValues) {
  const auto clip = synth_waveform({Timbre::Square, 9, 55});
  for (double s : clip.samples) EXPECT_TRUE(s == 0.5 || s == -0.5) << s;
}

TEST(Waveform, SawtoothMatchesRamp) {
  const auto clip = synth_waveform({Timbre::Sawtooth, 19, 0});
  EXPECT_NEAR(clip.samples[18], -0.01, 1e-12);
  for (int n = 0; n < 16000; ++n) {
    const double phase = 440.0 * n / 16000.0;
    const double ref = 2.0 * (phase - std::floor(phase)) - 1.0;
    ASSERT_NEAR(clip.samples[n], ref, 1e-12) << n;
  }
}

TEST(Waveform, TriangleMatchesReference) {
  const double f = frequency_of(37);
  const auto clip = synth_waveform({Timbre::Triangle, 4, 37});
  for (int n = 0; n < 16000; n += 13) {
    const double phase = f * n / 16000.0;
    const double fr = phase - std::floor(phase);
    ASSERT_NEAR(clip.samples[n], 0.25 * (2.0 * std::abs(2.0 * fr - 1.0) - 1.0), 1e-12);
  }
}

TEST(Waveform, BoundedAndDeterministic) {
  for (auto t : kAllTimbres) {
    for (int a : {0, 10, 19}) {
      const FactorTuple f{t, a, 211};
      const auto c1 = synth_waveform(f), c2 = synth_waveform(f);
      EXPECT_EQ(c1.samples, c2.samples);
      for (double s : c1.samples) ASSERT_LE(std::abs(s), amplitude_of(a) + 1e-15);
    }
  }
}

TEST(Waveform, SquareRmsEqualsAmplitude) {
  for (int a = 0; a < kNumAmplitudes; a += 3) {
    const auto clip = synth_waveform({Timbre::Square, a, 101});
    double s2 = 0.0;
    for (double s : clip.samples) s2 += s * s;
    EXPECT_NEAR(std::sqrt(s2 / clip.samples.size()), amplitude_of(a), 1e-12);
  }
}

TEST(Waveform, SinePeakWithinOnePercent) {
  for (int k : {0, 100, 250, 399}) {
    const auto clip = synth_waveform({Timbre::Sine, 12, k});
    double peak = 0.0;
    for (double s : clip.samples) peak = std::max(peak, std::abs(s));
    EXPECT_NEAR(peak, amplitude_of(12), 0.01 * amplitude_of(12));
  }
}

TEST(Waveform, SinePeriodogramArgmax) {
  // Direct DFT evaluated on the bins around the expected frequency and at a
  // coarse sweep of the rest of the spectrum.
  for (int k : {0, 77, 200, 399}) {
    const auto clip = synth_waveform({Timbre::Sine, 19, k});
    const double f = frequency_of(k);
    int best = -1;
    double best_p = -1.0;
    for (int bin = 0; bin <= 8000; ++bin) {
      if (std::abs(bin - f) > 3 && bin % 50 != 0) continue;
      const double p = test::dft_power(clip.samples, bin, 16000);
      if (p > best_p) best_p = p, best = bin;
    }
    EXPECT_LE(std::abs(best - f), 1.0) << k;
  }
}

TEST(ClipFileName, Format) {
  EXPECT_EQ(clip_file_name({Timbre::Sine, 3, 7}), "sine_03_007.wav");
  EXPECT_EQ(clip_file_name({Timbre::Sawtooth, 19, 399}), "sawtooth_19_399.wav");
}

TEST(TimbreName, RoundTrip) {
  for (auto t : kAllTimbres) EXPECT_EQ(timbre_from_name(timbre_name(t)), t);
  EXPECT_EQ(timbre_name(Timbre::Triangle), "triangle");
  EXPECT_THROW(timbre_from_name("noise"), std::invalid_argument);
}

TEST(GenerateDataset, SubsetWritesFilesAndManifest) {
  const auto dir = test::scratch_dir("generate_subset");
  const auto m = generate_dataset(dir, GridStride{2, 10, 100});
  ASSERT_EQ(m.rows.size(), 2u * 2u * 4u);
  EXPECT_TRUE(std::filesystem::exists(dir / kManifestName));
  EXPECT_FALSE(std::filesystem::exists(dir / kPartialMarker));
  const auto t = csv::read(dir / kManifestName);
  EXPECT_EQ(t.header, (std::vector<std::string>{"id", "timbre", "amp_index", "amplitude", "freq_index",
                                                "frequency_hz", "path"}));
  for (const auto& row : m.rows) {
    const auto clip = wav::read_pcm16(m.clip_path(row));
    EXPECT_EQ(clip.samples.size(), 16000u);
    EXPECT_EQ(clip.sample_rate, 16000);
    EXPECT_EQ(row.id, flat_id(row.factors));
  }
  const auto back = read_manifest(dir / kManifestName);
  ASSERT_EQ(back.rows.size(), m.rows.size());
  for (std::size_t i = 0; i < m.rows.size(); ++i) {
    EXPECT_EQ(back.rows[i].factors, m.rows[i].factors);
    EXPECT_EQ(back.rows[i].amplitude, m.rows[i].amplitude);
    EXPECT_EQ(back.rows[i].frequency_hz, m.rows[i].frequency_hz);
    EXPECT_EQ(back.rows[i].path, m.rows[i].path);
  }
}

TEST(GenerateDataset, RerunIsByteIdentical) {
  const auto a = test::scratch_dir("generate_a"), b = test::scratch_dir("generate_b");
  const auto ma = generate_dataset(a, GridStride{4, 20, 200});
  generate_dataset(b, GridStride{4, 20, 200});
  EXPECT_EQ(io::read_file(a / kManifestName), io::read_file(b / kManifestName));
  for (const auto& row : ma.rows) EXPECT_EQ(io::read_file(a / row.path), io::read_file(b / row.path));
}

TEST(GenerateDataset, UnwritableDirectoryLeavesNoManifest) {
  const auto dir = test::scratch_dir("generate_blocked");
  // A regular file where the output directory should be.
  const auto blocked = dir / "not_a_dir";
  io::write_file(blocked, std::vector<std::uint8_t>{1, 2, 3});
  EXPECT_THROW(generate_dataset(blocked / "out", GridStride{4, 20, 200}), std::runtime_error);
  EXPECT_FALSE(std::filesystem::exists(blocked / "out" / kManifestName));
}

TEST(Validate, RejectsOutOfRange) {
  EXPECT_THROW(validate({Timbre::Sine, 20, 0}), std::invalid_argument);
  EXPECT_THROW(validate({Timbre::Sine, 0, 400}), std::invalid_argument);
  EXPECT_NO_THROW(validate({Timbre::Sawtooth, 19, 399}));
}
