// Copyright 2026 The tss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "test_support.h"
#include "tss/errors.h"
#include "tss/fft.h"
#include "tss/stft.h"
#include "tss/wav.h"

namespace tss {
namespace {

using testing::TempDir;
using testing::white_noise;

TEST(Stft, SilentSecondHas98Frames) {
  const auto spec = stft_analyze(Waveform::mono(std::vector<double>(16000, 0.0)));
  EXPECT_EQ(spec.frames(), 98u);
  EXPECT_EQ(spec.bins(), 257u);
  for (double v : spec.mag.values()) EXPECT_EQ(v, 0.0);
}

TEST(Stft, CosineAtBinCenterPeaksAtThatBin) {
  std::vector<double> x(16000);
  for (std::size_t n = 0; n < x.size(); ++n) x[n] = std::cos(2.0 * M_PI * 500.0 * n / 16000.0);
  const auto spec = stft_analyze(Waveform::mono(x));
  for (std::size_t t = 0; t < spec.frames(); ++t) {
    auto row = spec.mag.row(t);
    EXPECT_EQ(std::max_element(row.begin(), row.end()) - row.begin(), 16);
  }
}

TEST(Stft, TooShortInput) {
  EXPECT_THROW(stft_analyze(Waveform::mono(std::vector<double>(399, 0.1))),
               DegenerateSignalError);
  EXPECT_NO_THROW(stft_analyze(Waveform::mono(std::vector<double>(400, 0.1))));
}

TEST(Stft, RejectsStereoInput) {
  EXPECT_THROW(stft_analyze(Waveform::stereo(std::vector<double>(800), std::vector<double>(800))),
               DimensionError);
}

TEST(Stft, GappyConfigFailsAtConstruction) {
  EXPECT_THROW(Stft(StftConfig{400, 512, 500}), ConfigError);
  EXPECT_THROW(Stft(StftConfig{600, 512, 160}), ConfigError);
}

TEST(Stft, RoundTripInterior) {
  for (std::size_t length : {16000u, 16123u, 4567u}) {
    const auto x = white_noise(length, 42 + length);
    const Stft stft;
    const auto spec = stft.analyze(x);
    const auto y = stft.synthesize(spec.mag, spec.phase, length);
    ASSERT_EQ(y.size(), length);
    const auto [begin, end] = stft.interior(length);
    EXPECT_EQ(begin, 399u);
    double worst = 0.0;
    for (std::size_t n = begin; n < end; ++n) worst = std::max(worst, std::abs(y[n] - x[n]));
    EXPECT_LT(worst, 1e-6) << "length " << length;
  }
}

TEST(Stft, ZeroMagnitudeGivesSilence) {
  const Stft stft;
  const auto spec = stft.analyze(white_noise(4000, 1));
  Tensor zero = spec.mag.zeros_like();
  for (double v : stft.synthesize(zero, spec.phase, 4000)) EXPECT_EQ(v, 0.0);
}

TEST(Stft, LinearInMagnitude) {
  const Stft stft;
  const auto spec = stft.analyze(white_noise(4000, 2));
  Tensor scaled = spec.mag;
  for (double& v : scaled.values()) v *= 2.5;
  const auto a = stft.synthesize(spec.mag, spec.phase, 4000);
  const auto b = stft.synthesize(scaled, spec.phase, 4000);
  for (std::size_t n = 0; n < a.size(); ++n) EXPECT_NEAR(b[n], 2.5 * a[n], 1e-12);
}

TEST(Stft, ParsevalPerFrame) {
  const Stft stft;
  const auto x = white_noise(2000, 3);
  const auto spec = stft.analyze(x);
  const auto w = stft.window();
  for (std::size_t t = 0; t < spec.frames(); ++t) {
    double time = 0.0, freq = 0.0;
    for (std::size_t n = 0; n < w.size(); ++n) time += std::pow(x[t * 160 + n] * w[n], 2);
    for (std::size_t f = 0; f < spec.bins(); ++f) {
      const double weight = (f == 0 || f == 256) ? 1.0 : 2.0;
      freq += weight * spec.mag(t, f) * spec.mag(t, f);
    }
    EXPECT_NEAR(freq / 512.0, time, 1e-8 * time);
  }
}

TEST(Stft, ComplexAnalysisIsLinear) {
  const Stft stft;
  const auto a = white_noise(3000, 4), b = white_noise(3000, 5);
  std::vector<double> mix(3000);
  for (std::size_t n = 0; n < mix.size(); ++n) mix[n] = 0.3 * a[n] - 1.7 * b[n];
  const auto sa = stft.analyze_complex(a), sb = stft.analyze_complex(b),
             sm = stft.analyze_complex(mix);
  for (std::size_t i = 0; i < sm.values.size(); ++i) {
    EXPECT_LT(std::abs(sm.values[i] - (0.3 * sa.values[i] - 1.7 * sb.values[i])), 1e-10);
  }
}

TEST(Stft, PhaseInRange) {
  const auto spec = Stft().analyze(white_noise(3000, 6));
  for (double p : spec.phase.values()) {
    EXPECT_GT(p, -M_PI - 1e-12);
    EXPECT_LE(p, M_PI);
  }
}

// <g, synth(m)> is linear in m, so the adjoint must reproduce it exactly.
TEST(Stft, MagnitudeAdjointMatchesInnerProduct) {
  const Stft stft;
  const std::size_t length = 2400;
  const auto spec = stft.analyze(white_noise(length, 7));
  const auto g = white_noise(length, 8);
  const Tensor adj = stft.synthesize_mag_adjoint(spec.phase, g);
  Rng rng(9);
  Tensor dm = spec.mag.zeros_like();
  for (double& v : dm.values()) v = rng.normal();
  const auto y = stft.synthesize(dm, spec.phase, length);
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t n = 0; n < length; ++n) lhs += g[n] * y[n];
  for (std::size_t i = 0; i < dm.size(); ++i) rhs += adj[i] * dm[i];
  EXPECT_NEAR(lhs, rhs, 1e-10 * std::abs(lhs));
}

TEST(ApplyMask, Cases) {
  const Tensor m1 = Tensor::matrix({{2, 4}});
  EXPECT_EQ(apply_mask(m1, Tensor::matrix({{1, 1}})), m1);
  EXPECT_EQ(apply_mask(m1, Tensor::matrix({{0, 0}})), Tensor::matrix({{0, 0}}));
  EXPECT_EQ(apply_mask(m1, Tensor::matrix({{0.5, 0.25}})), Tensor::matrix({{1, 1}}));
  EXPECT_THROW(apply_mask(m1, Tensor::matrix({{1.5, 0}})), ContractError);
  EXPECT_THROW(apply_mask(m1, Tensor::matrix({{-0.1, 0}})), ContractError);
}

TEST(Fft, ConvolutionMatchesDirect) {
  const auto a = white_noise(37, 10), b = white_noise(11, 11);
  const auto c = fft_convolve(a, b);
  ASSERT_EQ(c.size(), 47u);
  for (std::size_t n = 0; n < c.size(); ++n) {
    double direct = 0.0;
    for (std::size_t k = 0; k < b.size(); ++k) {
      if (n >= k && n - k < a.size()) direct += a[n - k] * b[k];
    }
    EXPECT_NEAR(c[n], direct, 1e-12);
  }
}

TEST(Wav, Float32RoundTrip) {
  TempDir dir("wav_f32");
  const auto a = white_noise(1000, 12), b = white_noise(1000, 13);
  const Waveform w = Waveform::stereo(a, b);
  write_wav(dir / "x.wav", w);
  const Waveform r = read_wav(dir / "x.wav");
  ASSERT_EQ(r.num_channels(), 2u);
  ASSERT_EQ(r.length(), 1000u);
  for (std::size_t n = 0; n < 1000; ++n) {
    EXPECT_EQ(r.channel(0)[n], double(float(a[n])));
    EXPECT_EQ(r.channel(1)[n], double(float(b[n])));
  }
}

TEST(Wav, Pcm16RoundTrip) {
  TempDir dir("wav_pcm");
  const auto a = white_noise(500, 14);
  write_wav(dir / "x.wav", Waveform::mono(a), WavEncoding::kPcm16);
  const Waveform r = read_wav(dir / "x.wav");
  for (std::size_t n = 0; n < 500; ++n) EXPECT_NEAR(r.channel(0)[n], a[n], 1.0 / 32768.0);
}

TEST(Wav, RejectsOtherSampleRates) {
  TempDir dir("wav_rate");
  write_wav(dir / "x.wav", Waveform::mono(white_noise(100, 15)), WavEncoding::kPcm16);
  // Patch the sample-rate field to 44.1 kHz.
  std::fstream f(dir / "x.wav", std::ios::in | std::ios::out | std::ios::binary);
  f.seekp(24);
  const std::uint32_t rate = 44100;
  f.write(reinterpret_cast<const char*>(&rate), 4);
  f.close();
  try {
    read_wav(dir / "x.wav");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("x.wav"), std::string::npos);
  }
}

TEST(Wav, MissingFileIsDataError) {
  EXPECT_THROW(read_wav("/nonexistent/file.wav"), DataError);
}

TEST(Waveform, ChannelInvariants) {
  EXPECT_THROW(Waveform(std::vector<std::vector<double>>{}), DimensionError);
  EXPECT_THROW(Waveform({{1.0}, {1.0}, {1.0}}), DimensionError);
  EXPECT_THROW(Waveform::stereo({1.0, 2.0}, {1.0}), DimensionError);
  EXPECT_THROW(Waveform({{1.0}}, 44100), DataError);
}

}  // namespace
}  // namespace tss
