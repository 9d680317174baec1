// Copyright 2026 The tss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <gtest/gtest.h>

#include "test_support.h"
#include "tss/alignment.h"
#include "tss/errors.h"
#include "tss/metrics.h"
#include "tss/scene.h"

namespace tss {
namespace {

using testing::speech_like_noise;
using testing::white_noise;

TEST(GccPhat, IdenticalSignalsGiveZeroLag) {
  const auto a = white_noise(16000, 1);
  const auto est = gcc_phat_delay(a, a);
  EXPECT_EQ(est.lag, 0);
  EXPECT_GT(est.peak_strength, 0.2);
  EXPECT_LE(est.peak_strength, 1.0);
}

TEST(GccPhat, RecoversConstructedShift) {
  const auto a = white_noise(16000, 2);
  const auto b = shift_signal(a, 37, a.size());
  EXPECT_EQ(gcc_phat_delay(a, b).lag, 37);
}

TEST(GccPhat, AllZeroInputIsDegenerate) {
  const std::vector<double> zeros(16000, 0.0);
  EXPECT_THROW(gcc_phat_delay(zeros, white_noise(16000, 3)), DegenerateSignalError);
}

TEST(GccPhat, TooShortForMaxLag) {
  EXPECT_THROW(gcc_phat_delay(white_noise(3000, 4), white_noise(3000, 5), 1600),
               PreconditionError);
}

TEST(GccPhat, ShiftRecoveryAcrossRange) {
  const std::size_t max_lag = 200;
  const auto a = speech_like_noise(16 * max_lag, 6);
  for (long k : {-200L, -157L, -3L, 0L, 1L, 64L, 199L, 200L}) {
    EXPECT_EQ(gcc_phat_delay(a, shift_signal(a, k, a.size()), max_lag).lag, k) << k;
  }
}

TEST(GccPhat, Antisymmetric) {
  const auto a = speech_like_noise(20000, 7);
  const auto b = shift_signal(a, 123, a.size());
  EXPECT_EQ(gcc_phat_delay(a, b).lag, -gcc_phat_delay(b, a).lag);
}

TEST(AlignPair, AlreadyAlignedIsUnchanged) {
  const auto a = speech_like_noise(16000, 8);
  const auto r = align_pair(Waveform::mono(a), Waveform::mono(a));
  EXPECT_EQ(r.lag, 0);
  EXPECT_FALSE(r.saturated);
  EXPECT_EQ(r.aligned, Waveform::mono(a));
}

TEST(AlignPair, DelayedTargetIsIdempotent) {
  const auto mix = speech_like_noise(24000, 9);
  const auto target = shift_signal(mix, 100, mix.size());
  const auto r = align_pair(Waveform::mono(target), Waveform::mono(mix));
  EXPECT_EQ(r.lag, 100);
  EXPECT_EQ(r.aligned.length(), mix.size());
  EXPECT_EQ(gcc_phat_delay(r.aligned, Waveform::mono(mix)).lag, 0);
  EXPECT_EQ(align_pair(r.aligned, Waveform::mono(mix)).lag, 0);
}

TEST(AlignPair, OutputLengthFollowsMixture) {
  const auto mix = speech_like_noise(20000, 10);
  const std::vector<double> target(mix.begin(), mix.begin() + 18000);
  EXPECT_EQ(align_pair(Waveform::mono(target), Waveform::mono(mix)).aligned.length(), 20000u);
}

TEST(AlignPair, FlagsSaturation) {
  const auto mix = speech_like_noise(20000, 11);
  const auto r = align_pair(Waveform::mono(shift_signal(mix, 300, mix.size())),
                            Waveform::mono(mix), 300);
  EXPECT_EQ(r.lag, 300);
  EXPECT_TRUE(r.saturated);
}

TEST(AlignPair, ImprovesSiSnrOnSimulatedScenes) {
  Rng rng(12);
  for (std::size_t delay : {16u, 80u, 400u}) {
    const auto t = Waveform::mono(speech_like_noise(32000, 100 + delay));
    const auto i = Waveform::mono(speech_like_noise(32000, 200 + delay));
    RoomSpec room = random_room(rng);
    const auto geometry = default_geometry();
    const MixResult m = mix_scene(t, i, geometry, room, 0.0, delay, 5);
    const auto component = m.target_image.channel(0);
    const auto aligned = align_pair(m.truth.take_channel(0), m.mixture.take_channel(0));
    EXPECT_GE(si_snr(aligned.aligned.channel(0), component),
              si_snr(m.truth.channel(0), component))
        << delay;
  }
}

}  // namespace
}  // namespace tss
