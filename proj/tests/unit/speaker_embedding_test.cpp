// Copyright 2026 The tss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <gtest/gtest.h>

#include <cmath>

#include "test_support.h"
#include "tss/embedding.h"
#include "tss/errors.h"
#include "tss/speech_synth.h"
#include "tss/wav.h"

namespace tss {
namespace {

using testing::TempDir;

Waveform utterance(std::uint64_t speaker_seed, std::uint64_t utt_seed, double seconds = 2.0) {
  Rng srng(speaker_seed);
  const auto sp = random_speaker(srng);
  Rng urng(utt_seed);
  return Waveform::mono(synthesize_utterance(sp, seconds, urng));
}

double norm(const SpeakerEmbedding& e) {
  double s = 0.0;
  for (double v : e.vector) s += v * v;
  return std::sqrt(s);
}

TEST(Embedding, DeterministicUnitNorm) {
  const auto w = utterance(1, 2);
  const auto a = compute_embedding(w, "u");
  const auto b = compute_embedding(w, "u");
  EXPECT_EQ(a.vector, b.vector);
  EXPECT_EQ(a.dim(), kEmbeddingDim);
  EXPECT_NEAR(norm(a), 1.0, 1e-6);
  EXPECT_EQ(a.source, "u");
}

TEST(Embedding, GainInvariance) {
  const auto w = utterance(3, 4);
  auto scaled = w.channel(0);
  std::vector<double> loud(scaled.begin(), scaled.end());
  const double g = std::pow(10.0, 6.0 / 20.0);
  for (double& v : loud) v *= g;
  EXPECT_GT(cosine_similarity(compute_embedding(w), compute_embedding(Waveform::mono(loud))), 0.99);
}

TEST(Embedding, DegenerateReferences) {
  EXPECT_THROW(compute_embedding(Waveform::mono(std::vector<double>(32000, 0.0))),
               DegenerateSignalError);
  EXPECT_THROW(compute_embedding(utterance(5, 6, 0.5)), DegenerateSignalError);
  EXPECT_THROW(compute_embedding(Waveform::stereo(std::vector<double>(20000, 0.1),
                                                  std::vector<double>(20000, 0.1))),
               PreconditionError);
}

TEST(Cosine, Cases) {
  const auto a = compute_embedding(utterance(7, 8));
  EXPECT_NEAR(cosine_similarity(a, a), 1.0, 1e-12);
  SpeakerEmbedding neg = a;
  for (double& v : neg.vector) v = -v;
  EXPECT_NEAR(cosine_similarity(a, neg), -1.0, 1e-12);
  SpeakerEmbedding small{{1.0, 0.0}, ""};
  EXPECT_THROW(cosine_similarity(a, small), DimensionError);
}

TEST(Cosine, MatchesScalarDotOracle) {
  Rng rng(10);
  SpeakerEmbedding a, b;
  a.vector.resize(256);
  b.vector.resize(256);
  double na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < 256; ++i) {
    a.vector[i] = rng.normal();
    b.vector[i] = rng.normal();
    na += a.vector[i] * a.vector[i];
    nb += b.vector[i] * b.vector[i];
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < 256; ++i) {
    a.vector[i] /= std::sqrt(na);
    b.vector[i] /= std::sqrt(nb);
  }
  for (std::size_t i = 0; i < 256; ++i) dot += a.vector[i] * b.vector[i];
  EXPECT_NEAR(cosine_similarity(a, b), dot, 1e-12);
}

TEST(Embedding, SameSpeakerPairsAreCloser) {
  const std::size_t speakers = 6, utts = 3;
  std::vector<std::vector<SpeakerEmbedding>> e(speakers);
  for (std::size_t s = 0; s < speakers; ++s)
    for (std::size_t u = 0; u < utts; ++u) e[s].push_back(compute_embedding(utterance(100 + s, 1000 + 10 * s + u)));
  double same = 0.0, diff = 0.0;
  std::size_t n_same = 0, n_diff = 0;
  for (std::size_t s = 0; s < speakers; ++s)
    for (std::size_t u = 0; u < utts; ++u)
      for (std::size_t s2 = 0; s2 < speakers; ++s2)
        for (std::size_t u2 = 0; u2 < utts; ++u2) {
          if (s == s2 && u == u2) continue;
          const double c = cosine_similarity(e[s][u], e[s2][u2]);
          if (s == s2) {
            same += c;
            ++n_same;
          } else {
            diff += c;
            ++n_diff;
          }
        }
  EXPECT_GT(same / double(n_same), diff / double(n_diff));
}

TEST(EmbeddingCache, RoundTripAndFileLookup) {
  TempDir dir("emb_cache");
  write_wav(dir / "ref.wav", utterance(11, 12));
  EmbeddingCache cache(dir / "cache");
  const auto a = embedding_for_file(dir / "ref.wav", &cache);
  EXPECT_EQ(cache.size(), 1u);
  cache.save();
  EmbeddingCache reloaded(dir / "cache");
  reloaded.load();
  ASSERT_EQ(reloaded.size(), 1u);
  const auto hit = reloaded.find(a.source);
  ASSERT_TRUE(hit.has_value());
  EXPECT_EQ(hit->vector, a.vector);
  EXPECT_EQ(embedding_for_file(dir / "ref.wav", &reloaded).vector, a.vector);
}

TEST(EmbeddingCache, DimensionMismatch) {
  TempDir dir("emb_dim");
  EmbeddingCache cache(dir.path(), 4);
  EXPECT_THROW(cache.put(SpeakerEmbedding{{1.0, 0.0}, "x"}), DimensionError);
  cache.put(SpeakerEmbedding{{1.0, 0.0, 0.0, 0.0}, "x"});
  cache.save();
  EmbeddingCache other(dir.path(), 8);
  EXPECT_THROW(other.load(), DataError);
}

}  // namespace
}  // namespace tss
