// Copyright 2026 The tss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tss/rng.h"

namespace tss {

// Voice parameters of a synthetic talker. Different profiles give
// different pitch ranges, vocal-tract lengths and voice qualities, which is
// what the speaker embedding and the separator key on.
struct SpeakerProfile {
  double f0_hz = 120.0;         // mean fundamental
  double f0_spread = 0.15;      // relative pitch excursion
  double formant_scale = 1.0;   // vocal-tract length factor
  double tilt = 0.9;            // glottal one-pole coefficient (higher = darker)
  double breathiness = 0.05;    // aspiration noise relative to voicing
  double syllables_per_second = 4.0;
  double fricative_center_hz = 4500.0;
};

SpeakerProfile random_speaker(Rng& rng);

// Source-filter synthesis: pulse train through a cascade of formant
// resonators following a random vowel sequence, with fricative onsets and
// inter-word pauses. Output is peak-safe with RMS around 0.05.
std::vector<double> synthesize_utterance(const SpeakerProfile& speaker, double seconds, Rng& rng);

struct CorpusSpec {
  std::size_t speakers = 20;
  std::size_t utterances_per_speaker = 6;
  double min_seconds = 3.0;
  double max_seconds = 5.0;
  std::uint64_t seed = 1;
};

// Writes `<dir>/spkNNN/uttNN.wav` (float32, 16 kHz mono).
void write_synthetic_corpus(const std::filesystem::path& dir, const CorpusSpec& spec);

}  // namespace tss
