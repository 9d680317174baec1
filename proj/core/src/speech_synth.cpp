// Copyright 2026 The tss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tss/speech_synth.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

#include "tss/errors.h"
#include "tss/wav.h"
#include "tss/waveform.h"

namespace tss {
namespace {

constexpr double kFs = kSampleRate;

struct Vowel {
  double f1, f2, f3;
};

// Average adult formant targets (Hz) for a handful of vowels.
constexpr std::array<Vowel, 8> kVowels{{{730, 1090, 2440},
                                        {270, 2290, 3010},
                                        {530, 1840, 2480},
                                        {660, 1720, 2410},
                                        {300, 870, 2240},
                                        {570, 840, 2410},
                                        {440, 1020, 2240},
                                        {490, 1350, 1690}}};

// Two-pole resonator with unity gain at DC.
class Resonator {
 public:
  void set(double freq, double bandwidth) {
    const double r = std::exp(-M_PI * bandwidth / kFs);
    b1_ = 2.0 * r * std::cos(2.0 * M_PI * freq / kFs);
    b2_ = -r * r;
    a0_ = 1.0 - b1_ - b2_;
  }
  double step(double x) {
    const double y = a0_ * x + b1_ * y1_ + b2_ * y2_;
    y2_ = y1_;
    y1_ = y;
    return y;
  }

 private:
  double a0_ = 1.0, b1_ = 0.0, b2_ = 0.0, y1_ = 0.0, y2_ = 0.0;
};

enum class Segment { kSilence, kFricative, kVowel };

struct Event {
  Segment kind;
  std::size_t length;
  Vowel target{};
  double pitch_scale = 1.0;
};

std::vector<Event> plan_events(const SpeakerProfile& sp, std::size_t total, Rng& rng) {
  std::vector<Event> events;
  std::size_t used = 0;
  const auto add = [&](Event e) {
    e.length = std::min(e.length, total - used);
    if (e.length == 0) return;
    used += e.length;
    events.push_back(e);
  };
  add({Segment::kSilence, std::size_t(rng.uniform(0.05, 0.25) * kFs)});
  while (used < total) {
    const int syllables = int(rng.integer(1, 3));
    for (int s = 0; s < syllables && used < total; ++s) {
      if (rng.bernoulli(0.45)) {
        add({Segment::kFricative, std::size_t(rng.uniform(0.03, 0.09) * kFs)});
      }
      const double dur = rng.uniform(0.6, 1.4) / sp.syllables_per_second;
      const Vowel& v = kVowels[rng.index(kVowels.size())];
      add({Segment::kVowel, std::size_t(dur * kFs), v, 1.0 + sp.f0_spread * rng.uniform(-1, 1)});
    }
    add({Segment::kSilence, std::size_t(rng.uniform(0.04, 0.3) * kFs)});
  }
  return events;
}

}  // namespace

SpeakerProfile random_speaker(Rng& rng) {
  SpeakerProfile sp;
  const bool low = rng.bernoulli(0.5);
  sp.f0_hz = low ? rng.uniform(85.0, 150.0) : rng.uniform(165.0, 255.0);
  sp.formant_scale = low ? rng.uniform(0.88, 1.02) : rng.uniform(1.05, 1.22);
  sp.f0_spread = rng.uniform(0.06, 0.2);
  sp.tilt = rng.uniform(0.75, 0.95);
  sp.breathiness = rng.uniform(0.01, 0.12);
  sp.syllables_per_second = rng.uniform(3.0, 5.5);
  sp.fricative_center_hz = rng.uniform(3500.0, 6500.0);
  return sp;
}

std::vector<double> synthesize_utterance(const SpeakerProfile& sp, double seconds, Rng& rng) {
  if (!(seconds > 0.0)) throw PreconditionError("synthesize_utterance: duration must be positive");
  const std::size_t total = std::size_t(seconds * kFs);
  const auto events = plan_events(sp, total, rng);
  std::vector<double> out;
  out.reserve(total);

  std::array<Resonator, 4> tract;
  Resonator frication;
  double glottal_lp = 0.0, phase = 0.0;
  Vowel current = kVowels[0];
  double pitch = sp.f0_hz;
  for (const Event& e : events) {
    if (e.kind == Segment::kSilence) {
      out.insert(out.end(), e.length, 0.0);
      continue;
    }
    if (e.kind == Segment::kFricative) {
      frication.set(sp.fricative_center_hz * rng.uniform(0.85, 1.15), 1500.0);
      const double gain = rng.uniform(0.15, 0.4);
      for (std::size_t n = 0; n < e.length; ++n) {
        const double env = std::sin(M_PI * double(n) / double(e.length));
        out.push_back(gain * env * frication.step(rng.normal()));
      }
      continue;
    }
    const Vowel start = current;
    const Vowel& goal = e.target;
    const double pitch_start = pitch;
    const double pitch_goal = sp.f0_hz * e.pitch_scale;
    const double amp = rng.uniform(0.6, 1.0);
    for (std::size_t n = 0; n < e.length; ++n) {
      const double u = double(n) / double(e.length);
      // Formants glide toward the vowel target over the first 40 %.
      const double glide = std::min(1.0, u / 0.4);
      const double f1 = (start.f1 + (goal.f1 - start.f1) * glide) * sp.formant_scale;
      const double f2 = (start.f2 + (goal.f2 - start.f2) * glide) * sp.formant_scale;
      const double f3 = (start.f3 + (goal.f3 - start.f3) * glide) * sp.formant_scale;
      if (n % 32 == 0) {
        tract[0].set(f1, 80.0);
        tract[1].set(f2, 100.0);
        tract[2].set(f3, 140.0);
        tract[3].set(3500.0 * sp.formant_scale, 250.0);
      }
      pitch = pitch_start + (pitch_goal - pitch_start) * u;
      const double f0 = pitch * (1.0 + 0.01 * std::sin(2.0 * M_PI * 5.0 * double(n) / kFs));
      phase += f0 / kFs;
      double pulse = 0.0;
      if (phase >= 1.0) {
        phase -= 1.0;
        pulse = 1.0;
      }
      glottal_lp = sp.tilt * glottal_lp + (1.0 - sp.tilt) * pulse;
      const double excitation = (pulse - glottal_lp) + sp.breathiness * 0.05 * rng.normal();
      double y = excitation;
      for (auto& r : tract) y = r.step(y);
      const double env = std::min({1.0, u / 0.12, (1.0 - u) / 0.2});
      out.push_back(amp * env * y);
    }
    current = goal;
  }
  out.resize(total, 0.0);

  double energy = 0.0, peak = 0.0;
  for (double v : out) {
    energy += v * v;
    peak = std::max(peak, std::abs(v));
  }
  if (energy <= 0.0) throw NumericalError("synthesize_utterance produced silence");
  double gain = 0.05 / std::sqrt(energy / double(out.size())) * std::pow(10.0, rng.uniform(-3, 3) / 20.0);
  gain = std::min(gain, 0.5 / peak);
  for (double& v : out) v *= gain;
  return out;
}

void write_synthetic_corpus(const std::filesystem::path& dir, const CorpusSpec& spec) {
  if (spec.speakers == 0 || spec.utterances_per_speaker == 0 ||
      !(spec.min_seconds > 0.0 && spec.max_seconds >= spec.min_seconds)) {
    throw PreconditionError("invalid corpus specification");
  }
  Rng rng(spec.seed);
  char name[32];
  for (std::size_t s = 0; s < spec.speakers; ++s) {
    const SpeakerProfile sp = random_speaker(rng);
    std::snprintf(name, sizeof(name), "spk%03zu", s);
    const auto speaker_dir = dir / name;
    for (std::size_t u = 0; u < spec.utterances_per_speaker; ++u) {
      const double seconds = rng.uniform(spec.min_seconds, spec.max_seconds);
      Rng utt_rng(derive_seed(spec.seed, s * 1000 + u));
      std::snprintf(name, sizeof(name), "utt%02zu.wav", u);
      write_wav(speaker_dir / name, Waveform::mono(synthesize_utterance(sp, seconds, utt_rng)));
    }
  }
}

}  // namespace tss
