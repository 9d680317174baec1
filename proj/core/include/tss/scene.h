// Copyright 2026 The tss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "tss/rng.h"
#include "tss/waveform.h"

namespace tss {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;
  friend bool operator==(const Vec3&, const Vec3&) = default;
};
double distance(const Vec3& a, const Vec3& b);

// Shoebox recording room. The reverberant field is modeled as a seeded
// exponentially decaying noise tail whose energy follows the diffuse-field
// (Sabine) estimate, so it does not depend on the source distance.
struct RoomSpec {
  double width = 3.3;
  double length = 3.5;
  double height = 2.3;
  double t60 = 0.5;              // seconds; 0 disables the tail (anechoic)
  double noise_floor_db = -50.0; // white noise RMS in dBFS; -inf disables it
  double speed_of_sound = 343.0;

  bool contains(const Vec3& p) const;
  double volume() const { return width * length * height; }
  // Distance at which direct and reverberant energy are equal.
  double critical_distance() const;
};

// Room with T60 drawn uniformly from [t60_min, t60_max].
RoomSpec random_room(Rng& rng, double t60_min = 0.45, double t60_max = 0.55);

struct SceneGeometry {
  Vec3 target;
  Vec3 interferer;
  Vec3 mic1;
  Vec3 mic2;

  Vec3 mic_centroid() const;
  double mic_spacing() const { return distance(mic1, mic2); }
  // Throws GeometryError unless every point is inside the room, the target
  // is closer to the phone than the interferer and the spacing is in
  // (0.01, 0.20) m.
  void validate(const RoomSpec& room) const;
};

// Phone in the middle of the room, 0.14 m microphone spacing with mic 1
// facing the target; target 0.5 m and interferer 1.8 m from the phone.
SceneGeometry default_geometry();
// default_geometry() with both talkers moved by up to +-jitter metres in
// the horizontal plane; redrawn until valid.
SceneGeometry jittered_geometry(Rng& rng, double jitter);

// Direct-path delay in samples (nearest integer) from src to mic.
long direct_delay_samples(const RoomSpec& room, const Vec3& src, const Vec3& mic);
// Amplitude of the tail envelope t seconds after its onset, relative to the
// onset: 10^(-3 t / t60), i.e. -60 dB at t = t60.
double rir_tail_envelope(const RoomSpec& room, double seconds);
// Impulse: 1 / max(d, 0.1) at the direct-path delay, followed by the
// decaying tail (length t60) seeded by `seed`.
std::vector<double> synth_rir(const RoomSpec& room, const Vec3& src, const Vec3& mic,
                              std::uint64_t seed);

// Renders a mono source at `source` onto both microphones; output has the
// same length as the input.
Waveform spatialize_source(const Waveform& clean, const Vec3& source, const SceneGeometry& geometry,
                           const RoomSpec& room, std::uint64_t seed);

inline constexpr double kMutedInterferer = std::numeric_limits<double>::infinity();

struct MixResult {
  Waveform mixture;          // 2 channels
  // Target image at mic 1 (channel 1) and mic 2 (channel 2), advanced by the
  // injected delay. Channel 1 is the reference truth.
  Waveform truth;
  Waveform target_image;     // 2 channels, final scale
  Waveform interferer_image; // 2 channels, final scale
  Waveform noise;            // 2 channels, final scale
  double target_gain = 1.0;
  double interferer_gain = 1.0;
  double normalization = 1.0;
};

// mixture = target_image + interferer_image + noise, exactly. The
// interferer is scaled to `sir_db` at mic 1 (kMutedInterferer mutes it) and
// everything is jointly scaled so the mixture peak is at most 0.9. The
// truth leads the mixture by `delay_injection` samples, emulating the offset
// between two separate recording takes.
MixResult mix_scene(const Waveform& target, const Waveform& interferer,
                    const SceneGeometry& geometry, const RoomSpec& room, double sir_db,
                    std::size_t delay_injection, std::uint64_t noise_seed);

}  // namespace tss
