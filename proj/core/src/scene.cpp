// Copyright 2026 The tss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tss/scene.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "tss/alignment.h"
#include "tss/errors.h"
#include "tss/fft.h"

namespace tss {
namespace {

double energy(std::span<const double> x) {
  double e = 0.0;
  for (double v : x) e += v * v;
  return e;
}

std::string describe(const Vec3& p) {
  return "(" + std::to_string(p.x) + ", " + std::to_string(p.y) + ", " + std::to_string(p.z) + ")";
}

}  // namespace

double distance(const Vec3& a, const Vec3& b) {
  return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) +
                   (a.z - b.z) * (a.z - b.z));
}

bool RoomSpec::contains(const Vec3& p) const {
  return p.x >= 0.0 && p.x <= width && p.y >= 0.0 && p.y <= length && p.z >= 0.0 &&
         p.z <= height;
}

double RoomSpec::critical_distance() const {
  if (t60 <= 0.0) return std::numeric_limits<double>::infinity();
  return 0.057 * std::sqrt(volume() / t60);
}

RoomSpec random_room(Rng& rng, double t60_min, double t60_max) {
  RoomSpec room;
  room.t60 = rng.uniform(t60_min, t60_max);
  return room;
}

Vec3 SceneGeometry::mic_centroid() const {
  return {(mic1.x + mic2.x) / 2, (mic1.y + mic2.y) / 2, (mic1.z + mic2.z) / 2};
}

void SceneGeometry::validate(const RoomSpec& room) const {
  for (const Vec3* p : {&target, &interferer, &mic1, &mic2}) {
    if (!room.contains(*p)) throw GeometryError("position " + describe(*p) + " is outside the room");
  }
  const double spacing = mic_spacing();
  if (!(spacing > 0.01 && spacing < 0.20)) {
    throw GeometryError("microphone spacing " + std::to_string(spacing) + " m not in (0.01, 0.20)");
  }
  const Vec3 c = mic_centroid();
  if (!(distance(target, c) < distance(interferer, c))) {
    throw GeometryError("target must be closer to the phone than the interferer");
  }
}

SceneGeometry default_geometry() {
  const Vec3 phone{1.65, 1.75, 1.2};
  const double mouth_rise = 1.5 - phone.z;
  const double target_planar = std::sqrt(0.5 * 0.5 - mouth_rise * mouth_rise);
  const double interferer_planar = std::sqrt(1.8 * 1.8 - mouth_rise * mouth_rise);
  const double az = 3.0 * M_PI / 4.0;
  SceneGeometry g;
  g.mic1 = {phone.x + 0.07, phone.y, phone.z};
  g.mic2 = {phone.x - 0.07, phone.y, phone.z};
  g.target = {phone.x + target_planar, phone.y, 1.5};
  g.interferer = {phone.x + interferer_planar * std::cos(az),
                  phone.y + interferer_planar * std::sin(az), 1.5};
  return g;
}

SceneGeometry jittered_geometry(Rng& rng, double jitter) {
  const RoomSpec room;
  const SceneGeometry base = default_geometry();
  for (int attempt = 0; attempt < 1000; ++attempt) {
    SceneGeometry g = base;
    g.target.x += rng.uniform(-jitter, jitter);
    g.target.y += rng.uniform(-jitter, jitter);
    g.interferer.x += rng.uniform(-jitter, jitter);
    g.interferer.y += rng.uniform(-jitter, jitter);
    try {
      g.validate(room);
      if (distance(g.target, g.mic1) >= 0.01 && distance(g.target, g.mic2) >= 0.01) return g;
    } catch (const GeometryError&) {
    }
  }
  throw GeometryError("could not draw a valid jittered geometry");
}

long direct_delay_samples(const RoomSpec& room, const Vec3& src, const Vec3& mic) {
  return std::lround(distance(src, mic) * kSampleRate / room.speed_of_sound);
}

double rir_tail_envelope(const RoomSpec& room, double seconds) {
  if (room.t60 <= 0.0) return 0.0;
  return std::pow(10.0, -3.0 * seconds / room.t60);
}

std::vector<double> synth_rir(const RoomSpec& room, const Vec3& src, const Vec3& mic,
                              std::uint64_t seed) {
  if (!room.contains(src) || !room.contains(mic)) {
    throw GeometryError("source " + describe(src) + " or microphone " + describe(mic) +
                        " outside the room");
  }
  if (room.t60 < 0.0) throw GeometryError("t60 must be non-negative");
  const double d = distance(src, mic);
  if (d < 0.01) throw GeometryError("source and microphone are co-located");
  const long direct = direct_delay_samples(room, src, mic);
  const std::size_t tail = room.t60 > 0.0 ? std::size_t(room.t60 * kSampleRate) : 0;
  std::vector<double> h(std::size_t(direct) + 1 + tail, 0.0);
  h[std::size_t(direct)] = 1.0 / std::max(d, 0.1);
  if (tail == 0) return h;
  // Onset amplitude such that the summed tail energy equals the diffuse-field
  // energy 1 / r_c^2.
  const double decay = std::pow(10.0, -3.0 / (room.t60 * kSampleRate));
  const double rc = room.critical_distance();
  const double onset = std::sqrt((1.0 - decay * decay) / (rc * rc));
  Rng rng(seed);
  double env = onset;
  for (std::size_t k = 0; k < tail; ++k) {
    h[std::size_t(direct) + 1 + k] = env * rng.normal();
    env *= decay;
  }
  return h;
}

Waveform spatialize_source(const Waveform& clean, const Vec3& source, const SceneGeometry& geometry,
                           const RoomSpec& room, std::uint64_t seed) {
  if (clean.num_channels() != 1) throw DimensionError("spatialize_source expects mono input");
  std::vector<std::vector<double>> channels;
  const Vec3 mics[2] = {geometry.mic1, geometry.mic2};
  for (int m = 0; m < 2; ++m) {
    const auto rir = synth_rir(room, source, mics[m], derive_seed(seed, std::uint64_t(m)));
    auto wet = fft_convolve(clean.channel(0), rir);
    wet.resize(clean.length());
    channels.push_back(std::move(wet));
  }
  return Waveform(std::move(channels));
}

MixResult mix_scene(const Waveform& target, const Waveform& interferer,
                    const SceneGeometry& geometry, const RoomSpec& room, double sir_db,
                    std::size_t delay_injection, std::uint64_t noise_seed) {
  if (target.num_channels() != 1 || interferer.num_channels() != 1) {
    throw DimensionError("mix_scene expects mono sources");
  }
  const bool muted = std::isinf(sir_db) && sir_db > 0;
  if (!muted && !(sir_db >= -10.0 && sir_db <= 10.0)) {
    throw PreconditionError("sir_db " + std::to_string(sir_db) + " outside [-10, 10]");
  }
  geometry.validate(room);
  const std::size_t length = std::min(target.length(), interferer.length());
  const auto trim = [length](const Waveform& w) {
    return Waveform::mono({w.channel(0).begin(), w.channel(0).begin() + long(length)});
  };
  const Waveform t = trim(target), i = trim(interferer);
  if (energy(t.channel(0)) <= 0.0 || energy(i.channel(0)) <= 0.0) {
    throw DegenerateSignalError("mix_scene: a source has zero energy");
  }
  Waveform t_img = spatialize_source(t, geometry.target, geometry, room, derive_seed(noise_seed, 1));
  Waveform i_img =
      spatialize_source(i, geometry.interferer, geometry, room, derive_seed(noise_seed, 2));

  MixResult r;
  r.target_gain = 1.0;
  r.interferer_gain =
      muted ? 0.0
            : std::sqrt(energy(t_img.channel(0)) / energy(i_img.channel(0)) *
                        std::pow(10.0, -sir_db / 10.0));
  std::vector<std::vector<double>> noise(2, std::vector<double>(length, 0.0));
  if (std::isfinite(room.noise_floor_db)) {
    const double sigma = std::pow(10.0, room.noise_floor_db / 20.0);
    Rng rng(derive_seed(noise_seed, 3));
    for (auto& ch : noise)
      for (double& v : ch) v = sigma * rng.normal();
  }
  for (int c = 0; c < 2; ++c) {
    for (double& v : i_img.channel_mut(c)) v *= r.interferer_gain;
  }
  double peak = 0.0;
  std::vector<std::vector<double>> mix(2, std::vector<double>(length));
  for (int c = 0; c < 2; ++c) {
    for (std::size_t n = 0; n < length; ++n) {
      mix[c][n] = t_img.channel(c)[n] + i_img.channel(c)[n] + noise[c][n];
      peak = std::max(peak, std::abs(mix[c][n]));
    }
  }
  r.normalization = peak > 0.9 ? 0.9 / peak : 1.0;
  const double g = r.normalization;
  const auto scaled = [g](std::vector<std::vector<double>> chans) {
    for (auto& ch : chans)
      for (double& v : ch) v *= g;
    return Waveform(std::move(chans));
  };
  const auto tracks = [](const Waveform& w) {
    return std::vector<std::vector<double>>{{w.channel(0).begin(), w.channel(0).end()},
                                            {w.channel(1).begin(), w.channel(1).end()}};
  };
  r.target_image = scaled(tracks(t_img));
  r.interferer_image = scaled(tracks(i_img));
  r.noise = scaled(noise);
  // Recompute the sum from the scaled parts so the decomposition is exact.
  for (int c = 0; c < 2; ++c) {
    for (std::size_t n = 0; n < length; ++n) {
      mix[c][n] = r.target_image.channel(c)[n] + r.interferer_image.channel(c)[n] +
                  r.noise.channel(c)[n];
    }
  }
  r.mixture = Waveform(std::move(mix));
  r.truth = Waveform({shift_signal(r.target_image.channel(0), -long(delay_injection), length),
                      shift_signal(r.target_image.channel(1), -long(delay_injection), length)});
  return r;
}

}  // namespace tss
