// Copyright 2026 The tss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tss/wav.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "tss/errors.h"

namespace tss {
namespace {

static_assert(std::endian::native == std::endian::little, "WAV I/O assumes a little-endian host");

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

template <typename T>
T load(const std::vector<char>& buf, std::size_t pos) {
  T v;
  std::memcpy(&v, buf.data() + pos, sizeof(T));
  return v;
}

template <typename T>
void store(std::string& out, T v) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  out.append(bytes, sizeof(T));
}

}  // namespace

Waveform::Waveform(std::vector<std::vector<double>> channels, int sample_rate)
    : channels_(std::move(channels)), sample_rate_(sample_rate) {
  if (channels_.empty() || channels_.size() > 2) {
    throw DimensionError("waveform must have 1 or 2 channels, got " +
                         std::to_string(channels_.size()));
  }
  if (channels_.size() == 2 && channels_[0].size() != channels_[1].size()) {
    throw DimensionError("dual-channel waveform tracks differ in length");
  }
  if (sample_rate_ != kSampleRate) {
    throw DataError("unsupported sample rate " + std::to_string(sample_rate_) + " (need 16000)");
  }
}

Waveform read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto fail = [&](const std::string& why) { return DataError(path.string() + ": " + why); };
  if (buf.size() < 12 || std::memcmp(buf.data(), "RIFF", 4) != 0 ||
      std::memcmp(buf.data() + 8, "WAVE", 4) != 0) {
    throw fail("not a RIFF/WAVE file");
  }
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::size_t data_pos = 0, data_len = 0;
  bool have_fmt = false;
  for (std::size_t pos = 12; pos + 8 <= buf.size();) {
    const std::string id(buf.data() + pos, 4);
    const auto len = load<std::uint32_t>(buf, pos + 4);
    const std::size_t body = pos + 8;
    if (body + len > buf.size() && id != "data") throw fail("truncated chunk " + id);
    if (id == "fmt ") {
      if (len < 16) throw fail("short fmt chunk");
      format = load<std::uint16_t>(buf, body);
      channels = load<std::uint16_t>(buf, body + 2);
      rate = load<std::uint32_t>(buf, body + 4);
      bits = load<std::uint16_t>(buf, body + 14);
      if (format == kFormatExtensible) {
        if (len < 40) throw fail("short extensible fmt chunk");
        format = load<std::uint16_t>(buf, body + 24);
      }
      have_fmt = true;
    } else if (id == "data") {
      data_pos = body;
      data_len = std::min<std::size_t>(len, buf.size() - body);
      break;
    }
    pos = body + len + (len & 1);
  }
  if (!have_fmt || data_pos == 0) throw fail("missing fmt or data chunk");
  if (rate != kSampleRate) throw fail("unsupported sample rate " + std::to_string(rate));
  if (channels != 1 && channels != 2) {
    throw fail("unsupported channel count " + std::to_string(channels));
  }
  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool f32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !f32) {
    throw fail("unsupported encoding (format " + std::to_string(format) + ", " +
               std::to_string(bits) + " bits)");
  }
  const std::size_t frame_bytes = std::size_t(channels) * bits / 8;
  const std::size_t frames = data_len / frame_bytes;
  std::vector<std::vector<double>> tracks(channels, std::vector<double>(frames));
  for (std::size_t i = 0; i < frames; ++i) {
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t at = data_pos + i * frame_bytes + c * bits / 8;
      tracks[c][i] = pcm16 ? load<std::int16_t>(buf, at) / 32768.0 : double(load<float>(buf, at));
    }
  }
  return Waveform(std::move(tracks));
}

void write_wav(const std::filesystem::path& path, const Waveform& wave, WavEncoding encoding) {
  const std::uint16_t channels = std::uint16_t(wave.num_channels());
  const bool pcm16 = encoding == WavEncoding::kPcm16;
  const std::uint16_t bits = pcm16 ? 16 : 32;
  const std::uint32_t frame_bytes = channels * bits / 8;
  const std::uint32_t data_len = std::uint32_t(wave.length()) * frame_bytes;
  std::string out;
  out.reserve(44 + data_len);
  out += "RIFF";
  store<std::uint32_t>(out, 36 + data_len);
  out += "WAVEfmt ";
  store<std::uint32_t>(out, 16);
  store<std::uint16_t>(out, pcm16 ? kFormatPcm : kFormatFloat);
  store<std::uint16_t>(out, channels);
  store<std::uint32_t>(out, std::uint32_t(wave.sample_rate()));
  store<std::uint32_t>(out, std::uint32_t(wave.sample_rate()) * frame_bytes);
  store<std::uint16_t>(out, std::uint16_t(frame_bytes));
  store<std::uint16_t>(out, bits);
  out += "data";
  store<std::uint32_t>(out, data_len);
  for (std::size_t i = 0; i < wave.length(); ++i) {
    for (std::size_t c = 0; c < channels; ++c) {
      const double v = wave.channel(c)[i];
      if (pcm16) {
        const double scaled = std::clamp(std::round(v * 32768.0), -32768.0, 32767.0);
        store<std::int16_t>(out, std::int16_t(scaled));
      } else {
        store<float>(out, float(v));
      }
    }
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write " + path.string());
  os.write(out.data(), std::streamsize(out.size()));
  if (!os) throw DataError("write failed for " + path.string());
}

}  // namespace tss
