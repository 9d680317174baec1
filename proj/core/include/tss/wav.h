// Copyright 2026 The tss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>

#include "tss/waveform.h"

namespace tss {

enum class WavEncoding { kPcm16, kFloat32 };

// Reads little-endian RIFF/WAVE with PCM 16-bit or IEEE float 32-bit
// samples, 1 or 2 channels. Any rate other than 16 kHz is rejected.
Waveform read_wav(const std::filesystem::path& path);

// Writes the waveform; PCM16 output is clipped to [-1, 1).
void write_wav(const std::filesystem::path& path, const Waveform& wave,
               WavEncoding encoding = WavEncoding::kFloat32);

}  // namespace tss
