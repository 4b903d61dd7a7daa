// Copyright (c) 2026 The m2s Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef M2S_AUDIO_HPP_
#define M2S_AUDIO_HPP_

#include <filesystem>
#include <vector>

namespace m2s {

inline constexpr int kCanonicalSampleRate = 16000;

// Mono waveform. Samples are nominally in [-1, 1].
struct AudioBuffer {
  std::vector<double> samples;
  int sample_rate = kCanonicalSampleRate;

  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
  bool operator==(const AudioBuffer&) const = default;
};

// Throws ValidationError if the sample rate is not positive or a sample is
// not finite. Empty buffers are rejected when `allow_empty` is false.
void validate_audio(const AudioBuffer& audio, bool allow_empty = false);

// Reads a RIFF/WAVE file (8/16/24/32-bit PCM or 32-bit float). Multichannel
// input is averaged down to mono.
AudioBuffer read_audio(const std::filesystem::path& path);

// Writes 16-bit PCM mono. Samples outside [-1, 1] are clipped.
void write_audio(const AudioBuffer& audio, const std::filesystem::path& path);

}  // namespace m2s

#endif  // M2S_AUDIO_HPP_
