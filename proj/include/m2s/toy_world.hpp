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

#ifndef M2S_TOY_WORLD_HPP_
#define M2S_TOY_WORLD_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "m2s/audio.hpp"
#include "m2s/common.hpp"

// A small synthetic "language" for desk-scale runs: each letter is a steady
// two-formant spectral envelope, words are letter runs separated by pauses,
// and voices differ in excitation, tilt, band limit and gain. Whisper and
// NAM renditions of one utterance share the letter sequence but not the
// exact timing.
namespace m2s::toy {

struct Letter {
  char symbol;
  double f1;
  double f2;
};

// Twelve letters on a 3 x 4 grid of (F1, F2).
const std::vector<Letter>& alphabet();
const Letter* find_letter(char c);

enum class Excitation { kHarmonic, kNoise };

struct Voice {
  std::string name;
  Excitation excitation = Excitation::kHarmonic;
  double f0 = 120.0;
  double tilt_db_per_khz = 0.0;
  double lowpass_hz = 0.0;  // 0 disables
  double gain = 0.3;
};

Voice voice_by_name(const std::string& name);  // lj, alt, whisper, nam

// Linear amplitude envelope of `letter` in `voice` at frequency hz.
double envelope(const Letter& letter, const Voice& voice, double hz);

struct TimingOptions {
  int frame_samples = 320;  // 20 ms at 16 kHz
  int letter_frames = 5;
  int letter_jitter = 1;    // +/- frames
  int gap_frames = 4;
  int edge_frames = 4;
};

struct Segment {
  std::size_t begin = 0;  // samples
  std::size_t end = 0;
  const Letter* letter = nullptr;  // null for silence
};

std::vector<Segment> layout(const std::string& text, std::uint64_t timing_seed,
                            const TimingOptions& timing = {});

AudioBuffer render(const std::string& text, const Voice& voice, std::uint64_t timing_seed,
                   std::uint64_t noise_seed, const TimingOptions& timing = {});

// Space-separated words of 2-4 letters without immediate repeats.
std::string random_sentence(Rng& rng, int min_words = 2, int max_words = 3);

struct CorpusOptions {
  int utterances = 20;
  std::uint64_t seed = 7;
  std::string id_prefix = "nam";
};

// Writes <root>/nam/*.wav, <root>/whisper/*.wav and <root>/transcripts.txt.
void write_nam_corpus(const std::filesystem::path& root, const CorpusOptions& options);

// Writes <root>/<speaker>/*.wav and <root>/transcripts.txt for each speaker.
void write_reference_corpus(const std::filesystem::path& root,
                            const std::vector<std::string>& speakers,
                            const CorpusOptions& options);

}  // namespace m2s::toy

#endif  // M2S_TOY_WORLD_HPP_
