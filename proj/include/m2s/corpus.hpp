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

#ifndef M2S_CORPUS_HPP_
#define M2S_CORPUS_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace m2s {

// Where an utterance's primary waveform came from.
enum class Origin { kNatural, kSimulatedGt, kClone };

const char* to_string(Origin origin);
Origin origin_from_string(const std::string& s);

// One corpus record. `nam_path` holds the utterance's primary waveform: the
// murmur recording for the NAM corpus, the speech recording for a reference
// speech corpus, and the generated audio for simulated or cloned records.
struct Utterance {
  std::string id;
  std::filesystem::path nam_path;
  std::optional<std::filesystem::path> whisper_path;
  std::string text;
  double duration_s = 0.0;  // 0 when not yet materialized

  // Optional fields used by augmented manifests.
  std::optional<std::string> source_id;
  std::optional<Origin> origin;
  std::optional<std::string> speaker;

  bool operator==(const Utterance&) const = default;
};

// Manifest: UTF-8 JSON Lines, one flat object per record with keys `id`,
// `nam_path`, `whisper_path` (nullable) and `text`; `duration_s`,
// `source_id`, `origin` and `speaker` are optional. Blank lines are skipped.
// Relative paths are kept as written.
std::vector<Utterance> load_manifest(const std::filesystem::path& path);
std::vector<Utterance> parse_manifest(const std::string& content);
std::string format_manifest(const std::vector<Utterance>& utterances);
void save_manifest(const std::vector<Utterance>& utterances,
                   const std::filesystem::path& path);

// Directory layout: <root>/transcripts.txt with one "<id> <text>" per line,
// <root>/<primary_dir>/<id>.wav, and optionally <root>/<whisper_dir>/<id>.wav.
struct CorpusLayout {
  std::string primary_dir = "nam";
  std::string whisper_dir = "whisper";  // empty disables
  std::string transcripts = "transcripts.txt";
};

// Records in transcript order with durations read from the audio. Missing
// primary audio is an IoError naming every absent file.
std::vector<Utterance> scan_corpus(const std::filesystem::path& root,
                                   const CorpusLayout& layout = {});

struct CorpusSplit {
  std::vector<Utterance> train;
  std::vector<Utterance> val;
  std::vector<Utterance> test;
  std::uint64_t seed = 0;
};

struct SplitSizes {
  std::size_t train = 0;
  std::size_t val = 0;
  std::size_t test = 0;
};

// |test| = round(test_frac * N), |val| = round(val_frac * (N - |test|)),
// rounding half up. Validation is carved from what remains after test.
SplitSizes split_sizes(std::size_t n, double test_frac, double val_frac);

// Uniform random partition, deterministic in `seed`. Each list keeps the
// input order of its members.
CorpusSplit split_corpus(const std::vector<Utterance>& utterances,
                         std::uint64_t seed, double test_frac = 0.13,
                         double val_frac = 0.05);

}  // namespace m2s

#endif  // M2S_CORPUS_HPP_
