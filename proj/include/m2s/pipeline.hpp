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

#ifndef M2S_PIPELINE_HPP_
#define M2S_PIPELINE_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "m2s/corpus.hpp"
#include "m2s/encode.hpp"
#include "m2s/evaluate.hpp"
#include "m2s/seq2seq.hpp"
#include "m2s/voclone.hpp"

namespace m2s {

// Every stage's settings in one document. Defaults are the full-scale
// values; the toy setup overrides sizes and rates.
struct PipelineConfig {
  struct Paths {
    std::filesystem::path corpus_root;     // NAM corpus: nam/, whisper/, transcripts.txt
    std::filesystem::path reference_root;  // speech corpus: <speaker>/, transcripts.txt
    std::filesystem::path cache_dir = "cache";
    std::filesystem::path output_dir = "out";
  } paths;
  struct Corpus {
    std::string primary_dir = "nam";
    std::string whisper_dir = "whisper";
    double test_frac = 0.13;
    double val_frac = 0.05;
    std::uint64_t seed = 1234;
  } corpus;
  struct Encoder {
    std::string backend = "toy";
    int layer = -1;
    ToyEncoderOptions toy;
  } encoder;
  struct CodebookSettings {
    int k = 100;
    std::uint64_t seed = 1234;
    int max_iters = 100;
  } codebook;
  struct Align {
    int radius = 1;
    std::string metric = "euclidean";
  } align;
  Seq2SeqConfig seq2seq;
  TrainConfig train;
  struct Vocoder {
    std::string backend = "oscillator";
    VocoderConfig config;  // empty speaker_ids: reference voices plus the NAM voice
  } vocoder;
  struct Voices {
    std::vector<std::string> reference = {"lj"};
    std::string ground_truth = "lj";
    std::string nam = "nam";
    std::string inference = "lj";
  } voices;
  std::string inference_input = "embeddings";  // or "units"
  std::string transcriber = "template";
  int augment_cap = -1;  // < 0: no cap

  void validate() const;
  // Vocoder config with speaker_ids filled in.
  VocoderConfig vocoder_config() const;
};

void to_json(nlohmann::json& j, const PipelineConfig& c);
void from_json(const nlohmann::json& j, PipelineConfig& c);

// Parses a config file. Relative paths resolve against the file's directory;
// M2S_CACHE_DIR, when set, replaces paths.cache_dir.
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
std::string format_pipeline_config(const PipelineConfig& config);

// Sets every seed (split, codebook, vocoder, training) to `seed`.
void override_seed(PipelineConfig& config, std::uint64_t seed);

struct PrepareResult {
  std::filesystem::path manifest;
  std::filesystem::path split;
  SplitSizes sizes;
};

struct SimulateResult {
  std::filesystem::path manifest;
  int written = 0;
  int skipped = 0;  // no whisper audio
};

struct AugmentResult {
  std::filesystem::path manifest;
  std::filesystem::path pair_dir;
  int clones = 0;
  std::vector<CloneFailure> failures;
};

struct TrainResult {
  std::filesystem::path checkpoint;
  std::filesystem::path log;
  int natural_pairs = 0;
  int augmented_pairs = 0;
  std::vector<LossRecord> history;
  std::optional<LossRecord> validation;
};

struct InferResult {
  EmbeddingSequence predicted;
  AudioBuffer audio;
};

// Stages of the NAM-to-speech pipeline over one config. Artifacts are cached
// under paths.cache_dir keyed by (stage, hash of the settings and inputs that
// produce them, utterance id); outputs go to paths.output_dir.
class Pipeline {
 public:
  explicit Pipeline(PipelineConfig config, std::ostream* log = nullptr);
  ~Pipeline();

  const PipelineConfig& config() const { return config_; }

  PrepareResult prepare();
  SimulateResult simulate_gt();
  // `source_manifest` defaults to the ground-truth voice of the reference corpus.
  AugmentResult augment(std::optional<std::filesystem::path> source_manifest = std::nullopt);
  TrainResult train(bool resume);
  InferResult infer(const AudioBuffer& nam, const std::string& speaker,
                    const Checkpoint& checkpoint);
  // Without self_test, synthesizes the test split from the trained checkpoint.
  // With it, references are scored against themselves with the echo transcriber.
  EvalReport evaluate(bool self_test, bool csv);

  // Artifact locations, for tools and tests.
  std::filesystem::path manifest_path() const;
  std::filesystem::path split_path() const;
  std::filesystem::path checkpoint_path() const;
  std::filesystem::path simulated_dir();
  std::filesystem::path augment_dir();
  std::filesystem::path vocoder_path();
  std::filesystem::path report_path(bool csv) const;

  const EncoderBackend& encoder() const { return *encoder_; }
  const Codebook& codebook();
  const VocoderBackend& vocoder();

 private:
  std::vector<Utterance> manifest() const;
  CorpusSplit split() const;
  std::vector<Utterance> reference_utterances(const std::string& speaker) const;
  EmbeddingSequence embed(const std::filesystem::path& audio_path);
  std::string corpus_fingerprint();
  std::string reference_fingerprint(const std::string& speaker);
  std::string codebook_key();
  std::string vocoder_key();
  std::string simulate_key();
  std::string augment_key();
  std::string pairs_key();
  std::vector<ParallelPair> natural_pairs(const std::vector<Utterance>& utts);
  void note(const std::string& line) const;

  PipelineConfig config_;
  std::ostream* log_;
  std::unique_ptr<EncoderBackend> encoder_;
  std::string encoder_key_;
  std::optional<std::string> corpus_fp_;
  std::map<std::string, std::string> reference_fp_;
  std::optional<Codebook> codebook_;
  std::unique_ptr<VocoderBackend> vocoder_;
};

// Stacked log-mel panels, one per input, on a shared time axis; PNG.
void plot_spectrograms(const std::vector<std::filesystem::path>& inputs,
                       const std::filesystem::path& out);

}  // namespace m2s

#endif  // M2S_PIPELINE_HPP_
