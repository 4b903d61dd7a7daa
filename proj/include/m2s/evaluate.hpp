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

#ifndef M2S_EVALUATE_HPP_
#define M2S_EVALUATE_HPP_

#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "m2s/audio.hpp"
#include "m2s/common.hpp"
#include "m2s/corpus.hpp"
#include "m2s/toy_world.hpp"

namespace m2s {

// Lowercase, punctuation other than apostrophes removed, whitespace collapsed.
std::string normalize_text(std::string_view text);

struct EditCounts {
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t reference_length = 0;
  std::size_t edits() const { return substitutions + deletions + insertions; }
};

// Levenshtein alignment with unit costs.
template <typename T>
EditCounts edit_counts(const std::vector<T>& ref, const std::vector<T>& hyp);

EditCounts word_edits(std::string_view reference, std::string_view hypothesis);
EditCounts char_edits(std::string_view reference, std::string_view hypothesis);

// Percentages; an empty normalized reference is an error.
double word_error_rate(std::string_view reference, std::string_view hypothesis);
double char_error_rate(std::string_view reference, std::string_view hypothesis);

// 10 * sqrt(2) / ln(10)
inline constexpr double kMcdScale = 6.141851463713754;
inline constexpr int kMcdOrder = 25;

// Mel-cepstra c1..c24 on 25 ms / 10 ms frames, T x 24.
Matrix mcd_features(const AudioBuffer& audio);
// DTW-aligned mean distortion between two cepstral sequences, in dB.
double mcd_from_cepstra(const Matrix& reference, const Matrix& synthesized);
double compute_mcd(const AudioBuffer& reference, const AudioBuffer& synthesized);

class Transcriber {
 public:
  virtual ~Transcriber() = default;
  virtual std::string name() const = 0;
  virtual std::string transcribe(const AudioBuffer& audio, const std::string& id) const = 0;
};

// Returns the stored text for an id; for identity checks only.
class EchoTranscriber final : public Transcriber {
 public:
  explicit EchoTranscriber(std::map<std::string, std::string> texts) : texts_(std::move(texts)) {}
  std::string name() const override { return "echo"; }
  std::string transcribe(const AudioBuffer& audio, const std::string& id) const override;

 private:
  std::map<std::string, std::string> texts_;
};

class ConstantTranscriber final : public Transcriber {
 public:
  explicit ConstantTranscriber(std::string text) : text_(std::move(text)) {}
  std::string name() const override { return "constant"; }
  std::string transcribe(const AudioBuffer&, const std::string&) const override { return text_; }

 private:
  std::string text_;
};

// Recognizer for the toy language. Each frame's gain-normalized band
// spectrum is matched to per-letter templates rendered in one voice;
// quiet frames are pauses. Short runs are dropped and repeats collapsed.
class TemplateTranscriber final : public Transcriber {
 public:
  struct Options {
    std::string voice = "lj";
    double silence_below_peak = 7.0;  // nats under the loudest frame
    int min_run = 2;                   // frames
  };
  TemplateTranscriber();
  explicit TemplateTranscriber(Options options);
  std::string name() const override { return "template"; }
  std::string transcribe(const AudioBuffer& audio, const std::string& id) const override;

 private:
  Options options_;
  std::vector<char> symbols_;
  Matrix templates_;  // letters x bands, mean-removed log power
};

// "template" (toy recognizer in `voice`), "echo" (reference texts of
// `utterances`) or "empty"; "whisper" needs an external ASR model.
std::unique_ptr<Transcriber> make_transcriber(const std::string& kind,
                                              std::span<const Utterance> utterances,
                                              const std::string& voice = "lj");

struct UtteranceScore {
  std::string id;
  double mcd_db = 0.0;
  double wer_pct = 0.0;
  double cer_pct = 0.0;
  std::string reference;
  std::string hypothesis;
  EditCounts words;
  EditCounts chars;
};

struct EvalReport {
  double mcd_db = 0.0;
  double wer_pct = 0.0;
  double cer_pct = 0.0;
  std::vector<UtteranceScore> per_utterance;
  std::string transcriber_name;
};

EvalReport evaluate_testset(std::span<const Utterance> test,
                            const std::map<std::string, AudioBuffer>& synthesized,
                            const std::map<std::string, AudioBuffer>& references,
                            const Transcriber& transcriber);

std::string format_report_json(const EvalReport& report);
std::string format_report_csv(const EvalReport& report);

}  // namespace m2s

#endif  // M2S_EVALUATE_HPP_
