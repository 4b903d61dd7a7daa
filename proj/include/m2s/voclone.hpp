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

#ifndef M2S_VOCLONE_HPP_
#define M2S_VOCLONE_HPP_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "m2s/align.hpp"
#include "m2s/audio.hpp"
#include "m2s/corpus.hpp"
#include "m2s/encode.hpp"
#include "m2s/parallel_pair.hpp"

namespace m2s {

struct VocoderConfig {
  int num_embeddings = 100;
  int embedding_dim = 128;
  int model_input_dim = 256;  // unit embedding + speaker embedding
  double learning_rate = 2e-4;
  int batch_size = 16;
  std::vector<std::string> speaker_ids;
  int train_steps = 20000;
  std::uint64_t seed = 4321;

  int speaker_dim() const { return model_input_dim - embedding_dim; }
  int speaker_index(const std::string& id) const;  // -1 when unknown
  void validate() const;
  bool operator==(const VocoderConfig&) const = default;
};

void to_json(nlohmann::json& j, const VocoderConfig& c);
void from_json(const nlohmann::json& j, VocoderConfig& c);

// How predicted embeddings reach the vocoder: hard nearest-unit quantization,
// or a soft mixture over the codebook.
enum class VocoderInput { kUnits, kEmbeddings };
VocoderInput vocoder_input_from_string(const std::string& s);
const char* to_string(VocoderInput mode);

struct VocoderExample {
  UnitSequence units;
  AudioBuffer audio;
  std::string speaker;
};

class VocoderBackend {
 public:
  virtual ~VocoderBackend() = default;

  virtual std::string name() const = 0;
  virtual const VocoderConfig& config() const = 0;
  virtual bool trained() const = 0;

  // Returns the loss before each update.
  virtual std::vector<double> fit(std::span<const VocoderExample> examples,
                                  const Codebook& codebook) = 0;

  virtual AudioBuffer render(const UnitSequence& units, const std::string& speaker) const = 0;
  virtual AudioBuffer render(const EmbeddingSequence& embeddings, VocoderInput mode,
                             const std::string& speaker) const = 0;

  virtual void save(const std::filesystem::path& path) const = 0;
};

// Toy unit vocoder. A unit and a speaker embedding feed a linear map onto
// log mel-band powers; a harmonic oscillator bank at unit_pitch_hz(unit)
// renders that envelope frame by frame.
class OscillatorVocoder final : public VocoderBackend {
 public:
  explicit OscillatorVocoder(VocoderConfig config);

  static constexpr int kBands = 40;
  static constexpr int kHop = 320;     // 20 ms, one unit
  static constexpr int kWindow = 400;  // frames measured like the encoder's
  static constexpr int kRefinePasses = 3;

  std::string name() const override { return "oscillator"; }
  const VocoderConfig& config() const override { return config_; }
  bool trained() const override { return trained_; }

  std::vector<double> fit(std::span<const VocoderExample> examples,
                          const Codebook& codebook) override;

  AudioBuffer render(const UnitSequence& units, const std::string& speaker) const override;
  AudioBuffer render(const EmbeddingSequence& embeddings, VocoderInput mode,
                     const std::string& speaker) const override;

  void save(const std::filesystem::path& path) const override;
  static std::unique_ptr<OscillatorVocoder> load(const std::filesystem::path& path);

  std::string encode() const;
  static std::unique_ptr<OscillatorVocoder> decode(const std::string& bytes);

  // Predicted log band powers, T x kBands, for one unit row-mixture per frame.
  Matrix envelope(const Matrix& unit_weights, const std::string& speaker) const;

  const Codebook& codebook() const { return codebook_; }
  std::uint64_t weights_checksum() const;

 private:
  void require_ready(const std::string& speaker) const;
  void calibrate();
  AudioBuffer render_frames(const Matrix& log_power, const std::vector<int>& pitch_units) const;

  VocoderConfig config_;
  bool trained_ = false;
  Matrix unit_table_;     // num_embeddings x embedding_dim
  Matrix speaker_table_;  // speakers x speaker_dim
  Matrix weight_;         // model_input_dim x kBands
  Matrix bias_;           // 1 x kBands
  Codebook codebook_;
  double temperature_ = 1.0;  // soft-assignment scale, squared distance
  Matrix flat_response_;      // num_embeddings x kBands, log powers of a flat render
};

// Fundamental used for unit k: 50 + k/2 Hz.
double unit_pitch_hz(int unit);

// Log mel-band powers measured on unit-rate frames, T x kBands.
Matrix band_log_power(const AudioBuffer& audio);

std::unique_ptr<VocoderBackend> make_vocoder(const std::string& name, VocoderConfig config);
std::unique_ptr<VocoderBackend> load_vocoder(const std::filesystem::path& path);

std::vector<double> train_vocoder(std::span<const VocoderExample> examples,
                                  const Codebook& codebook, VocoderBackend& backend);

AudioBuffer synthesize(const std::variant<UnitSequence, EmbeddingSequence>& input,
                       const std::string& speaker, const VocoderBackend& backend,
                       VocoderInput mode = VocoderInput::kUnits);

struct SimulatedSpeech {
  AudioBuffer audio;
  UnitSequence units;
};

SimulatedSpeech simulate_ground_truth(const AudioBuffer& whisper, const Codebook& codebook,
                                      const EncoderBackend& encoder,
                                      const VocoderBackend& voice_vocoder,
                                      const std::string& speaker);

struct Clone {
  AudioBuffer audio;
  Utterance source;
};

struct CloneFailure {
  std::string id;
  std::string message;
};

struct CloneBatch {
  std::vector<Clone> clones;
  std::vector<CloneFailure> failures;
};

// Source utterances carry their speech audio in nam_path.
CloneBatch generate_clone_corpus(std::span<const Utterance> speech_corpus,
                                 const Codebook& codebook, const EncoderBackend& encoder,
                                 const VocoderBackend& nam_vocoder, const std::string& speaker);

ParallelPair build_aligned_pairs(const EmbeddingSequence& clone_embeddings,
                                 const EmbeddingSequence& target_embeddings, int radius,
                                 FrameMetric metric = FrameMetric::kEuclidean,
                                 std::string id = {});

}  // namespace m2s

#endif  // M2S_VOCLONE_HPP_
