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

#ifndef M2S_SEQ2SEQ_HPP_
#define M2S_SEQ2SEQ_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "m2s/autograd.hpp"
#include "m2s/encode.hpp"
#include "m2s/parallel_pair.hpp"
#include "m2s/tokenizer.hpp"

namespace m2s {

// Non-autoregressive encoder/decoder built from feed-forward transformer
// blocks (self-attention + two 1-D convolutions, post-norm residuals).
struct Seq2SeqConfig {
  int encoder_layers = 6;
  int decoder_layers = 6;
  int attention_heads = 2;
  int hidden_dim = 256;
  int conv_kernel = 9;
  int conv_filter = 1024;
  int embedding_dim = kCanonicalEmbeddingDim;
  double alpha_ctc = 0.001;
  double alpha_mse = 1.0;
  std::vector<std::string> vocab = CharTokenizer::default_vocab();

  void validate() const;
  bool operator==(const Seq2SeqConfig&) const = default;
};

struct TrainConfig {
  int batch_size = 16;
  int max_steps = 20000;
  double lr_init = 4.4e-2;
  double anneal_rate = 0.3;
  std::vector<int> anneal_steps = {3000, 4000, 5000};
  std::uint64_t seed = 1234;
  // Adam moments; the FastSpeech2 recipe values.
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.98;
  double adam_eps = 1e-9;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

void to_json(nlohmann::json& j, const Seq2SeqConfig& c);
void from_json(const nlohmann::json& j, Seq2SeqConfig& c);
void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

// Character labels of one transcript; never contains the blank id.
struct TokenSequence {
  std::vector<int> tokens;
  bool operator==(const TokenSequence&) const = default;
};

struct ModelOutput {
  Matrix predicted_embeddings;  // T x embedding_dim
  Matrix encoder_states;        // T x hidden_dim
  Matrix ctc_logits;            // T x |vocab|
};

class Seq2SeqModel {
 public:
  // Xavier-uniform weights from `seed`; unit LayerNorm gains; zero biases.
  Seq2SeqModel(Seq2SeqConfig config, std::uint64_t seed);
  // Every parameter zero.
  static Seq2SeqModel zeros(Seq2SeqConfig config);

  const Seq2SeqConfig& config() const { return config_; }
  autograd::ParameterSet& params() { return params_; }
  const autograd::ParameterSet& params() const { return params_; }

  struct Graph {
    autograd::Var predicted;
    autograd::Var encoder_states;
    autograd::Var ctc_logits;
  };
  // Records the forward pass for a T x embedding_dim input on `tape`, which
  // must have been created over params().
  Graph build(autograd::Tape& tape, const Matrix& input) const;

  ModelOutput forward(const EmbeddingSequence& nam) const;

 private:
  struct Block {
    int wq, bq, wk, bk, wv, bv, wo, bo;
    int ln1_g, ln1_b;
    int conv1_w, conv1_b, conv2_w, conv2_b;
    int ln2_g, ln2_b;
  };
  Seq2SeqModel(Seq2SeqConfig config, std::optional<std::uint64_t> seed);
  Block add_block(const std::string& prefix, Rng* rng);
  autograd::Var run_block(autograd::Tape& t, autograd::Var x, const Block& b) const;

  Seq2SeqConfig config_;
  autograd::ParameterSet params_;
  int in_w_, in_b_, ctc_w_, ctc_b_, out_w_, out_b_;
  std::vector<Block> encoder_;
  std::vector<Block> decoder_;
};

// Sinusoidal position table, rows x dim.
Matrix positional_encoding(Eigen::Index rows, Eigen::Index dim);

// Validates shapes and finiteness, then runs the model.
ModelOutput forward(const EmbeddingSequence& nam, const Seq2SeqModel& model);

// (1 / T) * sum_t ||target_t - predicted_t||^2: mean over frames, sum over
// embedding dimensions.
double mse_loss(const Matrix& predicted, const Matrix& target);

double total_loss(double l_ctc, double l_mse, const Seq2SeqConfig& config);

// lr_init * anneal_rate^(number of anneal steps <= step).
double lr_at_step(int step, const TrainConfig& config);

struct LossRecord {
  int step = 0;
  double lr = 0.0;
  double mse = 0.0;
  double ctc = 0.0;
  double total = 0.0;
  bool operator==(const LossRecord&) const = default;
};

struct Checkpoint {
  Seq2SeqModel model;
  TrainConfig train_config;
  std::vector<Matrix> adam_m;
  std::vector<Matrix> adam_v;
  int step = 0;
  std::vector<LossRecord> history;
};

struct TrainOptions {
  // Continue from this state; configs must match apart from max_steps.
  const Checkpoint* resume = nullptr;
  std::function<void(const LossRecord&)> on_step;
};

// Adam with the annealed schedule over aligned pairs. Every pair and
// transcript is validated before the first update.
Checkpoint train(std::span<const ParallelPair> pairs, std::span<const TokenSequence> transcripts,
                 const Seq2SeqConfig& s2s, const TrainConfig& tr,
                 const TrainOptions& options = {});

// Mean per-example losses of a frozen model.
LossRecord evaluate_loss(const Seq2SeqModel& model, std::span<const ParallelPair> pairs,
                         std::span<const TokenSequence> transcripts);

EmbeddingSequence infer(const EmbeddingSequence& nam, const Checkpoint& checkpoint);

// "M2SC" container: u32 version, u64 header length, JSON header (configs,
// vocabulary, step, loss history, parameter shapes, Adam settings), then
// each parameter's values, first and second Adam moments as little-endian
// f64, row-major.
std::string encode_checkpoint(const Checkpoint& checkpoint);
Checkpoint decode_checkpoint(const std::string& bytes);
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace m2s

#endif  // M2S_SEQ2SEQ_HPP_
