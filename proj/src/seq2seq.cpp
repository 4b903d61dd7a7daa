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

#include "m2s/seq2seq.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include <nlohmann/json.hpp>

#include "m2s/ctc.hpp"
#include "m2s/error.hpp"

namespace m2s {

using autograd::Tape;
using autograd::Var;
using nlohmann::json;

void Seq2SeqConfig::validate() const {
  if (encoder_layers < 1 || decoder_layers < 1) {
    throw ValidationError("seq2seq needs at least one encoder and one decoder layer");
  }
  if (attention_heads < 1 || hidden_dim < 1 || hidden_dim % attention_heads != 0) {
    throw ValidationError("hidden_dim must be a positive multiple of attention_heads");
  }
  if (conv_kernel < 1 || conv_filter < 1 || embedding_dim < 1) {
    throw ValidationError("seq2seq sizes must be positive");
  }
  if (!(alpha_ctc >= 0.0) || !(alpha_mse >= 0.0)) {
    throw ValidationError("loss weights must be non-negative");
  }
  if (vocab.size() < 2) throw ValidationError("vocabulary needs a blank and one symbol");
}

void TrainConfig::validate() const {
  if (batch_size < 1 || max_steps < 0) throw ValidationError("invalid batch size or step count");
  if (!(lr_init > 0.0) || !(anneal_rate > 0.0)) {
    throw ValidationError("learning rate and anneal rate must be positive");
  }
  for (std::size_t i = 1; i < anneal_steps.size(); ++i) {
    if (anneal_steps[i] <= anneal_steps[i - 1]) {
      throw ValidationError("anneal_steps must be strictly increasing");
    }
  }
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0) ||
      !(adam_eps > 0.0)) {
    throw ValidationError("invalid Adam settings");
  }
}

void to_json(json& j, const Seq2SeqConfig& c) {
  j = json{{"encoder_layers", c.encoder_layers}, {"decoder_layers", c.decoder_layers},
           {"attention_heads", c.attention_heads}, {"hidden_dim", c.hidden_dim},
           {"conv_kernel", c.conv_kernel},         {"conv_filter", c.conv_filter},
           {"embedding_dim", c.embedding_dim},     {"alpha_ctc", c.alpha_ctc},
           {"alpha_mse", c.alpha_mse},             {"vocab", c.vocab}};
}

void from_json(const json& j, Seq2SeqConfig& c) {
  Seq2SeqConfig d;
  c.encoder_layers = j.value("encoder_layers", d.encoder_layers);
  c.decoder_layers = j.value("decoder_layers", d.decoder_layers);
  c.attention_heads = j.value("attention_heads", d.attention_heads);
  c.hidden_dim = j.value("hidden_dim", d.hidden_dim);
  c.conv_kernel = j.value("conv_kernel", d.conv_kernel);
  c.conv_filter = j.value("conv_filter", d.conv_filter);
  c.embedding_dim = j.value("embedding_dim", d.embedding_dim);
  c.alpha_ctc = j.value("alpha_ctc", d.alpha_ctc);
  c.alpha_mse = j.value("alpha_mse", d.alpha_mse);
  c.vocab = j.value("vocab", d.vocab);
}

void to_json(json& j, const TrainConfig& c) {
  j = json{{"batch_size", c.batch_size},     {"max_steps", c.max_steps},
           {"lr_init", c.lr_init},           {"anneal_rate", c.anneal_rate},
           {"anneal_steps", c.anneal_steps}, {"seed", c.seed},
           {"adam_beta1", c.adam_beta1},     {"adam_beta2", c.adam_beta2},
           {"adam_eps", c.adam_eps}};
}

void from_json(const json& j, TrainConfig& c) {
  TrainConfig d;
  c.batch_size = j.value("batch_size", d.batch_size);
  c.max_steps = j.value("max_steps", d.max_steps);
  c.lr_init = j.value("lr_init", d.lr_init);
  c.anneal_rate = j.value("anneal_rate", d.anneal_rate);
  c.anneal_steps = j.value("anneal_steps", d.anneal_steps);
  c.seed = j.value("seed", d.seed);
  c.adam_beta1 = j.value("adam_beta1", d.adam_beta1);
  c.adam_beta2 = j.value("adam_beta2", d.adam_beta2);
  c.adam_eps = j.value("adam_eps", d.adam_eps);
}

namespace {

Matrix xavier(Eigen::Index rows, Eigen::Index cols, Rng* rng) {
  Matrix m(rows, cols);
  if (!rng) {
    m.setZero();
    return m;
  }
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng->uniform(-bound, bound);
  }
  return m;
}

Matrix filled(Eigen::Index rows, Eigen::Index cols, double v, Rng* rng) {
  return Matrix::Constant(rows, cols, rng ? v : 0.0);
}

}  // namespace

Matrix positional_encoding(Eigen::Index rows, Eigen::Index dim) {
  Matrix pe(rows, dim);
  for (Eigen::Index t = 0; t < rows; ++t) {
    for (Eigen::Index i = 0; i < dim; ++i) {
      const double rate = std::pow(10000.0, -static_cast<double>(2 * (i / 2)) / dim);
      pe(t, i) = (i % 2 == 0) ? std::sin(t * rate) : std::cos(t * rate);
    }
  }
  return pe;
}

Seq2SeqModel::Seq2SeqModel(Seq2SeqConfig config, std::uint64_t seed)
    : Seq2SeqModel(std::move(config), std::optional<std::uint64_t>(seed)) {}

Seq2SeqModel Seq2SeqModel::zeros(Seq2SeqConfig config) {
  return Seq2SeqModel(std::move(config), std::optional<std::uint64_t>());
}

Seq2SeqModel::Seq2SeqModel(Seq2SeqConfig config, std::optional<std::uint64_t> seed)
    : config_(std::move(config)) {
  config_.validate();
  std::optional<Rng> rng;
  if (seed) rng.emplace(*seed);
  Rng* r = rng ? &*rng : nullptr;
  const int h = config_.hidden_dim;
  const int v = static_cast<int>(config_.vocab.size());
  in_w_ = params_.add("encoder.input.weight", xavier(config_.embedding_dim, h, r));
  in_b_ = params_.add("encoder.input.bias", Matrix::Zero(1, h));
  for (int l = 0; l < config_.encoder_layers; ++l) {
    encoder_.push_back(add_block("encoder.layer" + std::to_string(l), r));
  }
  ctc_w_ = params_.add("ctc.weight", xavier(h, v, r));
  ctc_b_ = params_.add("ctc.bias", Matrix::Zero(1, v));
  for (int l = 0; l < config_.decoder_layers; ++l) {
    decoder_.push_back(add_block("decoder.layer" + std::to_string(l), r));
  }
  out_w_ = params_.add("decoder.output.weight", xavier(h, config_.embedding_dim, r));
  out_b_ = params_.add("decoder.output.bias", Matrix::Zero(1, config_.embedding_dim));
}

Seq2SeqModel::Block Seq2SeqModel::add_block(const std::string& prefix, Rng* rng) {
  const int h = config_.hidden_dim;
  const int f = config_.conv_filter;
  const int k = config_.conv_kernel;
  Block b;
  b.wq = params_.add(prefix + ".attn.q.weight", xavier(h, h, rng));
  b.bq = params_.add(prefix + ".attn.q.bias", Matrix::Zero(1, h));
  b.wk = params_.add(prefix + ".attn.k.weight", xavier(h, h, rng));
  b.bk = params_.add(prefix + ".attn.k.bias", Matrix::Zero(1, h));
  b.wv = params_.add(prefix + ".attn.v.weight", xavier(h, h, rng));
  b.bv = params_.add(prefix + ".attn.v.bias", Matrix::Zero(1, h));
  b.wo = params_.add(prefix + ".attn.out.weight", xavier(h, h, rng));
  b.bo = params_.add(prefix + ".attn.out.bias", Matrix::Zero(1, h));
  b.ln1_g = params_.add(prefix + ".norm1.gain", filled(1, h, 1.0, rng));
  b.ln1_b = params_.add(prefix + ".norm1.bias", Matrix::Zero(1, h));
  b.conv1_w = params_.add(prefix + ".conv1.weight", xavier(static_cast<Eigen::Index>(k) * h, f, rng));
  b.conv1_b = params_.add(prefix + ".conv1.bias", Matrix::Zero(1, f));
  b.conv2_w = params_.add(prefix + ".conv2.weight", xavier(f, h, rng));
  b.conv2_b = params_.add(prefix + ".conv2.bias", Matrix::Zero(1, h));
  b.ln2_g = params_.add(prefix + ".norm2.gain", filled(1, h, 1.0, rng));
  b.ln2_b = params_.add(prefix + ".norm2.bias", Matrix::Zero(1, h));
  return b;
}

Var Seq2SeqModel::run_block(Tape& t, Var x, const Block& b) const {
  using namespace autograd;
  const int heads = config_.attention_heads;
  const Eigen::Index head_dim = config_.hidden_dim / heads;
  const Var q = add_row(t, matmul(t, x, t.param(b.wq)), t.param(b.bq));
  const Var k = add_row(t, matmul(t, x, t.param(b.wk)), t.param(b.bk));
  const Var v = add_row(t, matmul(t, x, t.param(b.wv)), t.param(b.bv));
  std::vector<Var> per_head;
  per_head.reserve(heads);
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(head_dim));
  for (int h = 0; h < heads; ++h) {
    const Var qh = heads == 1 ? q : slice_cols(t, q, h * head_dim, head_dim);
    const Var kh = heads == 1 ? k : slice_cols(t, k, h * head_dim, head_dim);
    const Var vh = heads == 1 ? v : slice_cols(t, v, h * head_dim, head_dim);
    const Var weights = softmax_rows(t, scale(t, matmul_nt(t, qh, kh), inv_sqrt));
    per_head.push_back(matmul(t, weights, vh));
  }
  Var attn = heads == 1 ? per_head[0] : concat_cols(t, per_head);
  attn = add_row(t, matmul(t, attn, t.param(b.wo)), t.param(b.bo));
  x = layer_norm(t, add(t, x, attn), t.param(b.ln1_g), t.param(b.ln1_b));

  Var c = unfold_time(t, x, config_.conv_kernel);
  c = relu(t, add_row(t, matmul(t, c, t.param(b.conv1_w)), t.param(b.conv1_b)));
  c = add_row(t, matmul(t, c, t.param(b.conv2_w)), t.param(b.conv2_b));
  return layer_norm(t, add(t, x, c), t.param(b.ln2_g), t.param(b.ln2_b));
}

Seq2SeqModel::Graph Seq2SeqModel::build(Tape& t, const Matrix& input) const {
  using namespace autograd;
  const Matrix pe = positional_encoding(input.rows(), config_.hidden_dim);
  Var x = t.constant(input);
  x = add_row(t, matmul(t, x, t.param(in_w_)), t.param(in_b_));
  x = add(t, x, t.constant(pe));
  for (const Block& b : encoder_) x = run_block(t, x, b);
  Graph g;
  g.encoder_states = x;
  g.ctc_logits = add_row(t, matmul(t, x, t.param(ctc_w_)), t.param(ctc_b_));
  Var y = add(t, x, t.constant(pe));
  for (const Block& b : decoder_) y = run_block(t, y, b);
  g.predicted = add_row(t, matmul(t, y, t.param(out_w_)), t.param(out_b_));
  return g;
}

ModelOutput Seq2SeqModel::forward(const EmbeddingSequence& nam) const {
  Tape tape(&params_);
  const Graph g = build(tape, nam.frames);
  return ModelOutput{tape.value(g.predicted), tape.value(g.encoder_states),
                     tape.value(g.ctc_logits)};
}

ModelOutput forward(const EmbeddingSequence& nam, const Seq2SeqModel& model) {
  if (nam.dim() != model.config().embedding_dim) {
    throw ValidationError("input dim " + std::to_string(nam.dim()) + " does not match model dim " +
                          std::to_string(model.config().embedding_dim));
  }
  if (nam.length() < 1) throw ValidationError("empty input sequence");
  if (!nam.frames.allFinite()) throw ValidationError("input contains non-finite values");
  return model.forward(nam);
}

double mse_loss(const Matrix& predicted, const Matrix& target) {
  if (predicted.rows() != target.rows() || predicted.cols() != target.cols()) {
    throw ValidationError("mse_loss: shape mismatch");
  }
  if (predicted.rows() == 0) throw ValidationError("mse_loss: empty input");
  return (target - predicted).squaredNorm() / static_cast<double>(predicted.rows());
}

double total_loss(double l_ctc, double l_mse, const Seq2SeqConfig& config) {
  if (!std::isfinite(l_ctc) || !std::isfinite(l_mse)) {
    throw ValidationError("total_loss: non-finite component");
  }
  return config.alpha_ctc * l_ctc + config.alpha_mse * l_mse;
}

double lr_at_step(int step, const TrainConfig& config) {
  int drops = 0;
  for (int s : config.anneal_steps) {
    if (s <= step) ++drops;
  }
  return config.lr_init * std::pow(config.anneal_rate, drops);
}

namespace {

struct Example {
  const Matrix* source;
  const Matrix* target;
  const std::vector<int>* tokens;
};

std::vector<Example> check_examples(std::span<const ParallelPair> pairs,
                                    std::span<const TokenSequence> transcripts,
                                    const Seq2SeqConfig& s2s) {
  if (pairs.empty()) throw ValidationError("no training pairs");
  if (pairs.size() != transcripts.size()) {
    throw ValidationError("got " + std::to_string(pairs.size()) + " pairs but " +
                          std::to_string(transcripts.size()) + " transcripts");
  }
  const int vocab = static_cast<int>(s2s.vocab.size());
  std::vector<Example> out;
  out.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const ParallelPair& p = pairs[i];
    const auto* src = std::get_if<EmbeddingSequence>(&p.source);
    if (!src) throw ValidationError("pair '" + p.id + "' has unit input; embeddings required");
    if (!p.aligned || src->length() != p.target.length()) {
      throw ValidationError("pair '" + p.id + "' is not aligned");
    }
    if (src->length() < 1) throw ValidationError("pair '" + p.id + "' is empty");
    if (src->dim() != s2s.embedding_dim || p.target.dim() != s2s.embedding_dim) {
      throw ValidationError("pair '" + p.id + "' has the wrong embedding dim");
    }
    if (!src->frames.allFinite() || !p.target.frames.allFinite()) {
      throw ValidationError("pair '" + p.id + "' contains non-finite values");
    }
    for (int tok : transcripts[i].tokens) {
      if (tok <= 0 || tok >= vocab) {
        throw ValidationError("transcript of '" + p.id + "' has an invalid token");
      }
    }
    if (s2s.alpha_ctc > 0.0 && ctc_min_frames(transcripts[i].tokens) > src->length()) {
      throw CtcLengthError("transcript of '" + p.id + "' is too long for " +
                           std::to_string(src->length()) + " frames");
    }
    out.push_back({&src->frames, &p.target.frames, &transcripts[i].tokens});
  }
  return out;
}

// Builds the weighted objective for one example on `tape`.
Var example_loss(Tape& tape, const Seq2SeqModel& model, const Example& ex, double* l_mse,
                 double* l_ctc) {
  const Seq2SeqConfig& c = model.config();
  const auto g = model.build(tape, *ex.source);
  const Var mse = autograd::mse(tape, g.predicted, *ex.target);
  *l_mse = tape.value(mse)(0, 0);
  Var total = autograd::scale(tape, mse, c.alpha_mse);
  *l_ctc = 0.0;
  if (c.alpha_ctc > 0.0) {
    const Var ctc = autograd::ctc(tape, g.ctc_logits, *ex.tokens, 0);
    *l_ctc = tape.value(ctc)(0, 0);
    total = autograd::add(tape, total, autograd::scale(tape, ctc, c.alpha_ctc));
  }
  return total;
}

}  // namespace

Checkpoint train(std::span<const ParallelPair> pairs, std::span<const TokenSequence> transcripts,
                 const Seq2SeqConfig& s2s, const TrainConfig& tr, const TrainOptions& options) {
  s2s.validate();
  tr.validate();
  const std::vector<Example> examples = check_examples(pairs, transcripts, s2s);

  Checkpoint ck = [&]() {
    if (options.resume) {
      const Checkpoint& r = *options.resume;
      TrainConfig a = r.train_config;
      TrainConfig b = tr;
      a.max_steps = b.max_steps = 0;
      if (!(r.model.config() == s2s) || !(a == b)) {
        throw ValidationError("cannot resume: checkpoint configuration differs");
      }
      if (r.step > tr.max_steps) {
        throw ValidationError("cannot resume: checkpoint is past max_steps");
      }
      return r;
    }
    Seq2SeqModel model(s2s, tr.seed);
    auto m = model.params().zeros_like();
    auto v = model.params().zeros_like();
    return Checkpoint{std::move(model), tr, std::move(m), std::move(v), 0, {}};
  }();
  ck.train_config = tr;

  autograd::ParameterSet& params = ck.model.params();
  const double inv_batch = 1.0 / tr.batch_size;
  std::vector<Matrix> grads = params.zeros_like();
  for (int step = ck.step; step < tr.max_steps; ++step) {
    for (auto& g : grads) g.setZero();
    LossRecord rec;
    rec.step = step + 1;
    rec.lr = lr_at_step(step, tr);
    for (std::size_t idx : batch_indices(step, examples.size(), tr.batch_size, tr.seed)) {
      Tape tape(&params);
      double l_mse = 0.0;
      double l_ctc = 0.0;
      const Var total = example_loss(tape, ck.model, examples[idx], &l_mse, &l_ctc);
      tape.backward(total, inv_batch);
      for (std::size_t p = 0; p < grads.size(); ++p) grads[p] += tape.param_grads()[p];
      rec.mse += l_mse * inv_batch;
      rec.ctc += l_ctc * inv_batch;
      rec.total += tape.value(total)(0, 0) * inv_batch;
    }

    const double t = step + 1;
    const double c1 = 1.0 - std::pow(tr.adam_beta1, t);
    const double c2 = 1.0 - std::pow(tr.adam_beta2, t);
    for (std::size_t p = 0; p < grads.size(); ++p) {
      ck.adam_m[p] = tr.adam_beta1 * ck.adam_m[p] + (1.0 - tr.adam_beta1) * grads[p];
      ck.adam_v[p] =
          tr.adam_beta2 * ck.adam_v[p] + (1.0 - tr.adam_beta2) * grads[p].cwiseAbs2();
      params.value(static_cast<int>(p)).array() -=
          rec.lr * (ck.adam_m[p].array() / c1) /
          ((ck.adam_v[p].array() / c2).sqrt() + tr.adam_eps);
    }
    ck.step = step + 1;
    ck.history.push_back(rec);
    if (options.on_step) options.on_step(rec);
  }
  return ck;
}

LossRecord evaluate_loss(const Seq2SeqModel& model, std::span<const ParallelPair> pairs,
                         std::span<const TokenSequence> transcripts) {
  const std::vector<Example> examples = check_examples(pairs, transcripts, model.config());
  LossRecord rec;
  const double inv = 1.0 / static_cast<double>(examples.size());
  for (const Example& ex : examples) {
    Tape tape(&model.params());
    double l_mse = 0.0;
    double l_ctc = 0.0;
    const Var total = example_loss(tape, model, ex, &l_mse, &l_ctc);
    rec.mse += l_mse * inv;
    rec.ctc += l_ctc * inv;
    rec.total += tape.value(total)(0, 0) * inv;
  }
  return rec;
}

EmbeddingSequence infer(const EmbeddingSequence& nam, const Checkpoint& checkpoint) {
  EmbeddingSequence out;
  out.frames = forward(nam, checkpoint.model).predicted_embeddings;
  out.frame_rate = nam.frame_rate;
  return out;
}

namespace {

constexpr char kCkptMagic[4] = {'M', '2', 'S', 'C'};
constexpr std::uint32_t kCkptVersion = 1;

template <typename T>
void append(std::string& out, const T& v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T take(const std::string& bytes, std::size_t& pos) {
  if (pos + sizeof(T) > bytes.size()) throw IoError("truncated checkpoint");
  T v;
  std::memcpy(&v, bytes.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

void append_matrix(std::string& out, const Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) append(out, m(r, c));
  }
}

void take_matrix(const std::string& bytes, std::size_t& pos, Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = take<double>(bytes, pos);
  }
}

}  // namespace

std::string encode_checkpoint(const Checkpoint& ck) {
  nlohmann::ordered_json header;
  header["format"] = "m2s-seq2seq";
  header["model"] = json(ck.model.config());
  header["train"] = json(ck.train_config);
  header["step"] = ck.step;
  auto history = nlohmann::ordered_json::array();
  for (const auto& r : ck.history) history.push_back({r.step, r.lr, r.mse, r.ctc, r.total});
  header["history"] = history;
  auto shapes = nlohmann::ordered_json::array();
  const auto& params = ck.model.params();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Matrix& v = params.value(static_cast<int>(i));
    shapes.push_back({params.name(static_cast<int>(i)), v.rows(), v.cols()});
  }
  header["params"] = shapes;
  const std::string text = header.dump();

  std::string out(kCkptMagic, 4);
  append(out, kCkptVersion);
  append(out, static_cast<std::uint64_t>(text.size()));
  out += text;
  for (std::size_t i = 0; i < params.size(); ++i) {
    append_matrix(out, params.value(static_cast<int>(i)));
    append_matrix(out, ck.adam_m[i]);
    append_matrix(out, ck.adam_v[i]);
  }
  return out;
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kCkptMagic, 4) != 0) {
    throw IoError("not a seq2seq checkpoint");
  }
  std::size_t pos = 4;
  if (take<std::uint32_t>(bytes, pos) != kCkptVersion) {
    throw IoError("unsupported checkpoint version");
  }
  const auto len = take<std::uint64_t>(bytes, pos);
  if (pos + len > bytes.size()) throw IoError("truncated checkpoint header");
  json header;
  try {
    header = json::parse(bytes.substr(pos, len));
  } catch (const json::exception& e) {
    throw IoError(std::string("bad checkpoint header: ") + e.what());
  }
  pos += len;

  Seq2SeqModel model = Seq2SeqModel::zeros(header.at("model").get<Seq2SeqConfig>());
  auto& params = model.params();
  const auto& shapes = header.at("params");
  if (shapes.size() != params.size()) throw IoError("checkpoint parameter count mismatch");
  auto m = params.zeros_like();
  auto v = params.zeros_like();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const int idx = static_cast<int>(i);
    if (shapes[i][0].get<std::string>() != params.name(idx) ||
        shapes[i][1].get<Eigen::Index>() != params.value(idx).rows() ||
        shapes[i][2].get<Eigen::Index>() != params.value(idx).cols()) {
      throw IoError("checkpoint parameter '" + params.name(idx) + "' does not match config");
    }
    take_matrix(bytes, pos, params.value(idx));
    take_matrix(bytes, pos, m[i]);
    take_matrix(bytes, pos, v[i]);
  }
  if (pos != bytes.size()) throw IoError("trailing bytes in checkpoint");

  Checkpoint ck{std::move(model), header.at("train").get<TrainConfig>(), std::move(m),
                std::move(v), header.at("step").get<int>(), {}};
  for (const auto& r : header.at("history")) {
    ck.history.push_back({r[0].get<int>(), r[1].get<double>(), r[2].get<double>(),
                          r[3].get<double>(), r[4].get<double>()});
  }
  return ck;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  const std::string bytes = encode_checkpoint(checkpoint);
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingDependencyError("checkpoint not found: " + path.string());
  const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return decode_checkpoint(bytes);
}

}  // namespace m2s
