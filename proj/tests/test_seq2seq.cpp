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

#include <gtest/gtest.h>

#include <filesystem>

#include <nlohmann/json.hpp>

#include "gradcheck.hpp"
#include "m2s/seq2seq.hpp"

namespace m2s {
namespace {

Matrix random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

TEST(Mse, HandExample) {
  Matrix target = Matrix::Zero(1, 2);
  Matrix pred = Matrix::Ones(1, 2);
  EXPECT_EQ(mse_loss(pred, target), 2.0);
}

TEST(Mse, MatchesDirectSum) {
  Rng rng(9);
  for (int c = 0; c < 20; ++c) {
    const Matrix a = random_matrix(rng, 5, 768);
    const Matrix b = random_matrix(rng, 5, 768);
    double sum = 0.0;
    for (int t = 0; t < 5; ++t) {
      for (int d = 0; d < 768; ++d) sum += (a(t, d) - b(t, d)) * (a(t, d) - b(t, d));
    }
    EXPECT_NEAR(mse_loss(a, b), sum / 5.0, 1e-9);
  }
}

TEST(Mse, RejectsShapeMismatch) {
  EXPECT_THROW(mse_loss(Matrix::Zero(2, 3), Matrix::Zero(3, 3)), ValidationError);
  EXPECT_THROW(mse_loss(Matrix::Zero(0, 3), Matrix::Zero(0, 3)), ValidationError);
}

TEST(TotalLoss, WeightsComponents) {
  Seq2SeqConfig c;
  EXPECT_DOUBLE_EQ(total_loss(10.0, 2.0, c), 0.001 * 10.0 + 2.0);
  c.alpha_ctc = 0.0;
  EXPECT_DOUBLE_EQ(total_loss(10.0, 2.0, c), 2.0);
}

TEST(Schedule, AnnealBoundaries) {
  TrainConfig c;
  EXPECT_DOUBLE_EQ(lr_at_step(0, c), 4.4e-2);
  EXPECT_DOUBLE_EQ(lr_at_step(2999, c), 4.4e-2);
  EXPECT_NEAR(lr_at_step(3000, c), 1.32e-2, 1e-15);
  EXPECT_NEAR(lr_at_step(3999, c), 1.32e-2, 1e-15);
  EXPECT_NEAR(lr_at_step(4000, c), 3.96e-3, 1e-15);
  EXPECT_NEAR(lr_at_step(5000, c), 1.188e-3, 1e-15);
  EXPECT_NEAR(lr_at_step(19999, c), 1.188e-3, 1e-15);
}

TEST(Config, ValidationAndJson) {
  Seq2SeqConfig s;
  s.hidden_dim = 15;
  EXPECT_THROW(s.validate(), ValidationError);
  TrainConfig t;
  t.anneal_steps = {10, 5};
  EXPECT_THROW(t.validate(), ValidationError);

  const Seq2SeqConfig a = testing::small_config();
  EXPECT_EQ(nlohmann::json(a).get<Seq2SeqConfig>(), a);
  TrainConfig b;
  b.max_steps = 7;
  EXPECT_EQ(nlohmann::json(b).get<TrainConfig>(), b);
}

TEST(Model, ForwardShapes) {
  const Seq2SeqModel model(testing::small_config(), 1);
  Rng rng(2);
  const ModelOutput out = forward(EmbeddingSequence{random_matrix(rng, 7, 10), 50.0}, model);
  EXPECT_EQ(out.predicted_embeddings.rows(), 7);
  EXPECT_EQ(out.predicted_embeddings.cols(), 10);
  EXPECT_EQ(out.encoder_states.cols(), 16);
  EXPECT_EQ(out.ctc_logits.cols(), 32);
  EXPECT_THROW(forward(EmbeddingSequence{random_matrix(rng, 7, 9), 50.0}, model),
               ValidationError);
}

TEST(Model, SameSeedSameWeights) {
  const Seq2SeqModel a(testing::small_config(), 5);
  const Seq2SeqModel b(testing::small_config(), 5);
  const Seq2SeqModel c(testing::small_config(), 6);
  EXPECT_EQ(a.params().value(0), b.params().value(0));
  EXPECT_NE(a.params().value(0), c.params().value(0));
}

TEST(Batching, CoversEveryExamplePerEpoch) {
  std::vector<int> seen(7, 0);
  for (int step = 0; step < 7; ++step) {
    for (std::size_t i : batch_indices(step, 7, 3, 99)) ++seen[i];
  }
  for (int s : seen) EXPECT_EQ(s, 3);
  EXPECT_EQ(batch_indices(4, 7, 3, 99), batch_indices(4, 7, 3, 99));
}

struct ToyData {
  std::vector<ParallelPair> pairs;
  std::vector<TokenSequence> tokens;
};

ToyData toy_data(int n) {
  Rng rng(17);
  ToyData d;
  for (int i = 0; i < n; ++i) {
    const Matrix x = random_matrix(rng, 8, 10);
    ParallelPair p;
    p.id = "u" + std::to_string(i);
    p.source = EmbeddingSequence{x, 50.0};
    p.target = EmbeddingSequence{x.array().tanh().matrix() * 0.5, 50.0};
    p.aligned = true;
    d.pairs.push_back(p);
    d.tokens.push_back({{5 + i % 3, 7}});
  }
  return d;
}

TrainConfig toy_train(int steps) {
  TrainConfig t;
  t.batch_size = 4;
  t.max_steps = steps;
  t.lr_init = 3e-3;
  t.anneal_steps = {};
  return t;
}

TEST(Train, LossDecreasesAndIsDeterministic) {
  const ToyData d = toy_data(6);
  const Checkpoint a = train(d.pairs, d.tokens, testing::small_config(), toy_train(40));
  ASSERT_EQ(a.history.size(), 40u);
  EXPECT_LT(a.history.back().total, 0.5 * a.history.front().total);
  const Checkpoint b = train(d.pairs, d.tokens, testing::small_config(), toy_train(40));
  EXPECT_EQ(encode_checkpoint(a), encode_checkpoint(b));
}

TEST(Train, ResumeMatchesUninterrupted) {
  const ToyData d = toy_data(5);
  const Checkpoint full = train(d.pairs, d.tokens, testing::small_config(), toy_train(10));
  const Checkpoint half = train(d.pairs, d.tokens, testing::small_config(), toy_train(4));
  const Checkpoint restored = decode_checkpoint(encode_checkpoint(half));
  TrainOptions opts;
  opts.resume = &restored;
  const Checkpoint rest = train(d.pairs, d.tokens, testing::small_config(), toy_train(10), opts);
  EXPECT_EQ(encode_checkpoint(rest), encode_checkpoint(full));
}

TEST(Train, ResumeRejectsDifferentConfig) {
  const ToyData d = toy_data(3);
  const Checkpoint half = train(d.pairs, d.tokens, testing::small_config(), toy_train(2));
  TrainOptions opts;
  opts.resume = &half;
  TrainConfig other = toy_train(4);
  other.lr_init = 1e-3;
  EXPECT_THROW(train(d.pairs, d.tokens, testing::small_config(), other, opts), ValidationError);
}

TEST(Train, ValidatesBeforeStepping) {
  ToyData d = toy_data(3);
  d.pairs[1].aligned = false;
  EXPECT_THROW(train(d.pairs, d.tokens, testing::small_config(), toy_train(2)), ValidationError);
  d = toy_data(3);
  d.tokens[2].tokens = {4, 4, 4, 4, 4};  // needs 9 frames, pair has 8
  EXPECT_THROW(train(d.pairs, d.tokens, testing::small_config(), toy_train(2)), CtcLengthError);
  Seq2SeqConfig no_ctc = testing::small_config();
  no_ctc.alpha_ctc = 0.0;
  EXPECT_NO_THROW(train(d.pairs, d.tokens, no_ctc, toy_train(1)));
  d = toy_data(3);
  d.pairs[0].source = UnitSequence{std::vector<int>(8, 1), 50.0};
  EXPECT_THROW(train(d.pairs, d.tokens, testing::small_config(), toy_train(2)), ValidationError);
  EXPECT_THROW(train({}, {}, testing::small_config(), toy_train(2)), ValidationError);
}

TEST(Checkpoint, FileRoundTrip) {
  const ToyData d = toy_data(3);
  const Checkpoint ck = train(d.pairs, d.tokens, testing::small_config(), toy_train(3));
  const auto path = std::filesystem::temp_directory_path() / "m2s_ckpt_test.bin";
  save_checkpoint(ck, path);
  const Checkpoint back = load_checkpoint(path);
  EXPECT_EQ(back.step, 3);
  EXPECT_EQ(back.history, ck.history);
  EXPECT_EQ(infer(d.pairs[0].target, back).frames, infer(d.pairs[0].target, ck).frames);
  std::filesystem::remove(path);
  EXPECT_THROW(load_checkpoint(path), MissingDependencyError);
  EXPECT_THROW(decode_checkpoint("nope"), IoError);
}

}  // namespace
}  // namespace m2s
