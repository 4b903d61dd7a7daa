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

#include <cmath>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "m2s/error.hpp"
#include "m2s/toy_world.hpp"
#include "m2s/voclone.hpp"

namespace m2s {
namespace {

// lj and whisper renditions of a few sentences, a K=32 codebook and a
// vocoder fitted on both voices. Built once per process.
struct ToySetup {
  ToyEncoder encoder;
  Codebook codebook;
  std::vector<VocoderExample> examples;
  std::unique_ptr<OscillatorVocoder> vocoder;
};

VocoderConfig toy_config(int k) {
  VocoderConfig c;
  c.num_embeddings = k;
  c.speaker_ids = {"lj", "whisper"};
  c.learning_rate = 0.05;
  c.train_steps = 300;
  return c;
}

const ToySetup& setup() {
  static const ToySetup s = [] {
    ToySetup t;
    Rng rng(5);
    std::vector<EmbeddingSequence> embs;
    for (int i = 0; i < 8; ++i) {
      const std::string text = toy::random_sentence(rng);
      for (const std::string voice : {"lj", "whisper"}) {
        const AudioBuffer a = toy::render(text, toy::voice_by_name(voice),
                                          100 + i + (voice == "lj" ? 0 : 1000), 7 + i);
        embs.push_back(extract_embeddings(a, t.encoder));
        t.examples.push_back({{}, a, voice});
      }
    }
    t.codebook = fit_codebook(embs, 32, 11, 50);
    for (std::size_t i = 0; i < embs.size(); ++i) {
      t.examples[i].units = quantize(embs[i], t.codebook);
    }
    t.vocoder = std::make_unique<OscillatorVocoder>(toy_config(32));
    t.vocoder->fit(t.examples, t.codebook);
    return t;
  }();
  return s;
}

UnitSequence constant_units(int unit, std::size_t n) {
  UnitSequence u;
  u.units.assign(n, unit);
  return u;
}

AudioBuffer whisper(const std::string& text, std::uint64_t seed) {
  return toy::render(text, toy::voice_by_name("whisper"), seed, seed + 1);
}

TEST(VocoderConfig, PaperDefaultsAndValidation) {
  VocoderConfig c;
  EXPECT_EQ(c.num_embeddings, 100);
  EXPECT_EQ(c.embedding_dim, 128);
  EXPECT_EQ(c.model_input_dim, 256);
  EXPECT_DOUBLE_EQ(c.learning_rate, 2e-4);
  EXPECT_EQ(c.batch_size, 16);
  EXPECT_EQ(c.speaker_dim(), 128);
  c.model_input_dim = 64;
  EXPECT_THROW(c.validate(), ValidationError);
}

TEST(VocoderConfig, JsonRoundTrip) {
  VocoderConfig c = toy_config(12);
  const nlohmann::json j = c;
  EXPECT_EQ(j.get<VocoderConfig>(), c);
}

TEST(UnitPitch, Map) {
  EXPECT_DOUBLE_EQ(unit_pitch_hz(0), 50.0);
  EXPECT_DOUBLE_EQ(unit_pitch_hz(31), 65.5);
  EXPECT_DOUBLE_EQ(unit_pitch_hz(99), 99.5);
}

TEST(TrainVocoder, LossDecreasesOnTinySet) {
  const auto& s = setup();
  const std::vector<VocoderExample> tiny(s.examples.begin(), s.examples.begin() + 5);
  VocoderConfig c = toy_config(32);
  c.train_steps = 10;
  OscillatorVocoder v(c);
  const auto losses = train_vocoder(tiny, s.codebook, v);
  ASSERT_EQ(losses.size(), 10u);
  EXPECT_LT(losses.back(), losses.front());
  EXPECT_TRUE(v.trained());
}

TEST(TrainVocoder, EmptySetIsAnError) {
  OscillatorVocoder v(toy_config(32));
  EXPECT_THROW(train_vocoder({}, setup().codebook, v), ValidationError);
}

TEST(TrainVocoder, LengthMismatchIsAnError) {
  const auto& s = setup();
  VocoderExample bad = s.examples[0];
  bad.units.units.resize(bad.units.units.size() - 3);
  OscillatorVocoder v(toy_config(32));
  EXPECT_THROW(v.fit(std::vector<VocoderExample>{bad}, s.codebook), ValidationError);
}

TEST(TrainVocoder, FixedSeedGivesIdenticalWeights) {
  const auto& s = setup();
  const std::vector<VocoderExample> few(s.examples.begin(), s.examples.begin() + 4);
  VocoderConfig c = toy_config(32);
  c.train_steps = 20;
  OscillatorVocoder a(c);
  OscillatorVocoder b(c);
  a.fit(few, s.codebook);
  b.fit(few, s.codebook);
  EXPECT_EQ(a.weights_checksum(), b.weights_checksum());
  c.seed += 1;
  OscillatorVocoder other(c);
  other.fit(few, s.codebook);
  EXPECT_NE(a.weights_checksum(), other.weights_checksum());
}

TEST(Synthesize, DurationFollowsUnitCount) {
  const AudioBuffer a = synthesize(constant_units(3, 100), "lj", *setup().vocoder);
  EXPECT_NEAR(a.duration_s(), 2.0, 0.02);
  for (double x : a.samples) ASSERT_LE(std::abs(x), 1.0);
}

TEST(Synthesize, Deterministic) {
  const auto& s = setup();
  const UnitSequence& u = s.examples[1].units;
  EXPECT_EQ(synthesize(u, "lj", *s.vocoder), synthesize(u, "lj", *s.vocoder));
  const EmbeddingSequence e = extract_embeddings(s.examples[1].audio, s.encoder);
  EXPECT_EQ(synthesize(e, "lj", *s.vocoder, VocoderInput::kEmbeddings),
            synthesize(e, "lj", *s.vocoder, VocoderInput::kEmbeddings));
}

TEST(Synthesize, SpeakerChangesWaveform) {
  const auto& s = setup();
  const UnitSequence& u = s.examples[0].units;
  EXPECT_NE(synthesize(u, "lj", *s.vocoder), synthesize(u, "whisper", *s.vocoder));
}

TEST(Synthesize, EmbeddingModesKeepLength) {
  const auto& s = setup();
  const EmbeddingSequence e = extract_embeddings(s.examples[2].audio, s.encoder);
  const AudioBuffer soft = synthesize(e, "lj", *s.vocoder, VocoderInput::kEmbeddings);
  const AudioBuffer hard = synthesize(e, "lj", *s.vocoder, VocoderInput::kUnits);
  EXPECT_EQ(soft.samples.size(), hard.samples.size());
  EXPECT_EQ(hard, synthesize(quantize(e, s.codebook), "lj", *s.vocoder));
}

// Autocorrelation peak over lags for 40-120 Hz.
double fundamental_hz(const AudioBuffer& a) {
  const std::size_t begin = 1600;
  const std::size_t n = a.samples.size() - begin - 500;
  int best_lag = 0;
  double best = -1.0;
  for (int lag = a.sample_rate / 120; lag <= a.sample_rate / 40; ++lag) {
    double r = 0.0;
    for (std::size_t i = begin; i < begin + n - lag; ++i) r += a.samples[i] * a.samples[i + lag];
    if (r > best) {
      best = r;
      best_lag = lag;
    }
  }
  return static_cast<double>(a.sample_rate) / best_lag;
}

TEST(Synthesize, ConstantUnitIsPeriodicAtUnitPitch) {
  for (int k : {4, 17, 30}) {
    const AudioBuffer a = synthesize(constant_units(k, 40), "lj", *setup().vocoder);
    const double f0 = unit_pitch_hz(k);
    // One sample of lag is about f0^2 / 16000 Hz.
    EXPECT_NEAR(fundamental_hz(a), f0, f0 * f0 / 16000.0) << k;
  }
}

TEST(Synthesize, Errors) {
  const auto& s = setup();
  try {
    synthesize(constant_units(1, 10), "nobody", *s.vocoder);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("lj, whisper"), std::string::npos);
  }
  OscillatorVocoder untrained(toy_config(32));
  EXPECT_THROW(synthesize(constant_units(1, 10), "lj", untrained), MissingDependencyError);
  EXPECT_THROW(synthesize(constant_units(40, 10), "lj", *s.vocoder), ValidationError);
  EXPECT_THROW(synthesize(UnitSequence{}, "lj", *s.vocoder), ValidationError);
  EXPECT_THROW(make_vocoder("hifigan", VocoderConfig{}), MissingDependencyError);
  EXPECT_THROW(make_vocoder("nope", VocoderConfig{}), ValidationError);
}

TEST(VocoderCheckpoint, RoundTrip) {
  const auto& s = setup();
  const auto path = std::filesystem::temp_directory_path() / "m2s_vocoder_test.m2sv";
  s.vocoder->save(path);
  const auto loaded = load_vocoder(path);
  EXPECT_EQ(loaded->config(), s.vocoder->config());
  const UnitSequence& u = s.examples[3].units;
  EXPECT_EQ(loaded->render(u, "lj"), s.vocoder->render(u, "lj"));
  std::filesystem::remove(path);
  EXPECT_THROW(load_vocoder(path), MissingDependencyError);
}

TEST(SimulateGroundTruth, ThreeSecondsGivesAboutOneFiftyUnits) {
  const auto& s = setup();
  AudioBuffer w = whisper("mo tl sl", 21);
  w.samples.resize(48000, 0.0);
  const SimulatedSpeech sim = simulate_ground_truth(w, s.codebook, s.encoder, *s.vocoder, "lj");
  EXPECT_GE(sim.units.length(), 149u);
  EXPECT_LE(sim.units.length(), 150u);
  EXPECT_EQ(static_cast<Eigen::Index>(sim.units.length()),
            extract_embeddings(w, s.encoder).length());
  EXPECT_NEAR(sim.audio.duration_s(), 3.0, 0.02);
  const SimulatedSpeech again =
      simulate_ground_truth(w, s.codebook, s.encoder, *s.vocoder, "lj");
  EXPECT_EQ(sim.audio, again.audio);
  EXPECT_EQ(sim.units, again.units);
}

// Held-out whisper through the lj voice, then re-encoded and re-quantized.
TEST(SimulateGroundTruth, RoundTripUnitAgreement) {
  const auto& s = setup();
  Rng rng(99);
  std::size_t same = 0;
  std::size_t total = 0;
  for (int i = 0; i < 6; ++i) {
    const AudioBuffer w = whisper(toy::random_sentence(rng), 500 + i);
    const SimulatedSpeech sim = simulate_ground_truth(w, s.codebook, s.encoder, *s.vocoder, "lj");
    const UnitSequence again = quantize(extract_embeddings(sim.audio, s.encoder), s.codebook);
    ASSERT_EQ(again.length(), sim.units.length());
    for (std::size_t t = 0; t < again.length(); ++t) same += again.units[t] == sim.units.units[t];
    total += again.length();
  }
  EXPECT_GE(static_cast<double>(same) / static_cast<double>(total), 0.9);
}

struct CloneDir {
  std::filesystem::path root = std::filesystem::temp_directory_path() / "m2s_clone_test";
  CloneDir() { std::filesystem::create_directories(root); }
  ~CloneDir() { std::filesystem::remove_all(root); }
};

TEST(GenerateCloneCorpus, OneClonePerSourceWithMatchingDuration) {
  const auto& s = setup();
  CloneDir dir;
  std::vector<Utterance> corpus;
  Rng rng(3);
  for (int i = 0; i < 10; ++i) {
    const std::string id = "lj_" + std::to_string(i);
    const AudioBuffer a =
        toy::render(toy::random_sentence(rng), toy::voice_by_name("lj"), 40 + i, 80 + i);
    write_audio(a, dir.root / (id + ".wav"));
    corpus.push_back(Utterance{.id = id, .nam_path = dir.root / (id + ".wav"), .text = "x"});
  }
  corpus.push_back(Utterance{.id = "gone", .nam_path = dir.root / "gone.wav", .text = "x"});
  const CloneBatch batch = generate_clone_corpus(corpus, s.codebook, s.encoder, *s.vocoder,
                                                 "whisper");
  ASSERT_EQ(batch.clones.size(), 10u);
  ASSERT_EQ(batch.failures.size(), 1u);
  EXPECT_EQ(batch.failures[0].id, "gone");
  for (std::size_t i = 0; i < batch.clones.size(); ++i) {
    EXPECT_EQ(batch.clones[i].source.id, corpus[i].id);
    const double src = read_audio(corpus[i].nam_path).duration_s();
    EXPECT_LE(std::abs(batch.clones[i].audio.duration_s() - src), 0.02) << corpus[i].id;
  }
  EXPECT_TRUE(generate_clone_corpus({}, s.codebook, s.encoder, *s.vocoder, "whisper")
                  .clones.empty());
}

EmbeddingSequence random_sequence(Rng& rng, Eigen::Index t, Eigen::Index d) {
  EmbeddingSequence e;
  e.frames.resize(t, d);
  for (Eigen::Index i = 0; i < e.frames.size(); ++i) e.frames.data()[i] = rng.normal();
  return e;
}

TEST(BuildAlignedPairs, SelfAlignmentIsIdentity) {
  Rng rng(8);
  const EmbeddingSequence e = random_sequence(rng, 30, 6);
  const ParallelPair p = build_aligned_pairs(e, e, 2, FrameMetric::kEuclidean, "self");
  EXPECT_TRUE(p.aligned);
  EXPECT_EQ(p.id, "self");
  EXPECT_EQ(std::get<EmbeddingSequence>(p.source).frames, e.frames);
  EXPECT_EQ(p.target.frames, e.frames);
}

TEST(BuildAlignedPairs, WarpsOntoTargetLength) {
  Rng rng(9);
  const ParallelPair p =
      build_aligned_pairs(random_sequence(rng, 120, 4), random_sequence(rng, 100, 4), 1);
  EXPECT_EQ(p.source_length(), 100);
  EXPECT_EQ(p.target.length(), 100);
  EXPECT_NO_THROW(validate_pair(p));
}

TEST(BuildAlignedPairs, SourceIndicesNonDecreasing) {
  Rng rng(10);
  for (int c = 0; c < 20; ++c) {
    const EmbeddingSequence a = random_sequence(rng, 10 + c, 3);
    const EmbeddingSequence b = random_sequence(rng, 25 - c / 2, 3);
    const ParallelPair p = build_aligned_pairs(a, b, 1);
    const Matrix& warped = std::get<EmbeddingSequence>(p.source).frames;
    // Random rows are distinct, so each warped row names its source frame.
    int prev = -1;
    for (Eigen::Index j = 0; j < warped.rows(); ++j) {
      Eigen::Index i = 0;
      (a.frames.rowwise() - warped.row(j)).rowwise().squaredNorm().minCoeff(&i);
      ASSERT_EQ(a.frames.row(i), warped.row(j));
      EXPECT_GE(i, prev);
      prev = static_cast<int>(i);
    }
    EXPECT_EQ(p.source_length(), b.length());
  }
}

TEST(BuildAlignedPairs, EmptyIsAnError) {
  Rng rng(11);
  EXPECT_THROW(build_aligned_pairs(EmbeddingSequence{}, random_sequence(rng, 3, 2), 1),
               ValidationError);
}

}  // namespace
}  // namespace m2s
