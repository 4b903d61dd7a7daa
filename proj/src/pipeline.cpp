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

#include "m2s/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "m2s/align.hpp"
#include "m2s/error.hpp"
#include "m2s/parallel_pair.hpp"
#include "m2s/tokenizer.hpp"

namespace m2s {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

template <typename T>
void read_field(const json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

void read_path(const json& j, const char* key, fs::path& field) {
  if (j.contains(key)) field = fs::path(j.at(key).get<std::string>());
}

void reject_unknown(const json& j, std::initializer_list<const char*> known,
                    const std::string& section) {
  if (!j.is_object()) throw ValidationError("config section '" + section + "' is not an object");
  for (const auto& [key, value] : j.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
      throw ValidationError("unknown config key '" + section + (section.empty() ? "" : ".") +
                            key + "'");
    }
  }
}

std::string hex(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

std::string hash_text(const std::string& s) { return hex(Fnv1a().update(s).digest()); }

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

std::string file_hash(const fs::path& path) { return hash_text(slurp(path)); }

}  // namespace

void PipelineConfig::validate() const {
  split_sizes(1, corpus.test_frac, corpus.val_frac);
  if (encoder.backend != "toy" && encoder.backend != "hubert") {
    throw ValidationError("unknown encoder backend '" + encoder.backend + "'");
  }
  if (codebook.k < 1 || codebook.max_iters < 1) {
    throw ValidationError("codebook k and max_iters must be positive");
  }
  if (align.radius < 0) throw ValidationError("fastdtw radius must be >= 0");
  frame_metric_from_string(align.metric);
  seq2seq.validate();
  train.validate();
  const VocoderConfig vc = vocoder_config();
  vc.validate();
  if (codebook.k > vc.num_embeddings) {
    throw ValidationError("codebook k " + std::to_string(codebook.k) +
                          " exceeds vocoder num_embeddings " + std::to_string(vc.num_embeddings));
  }
  if (encoder.backend == "toy" && encoder.toy.dim != seq2seq.embedding_dim) {
    throw ValidationError("encoder dim " + std::to_string(encoder.toy.dim) +
                          " differs from seq2seq embedding_dim " +
                          std::to_string(seq2seq.embedding_dim));
  }
  if (voices.reference.empty()) throw ValidationError("no reference voices configured");
  if (std::find(voices.reference.begin(), voices.reference.end(), voices.ground_truth) ==
      voices.reference.end()) {
    throw ValidationError("ground-truth voice '" + voices.ground_truth +
                          "' is not a reference voice");
  }
  for (const auto* s : {&voices.ground_truth, &voices.nam, &voices.inference}) {
    if (vc.speaker_index(*s) < 0) {
      throw ValidationError("voice '" + *s + "' is not among the vocoder speakers");
    }
  }
  vocoder_input_from_string(inference_input);
  static const std::set<std::string> transcribers = {"template", "echo", "empty", "whisper"};
  if (!transcribers.contains(transcriber)) {
    throw ValidationError("unknown transcriber '" + transcriber + "'");
  }
}

VocoderConfig PipelineConfig::vocoder_config() const {
  VocoderConfig c = vocoder.config;
  if (c.speaker_ids.empty()) {
    c.speaker_ids = voices.reference;
    if (std::find(c.speaker_ids.begin(), c.speaker_ids.end(), voices.nam) == c.speaker_ids.end()) {
      c.speaker_ids.push_back(voices.nam);
    }
  }
  return c;
}

void to_json(json& j, const PipelineConfig& c) {
  j = json::object();
  j["paths"] = {{"corpus_root", c.paths.corpus_root.generic_string()},
                {"reference_root", c.paths.reference_root.generic_string()},
                {"cache_dir", c.paths.cache_dir.generic_string()},
                {"output_dir", c.paths.output_dir.generic_string()}};
  j["corpus"] = {{"primary_dir", c.corpus.primary_dir},
                 {"whisper_dir", c.corpus.whisper_dir},
                 {"test_frac", c.corpus.test_frac},
                 {"val_frac", c.corpus.val_frac},
                 {"seed", c.corpus.seed}};
  const ToyEncoderOptions& t = c.encoder.toy;
  j["encoder"] = {{"backend", c.encoder.backend},
                  {"layer", c.encoder.layer},
                  {"toy",
                   {{"dim", t.dim},
                    {"frame_rate", t.frame_rate},
                    {"n_mels", t.n_mels},
                    {"lifter", t.lifter},
                    {"log_offset", t.log_offset},
                    {"log_scale", t.log_scale},
                    {"seed", t.seed}}}};
  j["codebook"] = {{"k", c.codebook.k}, {"seed", c.codebook.seed},
                   {"max_iters", c.codebook.max_iters}};
  j["align"] = {{"radius", c.align.radius}, {"metric", c.align.metric}};
  j["seq2seq"] = c.seq2seq;
  j["train"] = c.train;
  j["vocoder"] = {{"backend", c.vocoder.backend}, {"config", c.vocoder.config}};
  j["voices"] = {{"reference", c.voices.reference},
                 {"ground_truth", c.voices.ground_truth},
                 {"nam", c.voices.nam},
                 {"inference", c.voices.inference}};
  j["inference_input"] = c.inference_input;
  j["transcriber"] = c.transcriber;
  j["augment_cap"] = c.augment_cap;
}

void from_json(const json& j, PipelineConfig& c) {
  c = PipelineConfig{};
  reject_unknown(j,
                 {"paths", "corpus", "encoder", "codebook", "align", "seq2seq", "train", "vocoder",
                  "voices", "inference_input", "transcriber", "augment_cap"},
                 "");
  if (j.contains("paths")) {
    const json& p = j.at("paths");
    reject_unknown(p, {"corpus_root", "reference_root", "cache_dir", "output_dir"}, "paths");
    read_path(p, "corpus_root", c.paths.corpus_root);
    read_path(p, "reference_root", c.paths.reference_root);
    read_path(p, "cache_dir", c.paths.cache_dir);
    read_path(p, "output_dir", c.paths.output_dir);
  }
  if (j.contains("corpus")) {
    const json& s = j.at("corpus");
    reject_unknown(s, {"primary_dir", "whisper_dir", "test_frac", "val_frac", "seed"}, "corpus");
    read_field(s, "primary_dir", c.corpus.primary_dir);
    read_field(s, "whisper_dir", c.corpus.whisper_dir);
    read_field(s, "test_frac", c.corpus.test_frac);
    read_field(s, "val_frac", c.corpus.val_frac);
    read_field(s, "seed", c.corpus.seed);
  }
  if (j.contains("encoder")) {
    const json& s = j.at("encoder");
    reject_unknown(s, {"backend", "layer", "toy"}, "encoder");
    read_field(s, "backend", c.encoder.backend);
    read_field(s, "layer", c.encoder.layer);
    if (s.contains("toy")) {
      const json& t = s.at("toy");
      reject_unknown(t, {"dim", "frame_rate", "n_mels", "lifter", "log_offset", "log_scale", "seed"},
                     "encoder.toy");
      read_field(t, "dim", c.encoder.toy.dim);
      read_field(t, "frame_rate", c.encoder.toy.frame_rate);
      read_field(t, "n_mels", c.encoder.toy.n_mels);
      read_field(t, "lifter", c.encoder.toy.lifter);
      read_field(t, "log_offset", c.encoder.toy.log_offset);
      read_field(t, "log_scale", c.encoder.toy.log_scale);
      read_field(t, "seed", c.encoder.toy.seed);
    }
  }
  if (j.contains("codebook")) {
    const json& s = j.at("codebook");
    reject_unknown(s, {"k", "seed", "max_iters"}, "codebook");
    read_field(s, "k", c.codebook.k);
    read_field(s, "seed", c.codebook.seed);
    read_field(s, "max_iters", c.codebook.max_iters);
  }
  if (j.contains("align")) {
    const json& s = j.at("align");
    reject_unknown(s, {"radius", "metric"}, "align");
    read_field(s, "radius", c.align.radius);
    read_field(s, "metric", c.align.metric);
  }
  read_field(j, "seq2seq", c.seq2seq);
  read_field(j, "train", c.train);
  if (j.contains("vocoder")) {
    const json& s = j.at("vocoder");
    reject_unknown(s, {"backend", "config"}, "vocoder");
    read_field(s, "backend", c.vocoder.backend);
    read_field(s, "config", c.vocoder.config);
  }
  if (j.contains("voices")) {
    const json& s = j.at("voices");
    reject_unknown(s, {"reference", "ground_truth", "nam", "inference"}, "voices");
    read_field(s, "reference", c.voices.reference);
    read_field(s, "ground_truth", c.voices.ground_truth);
    read_field(s, "nam", c.voices.nam);
    read_field(s, "inference", c.voices.inference);
  }
  read_field(j, "inference_input", c.inference_input);
  read_field(j, "transcriber", c.transcriber);
  read_field(j, "augment_cap", c.augment_cap);
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  const std::string text = [&] {
    try {
      return slurp(path);
    } catch (const IoError&) {
      throw IoError("cannot read config " + path.string());
    }
  }();
  PipelineConfig c;
  try {
    c = json::parse(text).get<PipelineConfig>();
  } catch (const json::exception& e) {
    throw ValidationError("bad config " + path.string() + ": " + e.what());
  }
  const fs::path base = fs::absolute(path).parent_path();
  for (fs::path* p : {&c.paths.corpus_root, &c.paths.reference_root, &c.paths.cache_dir,
                      &c.paths.output_dir}) {
    if (!p->empty() && p->is_relative()) *p = (base / *p).lexically_normal();
  }
  if (const char* env = std::getenv("M2S_CACHE_DIR"); env && *env) {
    c.paths.cache_dir = fs::absolute(env);
  }
  c.validate();
  return c;
}

std::string format_pipeline_config(const PipelineConfig& config) {
  return json(config).dump(2) + "\n";
}

void override_seed(PipelineConfig& config, std::uint64_t seed) {
  config.corpus.seed = seed;
  config.codebook.seed = seed;
  config.vocoder.config.seed = seed;
  config.train.seed = seed;
}

Pipeline::Pipeline(PipelineConfig config, std::ostream* log)
    : config_(std::move(config)), log_(log) {
  config_.validate();
  encoder_ = make_encoder(config_.encoder.backend, config_.encoder.layer, config_.encoder.toy);
  encoder_key_ = hash_text(encoder_->fingerprint());
}

Pipeline::~Pipeline() = default;

void Pipeline::note(const std::string& line) const {
  if (log_) *log_ << line << std::endl;
}

fs::path Pipeline::manifest_path() const {
  return config_.paths.cache_dir / "prepare" / "manifest.jsonl";
}

fs::path Pipeline::split_path() const { return config_.paths.cache_dir / "prepare" / "split.json"; }

fs::path Pipeline::checkpoint_path() const {
  return config_.paths.output_dir / "checkpoint.m2sc";
}

fs::path Pipeline::report_path(bool csv) const {
  return config_.paths.output_dir / (csv ? "report.csv" : "report.json");
}

PrepareResult Pipeline::prepare() {
  if (config_.paths.corpus_root.empty()) throw ValidationError("paths.corpus_root is not set");
  CorpusLayout layout;
  layout.primary_dir = config_.corpus.primary_dir;
  layout.whisper_dir = config_.corpus.whisper_dir;
  const std::vector<Utterance> utts = scan_corpus(config_.paths.corpus_root, layout);
  const CorpusSplit s =
      split_corpus(utts, config_.corpus.seed, config_.corpus.test_frac, config_.corpus.val_frac);
  save_manifest(utts, manifest_path());
  nlohmann::ordered_json j;
  j["seed"] = s.seed;
  for (const auto& [name, part] : {std::pair{"train", &s.train}, std::pair{"val", &s.val},
                                   std::pair{"test", &s.test}}) {
    j[name] = json::array();
    for (const auto& u : *part) j[name].push_back(u.id);
  }
  spit(split_path(), j.dump(2) + "\n");
  PrepareResult r{manifest_path(), split_path(), {s.train.size(), s.val.size(), s.test.size()}};
  note("prepare: " + std::to_string(utts.size()) + " utterances, split " +
       std::to_string(r.sizes.train) + "/" + std::to_string(r.sizes.val) + "/" +
       std::to_string(r.sizes.test));
  return r;
}

std::vector<Utterance> Pipeline::manifest() const {
  if (!fs::exists(manifest_path())) {
    throw MissingDependencyError("no corpus manifest at " + manifest_path().string() +
                                 "; run m2s prepare");
  }
  return load_manifest(manifest_path());
}

CorpusSplit Pipeline::split() const {
  const std::vector<Utterance> utts = manifest();
  if (!fs::exists(split_path())) {
    throw MissingDependencyError("no split at " + split_path().string() + "; run m2s prepare");
  }
  json j;
  try {
    j = json::parse(slurp(split_path()));
  } catch (const json::exception& e) {
    throw ValidationError("bad split file: " + std::string(e.what()));
  }
  std::map<std::string, const Utterance*> by_id;
  for (const auto& u : utts) by_id[u.id] = &u;
  CorpusSplit s;
  s.seed = j.value("seed", std::uint64_t{0});
  for (const auto& [name, part] : {std::pair{"train", &s.train}, std::pair{"val", &s.val},
                                   std::pair{"test", &s.test}}) {
    for (const auto& id : j.at(name)) {
      auto it = by_id.find(id.get<std::string>());
      if (it == by_id.end()) throw ValidationError("split names unknown id " + id.dump());
      part->push_back(*it->second);
    }
  }
  return s;
}

std::vector<Utterance> Pipeline::reference_utterances(const std::string& speaker) const {
  if (config_.paths.reference_root.empty()) {
    throw ValidationError("paths.reference_root is not set");
  }
  CorpusLayout layout;
  layout.primary_dir = speaker;
  layout.whisper_dir.clear();
  std::vector<Utterance> utts = scan_corpus(config_.paths.reference_root, layout);
  for (auto& u : utts) {
    u.speaker = speaker;
    u.origin = Origin::kNatural;
  }
  return utts;
}

EmbeddingSequence Pipeline::embed(const fs::path& audio_path) {
  const std::string bytes = slurp(audio_path);
  const fs::path cached = config_.paths.cache_dir / "embed" / encoder_key_ /
                          (hash_text(bytes) + ".m2se");
  if (fs::exists(cached)) return read_embeddings(cached);
  const EmbeddingSequence e = extract_embeddings(read_audio(audio_path), *encoder_);
  write_embeddings(e, cached);
  return e;
}

std::string Pipeline::codebook_key() {
  json j;
  j["encoder"] = encoder_key_;
  j["k"] = config_.codebook.k;
  j["seed"] = config_.codebook.seed;
  j["max_iters"] = config_.codebook.max_iters;
  j["corpus"] = corpus_fingerprint();
  j["split"] = file_hash(split_path());
  for (const auto& spk : config_.voices.reference) j["reference"][spk] = reference_fingerprint(spk);
  return hash_text(j.dump());
}

// Ids, texts and audio content; independent of where the corpus lives.
std::string Pipeline::corpus_fingerprint() {
  if (!corpus_fp_) {
    Fnv1a h;
    for (const auto& u : manifest()) {
      h.update(u.id).update("\t").update(u.text).update("\t").update(file_hash(u.nam_path));
      h.update("\t").update(u.whisper_path ? file_hash(*u.whisper_path) : "-").update("\n");
    }
    corpus_fp_ = hex(h.digest());
  }
  return *corpus_fp_;
}

std::string Pipeline::reference_fingerprint(const std::string& speaker) {
  auto it = reference_fp_.find(speaker);
  if (it != reference_fp_.end()) return it->second;
  Fnv1a h;
  for (const auto& u : reference_utterances(speaker)) {
    h.update(u.id).update("\t").update(u.text).update("\t").update(file_hash(u.nam_path));
    h.update("\n");
  }
  return reference_fp_[speaker] = hex(h.digest());
}

const Codebook& Pipeline::codebook() {
  if (codebook_) return *codebook_;
  const fs::path path = config_.paths.cache_dir / "codebook" / codebook_key() / "codebook.bin";
  if (fs::exists(path)) {
    codebook_ = read_codebook(path);
    return *codebook_;
  }
  std::vector<EmbeddingSequence> embs;
  for (const auto& u : split().train) {
    embs.push_back(embed(u.nam_path));
    if (u.whisper_path) embs.push_back(embed(*u.whisper_path));
  }
  for (const auto& spk : config_.voices.reference) {
    for (const auto& u : reference_utterances(spk)) embs.push_back(embed(u.nam_path));
  }
  codebook_ = fit_codebook(embs, config_.codebook.k, config_.codebook.seed,
                           config_.codebook.max_iters);
  write_codebook(*codebook_, path);
  note("codebook: k=" + std::to_string(config_.codebook.k) + " over " +
       std::to_string(embs.size()) + " utterances");
  return *codebook_;
}

std::string Pipeline::vocoder_key() {
  json j;
  j["codebook"] = codebook_key();
  j["backend"] = config_.vocoder.backend;
  j["config"] = config_.vocoder_config();
  j["nam_voice"] = config_.voices.nam;
  return hash_text(j.dump());
}

fs::path Pipeline::vocoder_path() {
  return config_.paths.cache_dir / "vocoder" / vocoder_key() / "vocoder.m2sv";
}

const VocoderBackend& Pipeline::vocoder() {
  if (vocoder_) return *vocoder_;
  const fs::path path = vocoder_path();
  if (!fs::exists(path)) {
    throw MissingDependencyError("vocoder is not trained (" + path.string() +
                                 "); run m2s simulate-gt");
  }
  vocoder_ = load_vocoder(path);
  return *vocoder_;
}

std::string Pipeline::simulate_key() {
  json j;
  j["vocoder"] = vocoder_key();
  j["voice"] = config_.voices.ground_truth;
  return hash_text(j.dump());
}

fs::path Pipeline::simulated_dir() {
  return config_.paths.cache_dir / "simulated_gt" / simulate_key();
}

SimulateResult Pipeline::simulate_gt() {
  const std::vector<Utterance> utts = manifest();
  const Codebook& cb = codebook();
  if (!vocoder_ && !fs::exists(vocoder_path())) {
    std::vector<VocoderExample> examples;
    for (const auto& spk : config_.voices.reference) {
      for (const auto& u : reference_utterances(spk)) {
        examples.push_back({quantize(embed(u.nam_path), cb), read_audio(u.nam_path), spk});
      }
    }
    for (const auto& u : split().train) {
      examples.push_back({quantize(embed(u.nam_path), cb), read_audio(u.nam_path),
                          config_.voices.nam});
    }
    auto v = make_vocoder(config_.vocoder.backend, config_.vocoder_config());
    const std::vector<double> losses = train_vocoder(examples, cb, *v);
    v->save(vocoder_path());
    std::ostringstream msg;
    msg << "vocoder: " << examples.size() << " utterances, loss " << losses.front() << " -> "
        << losses.back();
    note(msg.str());
  }
  const VocoderBackend& voc = vocoder();

  SimulateResult r;
  const fs::path dir = simulated_dir();
  std::vector<Utterance> out;
  for (const auto& u : utts) {
    if (!u.whisper_path) {
      ++r.skipped;
      continue;
    }
    const fs::path wav = dir / (u.id + ".wav");
    if (!fs::exists(wav)) {
      const SimulatedSpeech sim = simulate_ground_truth(read_audio(*u.whisper_path), cb, *encoder_,
                                                        voc, config_.voices.ground_truth);
      write_audio(sim.audio, wav);
    }
    Utterance s = u;
    s.nam_path = wav;
    s.whisper_path.reset();
    s.duration_s = read_audio(wav).duration_s();
    s.source_id = u.id;
    s.origin = Origin::kSimulatedGt;
    s.speaker = config_.voices.ground_truth;
    out.push_back(std::move(s));
    ++r.written;
  }
  r.manifest = dir / "manifest.jsonl";
  save_manifest(out, r.manifest);
  note("simulate-gt: " + std::to_string(r.written) + " written, " + std::to_string(r.skipped) +
       " skipped without whisper audio");
  return r;
}

std::string Pipeline::augment_key() {
  json j;
  j["vocoder"] = vocoder_key();
  j["encoder"] = encoder_key_;
  j["voice"] = config_.voices.nam;
  j["radius"] = config_.align.radius;
  j["metric"] = config_.align.metric;
  return hash_text(j.dump());
}

fs::path Pipeline::augment_dir() { return config_.paths.cache_dir / "augment" / augment_key(); }

AugmentResult Pipeline::augment(std::optional<fs::path> source_manifest) {
  std::vector<Utterance> sources = source_manifest
                                       ? load_manifest(*source_manifest)
                                       : reference_utterances(config_.voices.ground_truth);
  if (config_.augment_cap >= 0 && sources.size() > static_cast<std::size_t>(config_.augment_cap)) {
    sources.resize(static_cast<std::size_t>(config_.augment_cap));
  }
  const Codebook& cb = codebook();
  const VocoderBackend& voc = vocoder();
  const FrameMetric metric = frame_metric_from_string(config_.align.metric);

  AugmentResult r;
  const fs::path dir = augment_dir();
  r.pair_dir = dir / "pairs";
  std::vector<Utterance> out;
  std::set<std::string> keep;
  // Source content per cached clone; a clone is reused only for the same audio.
  const fs::path index_path = dir / "sources.json";
  const json cached = fs::exists(index_path) ? json::parse(slurp(index_path)) : json::object();
  json index = json::object();
  for (const Utterance& src : sources) {
    const fs::path wav = dir / "clones" / (src.id + ".wav");
    const fs::path pair_file = r.pair_dir / (src.id + ".m2sp");
    try {
      const std::string src_hash = file_hash(src.nam_path);
      index[src.id] = src_hash;
      if (cached.value(src.id, "") != src_hash || !fs::exists(wav) || !fs::exists(pair_file)) {
        const CloneBatch batch = generate_clone_corpus(std::span(&src, 1), cb, *encoder_, voc,
                                                       config_.voices.nam);
        if (!batch.failures.empty()) {
          index.erase(src.id);
          r.failures.push_back(batch.failures.front());
          continue;
        }
        write_audio(batch.clones.front().audio, wav);
        const ParallelPair pair = build_aligned_pairs(embed(wav), embed(src.nam_path),
                                                      config_.align.radius, metric, src.id);
        write_pair(pair, pair_file);
      }
    } catch (const std::exception& e) {
      index.erase(src.id);
      r.failures.push_back({src.id, e.what()});
      continue;
    }
    Utterance c = src;
    c.nam_path = wav;
    c.whisper_path.reset();
    c.duration_s = read_audio(wav).duration_s();
    c.source_id = src.id;
    c.origin = Origin::kClone;
    c.speaker = config_.voices.nam;
    out.push_back(std::move(c));
    keep.insert(src.id);
    ++r.clones;
  }
  // Drop artifacts of sources outside this run, so the directory matches the manifest.
  for (const fs::path& sub : {dir / "clones", r.pair_dir}) {
    if (!fs::exists(sub)) continue;
    for (const auto& entry : fs::directory_iterator(sub)) {
      if (!keep.contains(entry.path().stem().string())) fs::remove(entry.path());
    }
  }
  spit(index_path, index.dump(1) + "\n");
  r.manifest = dir / "manifest.jsonl";
  save_manifest(out, r.manifest);
  note("augment: " + std::to_string(r.clones) + " clones, " + std::to_string(r.failures.size()) +
       " failed");
  for (const auto& f : r.failures) note("  " + f.id + ": " + f.message);
  return r;
}

std::string Pipeline::pairs_key() {
  json j;
  j["simulated"] = simulate_key();
  j["encoder"] = encoder_key_;
  j["radius"] = config_.align.radius;
  j["metric"] = config_.align.metric;
  return hash_text(j.dump());
}

std::vector<ParallelPair> Pipeline::natural_pairs(const std::vector<Utterance>& utts) {
  const FrameMetric metric = frame_metric_from_string(config_.align.metric);
  const fs::path sim = simulated_dir();
  const fs::path dir = config_.paths.cache_dir / "pairs" / pairs_key();
  std::vector<ParallelPair> pairs;
  std::vector<std::string> missing;
  for (const auto& u : utts) {
    const fs::path target = sim / (u.id + ".wav");
    if (!fs::exists(target)) {
      if (u.whisper_path) missing.push_back(u.id);
      continue;
    }
    const fs::path file = dir / (u.id + ".m2sp");
    if (!fs::exists(file)) {
      // NAM and whisper are separate recordings, so NAM is aligned to the
      // whisper-timed simulation as well.
      write_pair(build_aligned_pairs(embed(u.nam_path), embed(target), config_.align.radius,
                                     metric, u.id),
                 file);
    }
    pairs.push_back(read_pair(file));
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& id : missing) list += " " + id;
    throw MissingDependencyError("simulated ground truth missing for:" + list +
                                 "; run m2s simulate-gt");
  }
  return pairs;
}

TrainResult Pipeline::train(bool resume) {
  const CorpusSplit s = split();
  TrainResult r;
  std::vector<ParallelPair> pairs = natural_pairs(s.train);
  std::vector<std::string> texts;
  for (const auto& u : s.train) {
    if (std::any_of(pairs.begin(), pairs.end(), [&](const ParallelPair& p) { return p.id == u.id; })) {
      texts.push_back(u.text);
    }
  }
  r.natural_pairs = static_cast<int>(pairs.size());
  const fs::path aug_manifest = augment_dir() / "manifest.jsonl";
  if (fs::exists(aug_manifest)) {
    for (const auto& u : load_manifest(aug_manifest)) {
      ParallelPair p = read_pair(augment_dir() / "pairs" / (u.id + ".m2sp"));
      validate_pair(p);
      pairs.push_back(std::move(p));
      texts.push_back(u.text);
      ++r.augmented_pairs;
    }
  } else {
    note("train: no augmented pairs; run m2s augment to add them");
  }
  if (pairs.empty()) {
    throw MissingDependencyError("no aligned pairs found; run m2s simulate-gt and m2s augment");
  }
  const CharTokenizer tok(config_.seq2seq.vocab);
  std::vector<TokenSequence> tokens;
  for (const auto& t : texts) tokens.push_back({tok.encode(t)});

  std::optional<Checkpoint> previous;
  TrainOptions opts;
  if (resume) {
    previous = load_checkpoint(checkpoint_path());
    opts.resume = &*previous;
  }
  opts.on_step = [&](const LossRecord& rec) {
    if (rec.step % 50 == 0) {
      std::ostringstream msg;
      msg << "train: step " << rec.step << " lr " << rec.lr << " mse " << rec.mse << " ctc "
          << rec.ctc << " total " << rec.total;
      note(msg.str());
    }
  };
  const Checkpoint ckpt = m2s::train(pairs, tokens, config_.seq2seq, config_.train, opts);
  r.checkpoint = checkpoint_path();
  save_checkpoint(ckpt, r.checkpoint);
  r.history = ckpt.history;

  std::ostringstream log;
  log << "step\tlr\tmse\tctc\ttotal\n";
  log << std::setprecision(17);
  for (const auto& h : ckpt.history) {
    log << h.step << '\t' << h.lr << '\t' << h.mse << '\t' << h.ctc << '\t' << h.total << '\n';
  }
  r.log = config_.paths.output_dir / "train_log.tsv";
  spit(r.log, log.str());

  const std::vector<ParallelPair> val = natural_pairs(s.val);
  if (!val.empty()) {
    std::vector<TokenSequence> vt;
    for (const auto& p : val) {
      const auto it = std::find_if(s.val.begin(), s.val.end(),
                                   [&](const Utterance& u) { return u.id == p.id; });
      vt.push_back({tok.encode(it->text)});
    }
    r.validation = evaluate_loss(ckpt.model, val, vt);
    std::ostringstream msg;
    msg << "train: validation mse " << r.validation->mse << " ctc " << r.validation->ctc;
    note(msg.str());
  }
  note("train: " + std::to_string(r.natural_pairs) + " natural + " +
       std::to_string(r.augmented_pairs) + " augmented pairs, step " + std::to_string(ckpt.step));
  return r;
}

InferResult Pipeline::infer(const AudioBuffer& nam, const std::string& speaker,
                            const Checkpoint& checkpoint) {
  const VocoderBackend& voc = vocoder();
  if (voc.config().speaker_index(speaker) < 0) {
    std::string known;
    for (const auto& s : voc.config().speaker_ids) known += (known.empty() ? "" : ", ") + s;
    throw ValidationError("unknown speaker '" + speaker + "'; available: " + known);
  }
  InferResult r;
  r.predicted = m2s::infer(extract_embeddings(nam, *encoder_), checkpoint);
  r.audio = voc.render(r.predicted, vocoder_input_from_string(config_.inference_input), speaker);
  return r;
}

EvalReport Pipeline::evaluate(bool self_test, bool csv) {
  const std::vector<Utterance> test = split().test;
  if (test.empty()) throw ValidationError("test split is empty");
  const fs::path sim = simulated_dir();
  std::map<std::string, AudioBuffer> references;
  std::string missing;
  for (const auto& u : test) {
    const fs::path wav = sim / (u.id + ".wav");
    if (!fs::exists(wav)) {
      missing += " " + u.id;
      continue;
    }
    references[u.id] = read_audio(wav);
  }
  if (!missing.empty()) {
    throw MissingDependencyError("simulated ground truth missing for:" + missing +
                                 "; run m2s simulate-gt");
  }
  std::map<std::string, AudioBuffer> synthesized;
  if (self_test) {
    synthesized = references;
  } else {
    const Checkpoint ckpt = load_checkpoint(checkpoint_path());
    for (const auto& u : test) {
      AudioBuffer a = infer(read_audio(u.nam_path), config_.voices.inference, ckpt).audio;
      write_audio(a, config_.paths.output_dir / "eval" / (u.id + ".wav"));
      synthesized[u.id] = std::move(a);
    }
  }
  // Self-test checks the harness itself, so the recognizer is bypassed too.
  const auto transcriber = self_test ? make_transcriber("echo", test)
                                     : make_transcriber(config_.transcriber, test,
                                                        config_.voices.inference);
  const EvalReport report = evaluate_testset(test, synthesized, references, *transcriber);
  spit(report_path(false), format_report_json(report));
  if (csv) spit(report_path(true), format_report_csv(report));
  std::ostringstream msg;
  msg << std::fixed << std::setprecision(2) << "evaluate: " << test.size() << " utterances, MCD "
      << report.mcd_db << " dB, WER " << report.wer_pct << "%, CER " << report.cer_pct << "%";
  note(msg.str());
  return report;
}

}  // namespace m2s
