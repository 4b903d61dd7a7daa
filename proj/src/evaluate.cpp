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

#include "m2s/evaluate.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "m2s/align.hpp"
#include "m2s/error.hpp"
#include "m2s/features.hpp"

namespace m2s {

std::string normalize_text(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char raw : text) {
    const auto c = static_cast<unsigned char>(raw);
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (c < 0x80 && std::ispunct(c) && c != '\'') continue;
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
  }
  return out;
}

template <typename T>
EditCounts edit_counts(const std::vector<T>& ref, const std::vector<T>& hyp) {
  const std::size_t n = ref.size();
  const std::size_t m = hyp.size();
  std::vector<std::size_t> d((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return d[i * (m + 1) + j]; };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = i;
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t sub = at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      at(i, j) = std::min({sub, at(i - 1, j) + 1, at(i, j - 1) + 1});
    }
  }
  EditCounts c;
  c.reference_length = n;
  std::size_t i = n;
  std::size_t j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && at(i, j) == at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1)) {
      if (ref[i - 1] != hyp[j - 1]) ++c.substitutions;
      --i;
      --j;
    } else if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
      ++c.deletions;
      --i;
    } else {
      ++c.insertions;
      --j;
    }
  }
  return c;
}

template EditCounts edit_counts(const std::vector<std::string>&, const std::vector<std::string>&);

namespace {

std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> words;
  std::istringstream in(s);
  for (std::string w; in >> w;) words.push_back(w);
  return words;
}

// UTF-8 code points, so multi-byte characters count once.
std::vector<std::string> split_chars(const std::string& s) {
  std::vector<std::string> chars;
  for (char c : s) {
    if ((static_cast<unsigned char>(c) & 0xC0) == 0x80 && !chars.empty()) {
      chars.back().push_back(c);
    } else {
      chars.emplace_back(1, c);
    }
  }
  return chars;
}

std::string require_reference(std::string_view reference) {
  std::string r = normalize_text(reference);
  if (r.empty()) throw ValidationError("reference transcript is empty after normalization");
  return r;
}

void accumulate(EditCounts& total, const EditCounts& c) {
  total.substitutions += c.substitutions;
  total.deletions += c.deletions;
  total.insertions += c.insertions;
  total.reference_length += c.reference_length;
}

double rate(const EditCounts& c) {
  return 100.0 * static_cast<double>(c.edits()) / static_cast<double>(c.reference_length);
}

}  // namespace

EditCounts word_edits(std::string_view reference, std::string_view hypothesis) {
  return edit_counts(split_words(require_reference(reference)),
                     split_words(normalize_text(hypothesis)));
}

EditCounts char_edits(std::string_view reference, std::string_view hypothesis) {
  return edit_counts(split_chars(require_reference(reference)),
                     split_chars(normalize_text(hypothesis)));
}

double word_error_rate(std::string_view reference, std::string_view hypothesis) {
  return rate(word_edits(reference, hypothesis));
}

double char_error_rate(std::string_view reference, std::string_view hypothesis) {
  return rate(char_edits(reference, hypothesis));
}

Matrix mcd_features(const AudioBuffer& audio) {
  validate_audio(audio);
  MelCepstrumOptions opts;
  opts.frames.window = static_cast<int>(std::lround(0.025 * audio.sample_rate));
  opts.frames.hop = static_cast<int>(std::lround(0.010 * audio.sample_rate));
  opts.frames.nfft = 1;
  while (opts.frames.nfft < opts.frames.window) opts.frames.nfft *= 2;
  opts.order = kMcdOrder;
  if (frame_count(audio.samples.size(), opts.frames) < 1) {
    throw ValidationError("audio too short for one 25 ms frame (" +
                          std::to_string(audio.samples.size()) + " samples)");
  }
  const Matrix mc = mel_cepstrum(audio, opts);
  return mc.rightCols(kMcdOrder - 1);
}

double mcd_from_cepstra(const Matrix& reference, const Matrix& synthesized) {
  if (reference.rows() < 1 || synthesized.rows() < 1) {
    throw ValidationError("empty cepstral sequence");
  }
  if (reference.cols() != synthesized.cols()) {
    throw ValidationError("cepstral orders differ: " + std::to_string(reference.cols()) +
                          " vs " + std::to_string(synthesized.cols()));
  }
  const AlignmentPath path = dtw_full(reference, synthesized, FrameMetric::kEuclidean);
  const double total = std::accumulate(path.pair_costs.begin(), path.pair_costs.end(), 0.0);
  return kMcdScale * total / static_cast<double>(path.pairs.size());
}

double compute_mcd(const AudioBuffer& reference, const AudioBuffer& synthesized) {
  if (reference.sample_rate != synthesized.sample_rate) {
    throw ValidationError("sample rates differ: " + std::to_string(reference.sample_rate) +
                          " vs " + std::to_string(synthesized.sample_rate));
  }
  return mcd_from_cepstra(mcd_features(reference), mcd_features(synthesized));
}

std::string EchoTranscriber::transcribe(const AudioBuffer&, const std::string& id) const {
  auto it = texts_.find(id);
  if (it == texts_.end()) throw ValidationError("echo transcriber has no text for '" + id + "'");
  return it->second;
}

namespace {

LogMelOptions template_bands(int sample_rate) {
  LogMelOptions o;
  o.frames = {400, 160, 512};
  o.n_mels = 40;
  o.fmax = sample_rate / 2.0;
  o.floor = 1e-10;
  return o;
}

}  // namespace

TemplateTranscriber::TemplateTranscriber() : TemplateTranscriber(Options{}) {}

TemplateTranscriber::TemplateTranscriber(Options options) : options_(std::move(options)) {
  const toy::Voice voice = toy::voice_by_name(options_.voice);
  const LogMelOptions bands = template_bands(kCanonicalSampleRate);
  const Matrix fb = mel_filterbank(bands.n_mels, bands.frames.nfft, kCanonicalSampleRate,
                                   bands.fmin, bands.fmax);
  const auto& letters = toy::alphabet();
  const int bins = bands.frames.nfft / 2 + 1;
  templates_.resize(static_cast<Eigen::Index>(letters.size()), bands.n_mels);
  for (std::size_t l = 0; l < letters.size(); ++l) {
    RowVector power(bins);
    for (int k = 0; k < bins; ++k) {
      const double hz = static_cast<double>(k) * kCanonicalSampleRate / bands.frames.nfft;
      const double a = toy::envelope(letters[l], voice, hz);
      power(k) = a * a;
    }
    RowVector logp = (power * fb.transpose()).array().max(1e-12).log().matrix();
    logp.array() -= logp.mean();
    templates_.row(static_cast<Eigen::Index>(l)) = logp;
    symbols_.push_back(letters[l].symbol);
  }
}

std::string TemplateTranscriber::transcribe(const AudioBuffer& audio, const std::string&) const {
  validate_audio(audio, true);
  const LogMelOptions bands = template_bands(audio.sample_rate);
  if (frame_count(audio.samples.size(), bands.frames) < 1) return "";
  const Matrix logp = log_mel_spectrogram(audio, bands);

  std::vector<double> energy(logp.rows());
  for (Eigen::Index t = 0; t < logp.rows(); ++t) {
    const double top = logp.row(t).maxCoeff();
    energy[t] = top + std::log((logp.row(t).array() - top).exp().sum());
  }
  const double peak = *std::max_element(energy.begin(), energy.end());

  std::vector<int> labels(logp.rows(), -1);
  for (Eigen::Index t = 0; t < logp.rows(); ++t) {
    if (energy[t] < peak - options_.silence_below_peak) continue;
    RowVector x = logp.row(t);
    x.array() -= x.mean();
    Eigen::Index best = 0;
    (templates_.rowwise() - x).rowwise().squaredNorm().minCoeff(&best);
    labels[t] = static_cast<int>(best);
  }

  // Runs shorter than min_run are transitions; drop them, then merge.
  std::vector<std::pair<int, int>> runs;  // label, length
  for (int l : labels) {
    if (!runs.empty() && runs.back().first == l) {
      ++runs.back().second;
    } else {
      runs.emplace_back(l, 1);
    }
  }
  std::vector<int> kept;
  for (const auto& [label, len] : runs) {
    if (len < options_.min_run) continue;
    if (kept.empty() || kept.back() != label) kept.push_back(label);
  }
  std::string out;
  for (int l : kept) {
    if (l < 0) {
      if (!out.empty() && out.back() != ' ') out.push_back(' ');
    } else {
      out.push_back(symbols_[l]);
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

std::unique_ptr<Transcriber> make_transcriber(const std::string& kind,
                                              std::span<const Utterance> utterances,
                                              const std::string& voice) {
  if (kind == "template") {
    TemplateTranscriber::Options opts;
    opts.voice = voice;
    return std::make_unique<TemplateTranscriber>(opts);
  }
  if (kind == "echo") {
    std::map<std::string, std::string> texts;
    for (const auto& u : utterances) texts[u.id] = u.text;
    return std::make_unique<EchoTranscriber>(std::move(texts));
  }
  if (kind == "empty") return std::make_unique<ConstantTranscriber>("");
  if (kind == "whisper") {
    throw MissingDependencyError("transcriber 'whisper' needs an external ASR model; "
                                 "use template, echo or empty");
  }
  throw ValidationError("unknown transcriber '" + kind + "'");
}

EvalReport evaluate_testset(std::span<const Utterance> test,
                            const std::map<std::string, AudioBuffer>& synthesized,
                            const std::map<std::string, AudioBuffer>& references,
                            const Transcriber& transcriber) {
  std::string missing;
  for (const auto& u : test) {
    if (!synthesized.contains(u.id)) missing += " " + u.id + "(synthesized)";
    if (!references.contains(u.id)) missing += " " + u.id + "(reference)";
  }
  if (!missing.empty()) throw ValidationError("missing audio for:" + missing);

  EvalReport report;
  report.transcriber_name = transcriber.name();
  EditCounts words;
  EditCounts chars;
  double mcd_sum = 0.0;
  for (const auto& u : test) {
    const AudioBuffer& syn = synthesized.at(u.id);
    UtteranceScore s;
    s.id = u.id;
    s.reference = u.text;
    s.hypothesis = transcriber.transcribe(syn, u.id);
    s.mcd_db = compute_mcd(references.at(u.id), syn);
    s.words = word_edits(s.reference, s.hypothesis);
    s.chars = char_edits(s.reference, s.hypothesis);
    s.wer_pct = rate(s.words);
    s.cer_pct = rate(s.chars);
    accumulate(words, s.words);
    accumulate(chars, s.chars);
    mcd_sum += s.mcd_db;
    report.per_utterance.push_back(std::move(s));
  }
  if (!report.per_utterance.empty()) {
    report.mcd_db = mcd_sum / static_cast<double>(report.per_utterance.size());
    report.wer_pct = rate(words);
    report.cer_pct = rate(chars);
  }
  return report;
}

std::string format_report_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["transcriber"] = report.transcriber_name;
  j["mcd_db"] = report.mcd_db;
  j["wer_pct"] = report.wer_pct;
  j["cer_pct"] = report.cer_pct;
  j["per_utterance"] = nlohmann::ordered_json::array();
  for (const auto& s : report.per_utterance) {
    j["per_utterance"].push_back({{"id", s.id},
                                  {"mcd_db", s.mcd_db},
                                  {"wer_pct", s.wer_pct},
                                  {"cer_pct", s.cer_pct},
                                  {"word_edits", s.words.edits()},
                                  {"words", s.words.reference_length},
                                  {"char_edits", s.chars.edits()},
                                  {"chars", s.chars.reference_length},
                                  {"reference", s.reference},
                                  {"hypothesis", s.hypothesis}});
  }
  return j.dump(2) + "\n";
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  return out + "\"";
}

std::string fixed(double v) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

std::string format_report_csv(const EvalReport& report) {
  std::string out =
      "id,mcd_db,wer_pct,cer_pct,word_edits,words,char_edits,chars,reference,hypothesis\n";
  for (const auto& s : report.per_utterance) {
    out += csv_field(s.id) + "," + fixed(s.mcd_db) + "," + fixed(s.wer_pct) + "," +
           fixed(s.cer_pct) + "," + std::to_string(s.words.edits()) + "," +
           std::to_string(s.words.reference_length) + "," + std::to_string(s.chars.edits()) +
           "," + std::to_string(s.chars.reference_length) + "," + csv_field(s.reference) + "," +
           csv_field(s.hypothesis) + "\n";
  }
  return out;
}

}  // namespace m2s
