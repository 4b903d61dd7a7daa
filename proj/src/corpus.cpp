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

#include "m2s/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "m2s/audio.hpp"
#include "m2s/common.hpp"
#include "m2s/error.hpp"

namespace m2s {
namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string required_string(const json& obj, const char* key, std::size_t line) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    throw ParseError(line, std::string("missing field '") + key + "'");
  }
  if (!it->is_string()) {
    throw ParseError(line, std::string("field '") + key + "' must be a string");
  }
  return it->get<std::string>();
}

std::optional<std::string> optional_string(const json& obj, const char* key,
                                           std::size_t line) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    throw ParseError(line, std::string("field '") + key + "' must be a string");
  }
  return it->get<std::string>();
}

std::size_t round_half_up(double x) {
  return static_cast<std::size_t>(std::floor(x + 0.5));
}

}  // namespace

const char* to_string(Origin origin) {
  switch (origin) {
    case Origin::kNatural:
      return "natural";
    case Origin::kSimulatedGt:
      return "simulated_gt";
    case Origin::kClone:
      return "clone";
  }
  return "natural";
}

Origin origin_from_string(const std::string& s) {
  if (s == "natural") return Origin::kNatural;
  if (s == "simulated_gt") return Origin::kSimulatedGt;
  if (s == "clone") return Origin::kClone;
  throw ValidationError("unknown origin '" + s + "'");
}

std::vector<Utterance> parse_manifest(const std::string& content) {
  std::vector<Utterance> out;
  std::set<std::string> seen;
  std::istringstream in(content);
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (trim(raw).empty()) continue;
    json obj;
    try {
      obj = json::parse(raw);
    } catch (const json::parse_error& e) {
      throw ParseError(line, std::string("malformed record: ") + e.what());
    }
    if (!obj.is_object()) throw ParseError(line, "record must be an object");

    Utterance u;
    u.id = trim(required_string(obj, "id", line));
    if (u.id.empty()) throw ParseError(line, "empty id");
    u.nam_path = required_string(obj, "nam_path", line);
    if (auto w = optional_string(obj, "whisper_path", line)) u.whisper_path = *w;
    u.text = trim(required_string(obj, "text", line));
    if (u.text.empty()) throw ParseError(line, "empty text");
    if (auto it = obj.find("duration_s"); it != obj.end() && !it->is_null()) {
      if (!it->is_number()) throw ParseError(line, "duration_s must be a number");
      u.duration_s = it->get<double>();
    }
    u.source_id = optional_string(obj, "source_id", line);
    if (auto o = optional_string(obj, "origin", line)) {
      try {
        u.origin = origin_from_string(*o);
      } catch (const ValidationError& e) {
        throw ParseError(line, e.what());
      }
    }
    u.speaker = optional_string(obj, "speaker", line);

    if (!seen.insert(u.id).second) {
      throw ValidationError("duplicate utterance id '" + u.id + "' at line " +
                            std::to_string(line));
    }
    out.push_back(std::move(u));
  }
  return out;
}

std::vector<Utterance> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest " + path.string());
  const std::string content((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
  return parse_manifest(content);
}

std::string format_manifest(const std::vector<Utterance>& utterances) {
  std::string out;
  for (const auto& u : utterances) {
    // ordered_json keeps the documented key order stable across writes.
    nlohmann::ordered_json obj;
    obj["id"] = u.id;
    obj["nam_path"] = u.nam_path.generic_string();
    obj["whisper_path"] = u.whisper_path
                              ? nlohmann::ordered_json(u.whisper_path->generic_string())
                              : nlohmann::ordered_json(nullptr);
    obj["text"] = u.text;
    if (u.duration_s > 0.0) obj["duration_s"] = u.duration_s;
    if (u.source_id) obj["source_id"] = *u.source_id;
    if (u.origin) obj["origin"] = to_string(*u.origin);
    if (u.speaker) obj["speaker"] = *u.speaker;
    out += obj.dump();
    out += '\n';
  }
  return out;
}

void save_manifest(const std::vector<Utterance>& utterances,
                   const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write manifest " + path.string());
  out << format_manifest(utterances);
  if (!out) throw IoError("failed writing manifest " + path.string());
}

std::vector<Utterance> scan_corpus(const std::filesystem::path& root,
                                   const CorpusLayout& layout) {
  const auto transcripts = root / layout.transcripts;
  std::ifstream in(transcripts);
  if (!in) throw IoError("corpus has no transcript file: " + transcripts.string());
  std::vector<Utterance> out;
  std::set<std::string> seen;
  std::vector<std::string> missing;
  std::string raw;
  for (std::size_t line = 1; std::getline(in, raw); ++line) {
    const std::string text_line = trim(raw);
    if (text_line.empty()) continue;
    const auto cut = text_line.find_first_of(" \t");
    if (cut == std::string::npos) {
      throw ParseError(line, transcripts.string() + ": no transcript text");
    }
    Utterance u;
    u.id = text_line.substr(0, cut);
    u.text = trim(text_line.substr(cut + 1));
    if (!seen.insert(u.id).second) {
      throw ValidationError("duplicate utterance id '" + u.id + "' in " + transcripts.string());
    }
    u.nam_path = root / layout.primary_dir / (u.id + ".wav");
    if (!std::filesystem::exists(u.nam_path)) {
      missing.push_back(u.nam_path.string());
      continue;
    }
    if (!layout.whisper_dir.empty()) {
      auto w = root / layout.whisper_dir / (u.id + ".wav");
      if (std::filesystem::exists(w)) u.whisper_path = std::move(w);
    }
    u.duration_s = read_audio(u.nam_path).duration_s();
    out.push_back(std::move(u));
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += "\n  " + m;
    throw IoError("missing corpus audio:" + list);
  }
  if (out.empty()) throw ValidationError("corpus at " + root.string() + " has no utterances");
  return out;
}

SplitSizes split_sizes(std::size_t n, double test_frac, double val_frac) {
  if (!(test_frac >= 0.0 && val_frac >= 0.0) ||
      !(test_frac + val_frac * (1.0 - test_frac) < 1.0)) {
    throw ValidationError("split fractions out of range");
  }
  SplitSizes s;
  s.test = round_half_up(test_frac * static_cast<double>(n));
  s.val = round_half_up(val_frac * static_cast<double>(n - s.test));
  s.train = n - s.test - s.val;
  return s;
}

CorpusSplit split_corpus(const std::vector<Utterance>& utterances,
                         std::uint64_t seed, double test_frac, double val_frac) {
  if (utterances.empty()) throw ValidationError("cannot split an empty corpus");
  const SplitSizes sizes = split_sizes(utterances.size(), test_frac, val_frac);

  std::vector<std::size_t> order(utterances.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.index(i)]);
  }

  auto take = [&](std::size_t begin, std::size_t count) {
    std::vector<std::size_t> idx(order.begin() + begin, order.begin() + begin + count);
    std::sort(idx.begin(), idx.end());
    std::vector<Utterance> out;
    out.reserve(count);
    for (auto i : idx) out.push_back(utterances[i]);
    return out;
  };

  CorpusSplit split;
  split.seed = seed;
  split.test = take(0, sizes.test);
  split.val = take(sizes.test, sizes.val);
  split.train = take(sizes.test + sizes.val, sizes.train);
  return split;
}

}  // namespace m2s
