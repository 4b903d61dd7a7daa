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

#include "m2s/parallel_pair.hpp"

#include <cstring>
#include <fstream>
#include <iterator>

#include "m2s/error.hpp"

namespace m2s {
namespace {

constexpr char kMagic[4] = {'M', '2', 'S', 'P'};
constexpr std::uint16_t kVersion = 1;

template <typename T>
void append(std::string& out, const T& v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T take(const std::string& bytes, std::size_t& pos) {
  if (pos + sizeof(T) > bytes.size()) throw IoError("truncated pair container");
  T v;
  std::memcpy(&v, bytes.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

std::string encode_units(const UnitSequence& u) {
  // Units travel as a one-column real tensor inside the pair container.
  EmbeddingSequence tmp;
  tmp.frame_rate = u.frame_rate;
  tmp.frames.resize(static_cast<Eigen::Index>(u.units.size()), 1);
  for (std::size_t i = 0; i < u.units.size(); ++i) tmp.frames(i, 0) = u.units[i];
  return encode_embeddings(tmp);
}

UnitSequence decode_units(std::string_view bytes) {
  const EmbeddingSequence tmp = decode_embeddings(bytes);
  UnitSequence u;
  u.frame_rate = tmp.frame_rate;
  u.units.resize(tmp.length());
  for (Eigen::Index i = 0; i < tmp.length(); ++i) u.units[i] = static_cast<int>(tmp.frames(i, 0));
  return u;
}

}  // namespace

Eigen::Index ParallelPair::source_length() const {
  if (const auto* e = std::get_if<EmbeddingSequence>(&source)) return e->length();
  return static_cast<Eigen::Index>(std::get<UnitSequence>(source).length());
}

void validate_pair(const ParallelPair& pair) {
  if (pair.aligned && pair.source_length() != pair.target.length()) {
    throw ValidationError("pair '" + pair.id + "' is marked aligned but has lengths " +
                          std::to_string(pair.source_length()) + " and " +
                          std::to_string(pair.target.length()));
  }
}

void write_pair(const ParallelPair& pair, const std::filesystem::path& path) {
  std::string out(kMagic, 4);
  append(out, kVersion);
  append(out, static_cast<std::uint8_t>(pair.aligned ? 1 : 0));
  const bool units = std::holds_alternative<UnitSequence>(pair.source);
  append(out, static_cast<std::uint8_t>(units ? 1 : 0));
  append(out, static_cast<std::uint32_t>(pair.id.size()));
  out += pair.id;
  const std::string src = units ? encode_units(std::get<UnitSequence>(pair.source))
                                : encode_embeddings(std::get<EmbeddingSequence>(pair.source));
  const std::string tgt = encode_embeddings(pair.target);
  append(out, static_cast<std::uint64_t>(src.size()));
  out += src;
  append(out, static_cast<std::uint64_t>(tgt.size()));
  out += tgt;

  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("failed writing " + path.string());
}

ParallelPair read_pair(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw IoError(path.string() + ": not a pair container");
  }
  std::size_t pos = 4;
  if (take<std::uint16_t>(bytes, pos) != kVersion) {
    throw IoError(path.string() + ": unsupported pair container version");
  }
  ParallelPair pair;
  pair.aligned = take<std::uint8_t>(bytes, pos) != 0;
  const bool units = take<std::uint8_t>(bytes, pos) != 0;
  const auto id_len = take<std::uint32_t>(bytes, pos);
  if (pos + id_len > bytes.size()) throw IoError(path.string() + ": truncated pair id");
  pair.id = bytes.substr(pos, id_len);
  pos += id_len;
  auto blob = [&]() {
    const auto n = take<std::uint64_t>(bytes, pos);
    if (pos + n > bytes.size()) throw IoError(path.string() + ": truncated pair payload");
    std::string_view v(bytes.data() + pos, n);
    pos += n;
    return v;
  };
  const std::string_view src = blob();
  if (units) {
    pair.source = decode_units(src);
  } else {
    pair.source = decode_embeddings(src);
  }
  pair.target = decode_embeddings(blob());
  return pair;
}

}  // namespace m2s
