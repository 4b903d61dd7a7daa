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

#ifndef M2S_PARALLEL_PAIR_HPP_
#define M2S_PARALLEL_PAIR_HPP_

#include <filesystem>
#include <string>
#include <variant>

#include "m2s/encode.hpp"

namespace m2s {

// NAM-side input and speech-side target for one utterance. When `aligned`
// is set both sides have the same number of frames.
struct ParallelPair {
  std::string id;
  std::variant<EmbeddingSequence, UnitSequence> source;
  EmbeddingSequence target;
  bool aligned = false;

  Eigen::Index source_length() const;
};

// Throws ValidationError if `aligned` is set but the lengths differ.
void validate_pair(const ParallelPair& pair);

// "M2SP" container: u16 version, u8 aligned, u8 source kind, u32 id length,
// id bytes, then the source and target tensor containers each prefixed by a
// u64 byte length.
void write_pair(const ParallelPair& pair, const std::filesystem::path& path);
ParallelPair read_pair(const std::filesystem::path& path);

}  // namespace m2s

#endif  // M2S_PARALLEL_PAIR_HPP_
