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

#include "m2s/error.hpp"
#include "m2s/parallel_pair.hpp"
#include "m2s/tokenizer.hpp"

namespace m2s {
namespace {

TEST(Tokenizer, EncodeDecode) {
  const CharTokenizer tok;
  EXPECT_EQ(tok.size(), 32);
  EXPECT_EQ(tok.blank_id(), 0);
  const auto ids = tok.encode("  Hello,   world's ");
  EXPECT_EQ(tok.decode(ids), "hello world's");
  for (int id : ids) EXPECT_GT(id, 0);
  EXPECT_TRUE(tok.encode("").empty());
  EXPECT_TRUE(tok.encode("123 ...").empty());
}

TEST(Tokenizer, RejectsVocabWithoutSeparator) {
  EXPECT_THROW(CharTokenizer(std::vector<std::string>{"<pad>", "A"}), ValidationError);
}

TEST(ParallelPair, RoundTripAndValidation) {
  ParallelPair p;
  p.id = "clone_007";
  p.source = UnitSequence{{1, 2, 3}, 50.0};
  p.target = EmbeddingSequence{Matrix::Ones(3, 4), 50.0};
  p.aligned = true;
  EXPECT_EQ(p.source_length(), 3);
  const auto path = std::filesystem::temp_directory_path() / "m2s_pair.m2sp";
  write_pair(p, path);
  const ParallelPair back = read_pair(path);
  EXPECT_EQ(back.id, p.id);
  EXPECT_TRUE(back.aligned);
  EXPECT_EQ(std::get<UnitSequence>(back.source), std::get<UnitSequence>(p.source));
  EXPECT_EQ(back.target.frames, p.target.frames);

  p.source = EmbeddingSequence{Matrix::Zero(2, 4), 50.0};
  EXPECT_THROW(validate_pair(p), ValidationError);
  p.aligned = false;
  EXPECT_NO_THROW(validate_pair(p));
  write_pair(p, path);
  EXPECT_EQ(std::get<EmbeddingSequence>(read_pair(path).source).frames, Matrix::Zero(2, 4));
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace m2s
