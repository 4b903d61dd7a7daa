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

#ifndef M2S_TOKENIZER_HPP_
#define M2S_TOKENIZER_HPP_

#include <string>
#include <string_view>
#include <vector>

namespace m2s {

// Character-level tokenizer with the 32-symbol inventory of the English
// wav2vec2 CTC models: <pad> (the CTC blank, id 0), <s>, </s>, <unk>, the
// word separator '|', 26 upper-case letters and the apostrophe.
class CharTokenizer {
 public:
  CharTokenizer();
  explicit CharTokenizer(std::vector<std::string> vocab);

  // Upper-cases, maps whitespace runs to one '|', drops symbols outside the
  // vocabulary and trims leading/trailing separators.
  std::vector<int> encode(std::string_view text) const;
  std::string decode(const std::vector<int>& ids) const;

  const std::vector<std::string>& vocab() const { return vocab_; }
  int size() const { return static_cast<int>(vocab_.size()); }
  int blank_id() const { return 0; }
  int separator_id() const { return separator_; }

  static std::vector<std::string> default_vocab();

 private:
  std::vector<std::string> vocab_;
  int lookup_[256];
  int separator_ = -1;
};

}  // namespace m2s

#endif  // M2S_TOKENIZER_HPP_
