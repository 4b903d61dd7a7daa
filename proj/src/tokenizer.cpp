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

#include "m2s/tokenizer.hpp"

#include <algorithm>
#include <cctype>

#include "m2s/error.hpp"

namespace m2s {

std::vector<std::string> CharTokenizer::default_vocab() {
  return {"<pad>", "<s>", "</s>", "<unk>", "|", "E", "T", "A", "O", "N", "I",
          "H",     "S",   "R",    "D",     "L", "U", "M", "W", "C", "F", "G",
          "Y",     "P",   "K",    "'",     "V", "B", "X", "J", "Q", "Z"};
}

CharTokenizer::CharTokenizer() : CharTokenizer(default_vocab()) {}

CharTokenizer::CharTokenizer(std::vector<std::string> vocab) : vocab_(std::move(vocab)) {
  if (vocab_.size() < 2) throw ValidationError("tokenizer vocabulary too small");
  std::fill(std::begin(lookup_), std::end(lookup_), -1);
  for (std::size_t i = 1; i < vocab_.size(); ++i) {
    const std::string& sym = vocab_[i];
    if (sym.size() != 1) continue;
    const auto c = static_cast<unsigned char>(sym[0]);
    lookup_[c] = static_cast<int>(i);
    if (sym == "|") separator_ = static_cast<int>(i);
  }
  if (separator_ < 0) throw ValidationError("tokenizer vocabulary lacks the '|' separator");
}

std::vector<int> CharTokenizer::encode(std::string_view text) const {
  std::vector<int> ids;
  bool pending_space = false;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      pending_space = true;
      continue;
    }
    const int id = lookup_[std::toupper(c)];
    if (id < 0 || id == separator_) continue;
    if (pending_space && !ids.empty()) ids.push_back(separator_);
    pending_space = false;
    ids.push_back(id);
  }
  return ids;
}

std::string CharTokenizer::decode(const std::vector<int>& ids) const {
  std::string out;
  for (int id : ids) {
    if (id <= 0 || id >= size()) continue;
    if (id == separator_) {
      out.push_back(' ');
    } else if (vocab_[id].size() == 1) {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(vocab_[id][0]))));
    }
  }
  return out;
}

}  // namespace m2s
