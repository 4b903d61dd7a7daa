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

#ifndef M2S_CTC_HPP_
#define M2S_CTC_HPP_

#include <span>

#include "m2s/common.hpp"
#include "m2s/error.hpp"

namespace m2s {

// Raised when a target cannot be emitted in the available frames.
class CtcLengthError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

struct CtcResult {
  double loss = 0.0;
  Matrix grad;  // d loss / d logits, T x V
};

// Frames needed to emit `target`: its length plus one blank between every
// pair of equal neighbours.
int ctc_min_frames(std::span<const int> target);

// -log P(target | logits) with a per-frame softmax over the V columns of the
// T x V logits, summed over all blank-augmented alignments. Computed with the
// log-space forward recursion.
double ctc_loss(const Matrix& logits, std::span<const int> target, int blank = 0);

// Loss plus its gradient w.r.t. the logits via the forward-backward pass.
CtcResult ctc_loss_and_grad(const Matrix& logits, std::span<const int> target, int blank = 0);

// Row-wise log-softmax.
Matrix log_softmax_rows(const Matrix& logits);

// Greedy best-path decoding: argmax per frame, merge repeats, drop blanks.
std::vector<int> ctc_greedy_decode(const Matrix& logits, int blank = 0);

}  // namespace m2s

#endif  // M2S_CTC_HPP_
