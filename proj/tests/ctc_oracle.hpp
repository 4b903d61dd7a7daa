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

#ifndef M2S_TESTS_CTC_ORACLE_HPP_
#define M2S_TESTS_CTC_ORACLE_HPP_

#include <cmath>
#include <functional>
#include <vector>

#include "m2s/ctc.hpp"

namespace m2s::testing {

// Sum of path probabilities over every length-T label path that collapses to target.
inline double brute_force_ctc(const Matrix& logits, const std::vector<int>& target, int blank) {
  const Matrix logp = log_softmax_rows(logits);
  const int t_len = static_cast<int>(logits.rows());
  const int v = static_cast<int>(logits.cols());
  std::vector<int> path(t_len, 0);
  double total = 0.0;
  std::function<void(int)> walk = [&](int t) {
    if (t == t_len) {
      std::vector<int> collapsed;
      int prev = -1;
      for (int s : path) {
        if (s != prev && s != blank) collapsed.push_back(s);
        prev = s;
      }
      if (collapsed != target) return;
      double lp = 0.0;
      for (int i = 0; i < t_len; ++i) lp += logp(i, path[i]);
      total += std::exp(lp);
      return;
    }
    for (int s = 0; s < v; ++s) {
      path[t] = s;
      walk(t + 1);
    }
  };
  walk(0);
  return -std::log(total);
}

}  // namespace m2s::testing

#endif  // M2S_TESTS_CTC_ORACLE_HPP_
