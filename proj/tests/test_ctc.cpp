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

#include <cmath>
#include <functional>
#include <vector>

#include "m2s/autograd.hpp"
#include "m2s/ctc.hpp"
#include "ctc_oracle.hpp"

namespace m2s {
namespace {

TEST(Ctc, MatchesBruteForceEnumeration) {
  Rng rng(7);
  int checked = 0;
  for (int c = 0; c < 400; ++c) {
    const int t_len = 1 + static_cast<int>(rng.index(6));
    const int v = 2 + static_cast<int>(rng.index(3));
    const int len = static_cast<int>(rng.index(4));
    std::vector<int> target;
    for (int i = 0; i < len; ++i) target.push_back(1 + static_cast<int>(rng.index(v - 1)));
    Matrix logits(t_len, v);
    for (Eigen::Index i = 0; i < logits.size(); ++i) logits.data()[i] = 3.0 * rng.normal();
    if (ctc_min_frames(target) > t_len) {
      EXPECT_THROW(ctc_loss(logits, target), CtcLengthError);
      continue;
    }
    EXPECT_NEAR(ctc_loss(logits, target), testing::brute_force_ctc(logits, target, 0), 1e-6);
    ++checked;
  }
  EXPECT_GE(checked, 200);
}

TEST(Ctc, UniformSingleFrame) {
  Matrix logits = Matrix::Zero(1, 3);
  EXPECT_NEAR(ctc_loss(logits, std::vector<int>{2}), std::log(3.0), 1e-12);
  EXPECT_NEAR(ctc_loss(logits, std::vector<int>{}), std::log(3.0), 1e-12);
}

TEST(Ctc, RepeatedLabelsNeedBlank) {
  EXPECT_EQ(ctc_min_frames(std::vector<int>{1, 1}), 3);
  EXPECT_EQ(ctc_min_frames(std::vector<int>{1, 2}), 2);
  EXPECT_EQ(ctc_min_frames(std::vector<int>{}), 0);
  EXPECT_THROW(ctc_loss(Matrix::Zero(2, 3), std::vector<int>{1, 1}), CtcLengthError);
}

TEST(Ctc, RejectsBadInput) {
  EXPECT_THROW(ctc_loss(Matrix::Zero(3, 3), std::vector<int>{0}), ValidationError);
  EXPECT_THROW(ctc_loss(Matrix::Zero(3, 3), std::vector<int>{3}), ValidationError);
  Matrix bad = Matrix::Zero(3, 3);
  bad(1, 1) = std::nan("");
  EXPECT_THROW(ctc_loss(bad, std::vector<int>{1}), ValidationError);
}

TEST(Ctc, GradientMatchesFiniteDifferences) {
  Rng rng(11);
  for (int c = 0; c < 20; ++c) {
    Matrix logits(5, 4);
    for (Eigen::Index i = 0; i < logits.size(); ++i) logits.data()[i] = rng.normal();
    const std::vector<int> target{1, 3, 1};
    const CtcResult r = ctc_loss_and_grad(logits, target);
    EXPECT_NEAR(r.loss, ctc_loss(logits, target), 1e-12);
    const double h = 1e-6;
    for (Eigen::Index i = 0; i < logits.size(); ++i) {
      Matrix up = logits;
      Matrix dn = logits;
      up.data()[i] += h;
      dn.data()[i] -= h;
      const double fd = (ctc_loss(up, target) - ctc_loss(dn, target)) / (2 * h);
      EXPECT_NEAR(r.grad.data()[i], fd, 1e-6);
    }
  }
}

TEST(Ctc, GreedyDecodeCollapses) {
  Matrix logits = Matrix::Zero(6, 3);
  const int best[] = {1, 1, 0, 1, 2, 2};
  for (int t = 0; t < 6; ++t) logits(t, best[t]) = 5.0;
  EXPECT_EQ(ctc_greedy_decode(logits), (std::vector<int>{1, 1, 2}));
}

}  // namespace
}  // namespace m2s
