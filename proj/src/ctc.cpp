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

#include "m2s/ctc.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace m2s {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

void check(const Matrix& logits, std::span<const int> target, int blank) {
  const auto vocab = logits.cols();
  if (blank < 0 || blank >= vocab) throw ValidationError("ctc: blank id out of range");
  if (!logits.allFinite()) throw ValidationError("ctc: non-finite logits");
  for (int c : target) {
    if (c < 0 || c >= vocab) throw ValidationError("ctc: target id out of range");
    if (c == blank) throw ValidationError("ctc: target contains the blank id");
  }
  const int needed = ctc_min_frames(target);
  if (logits.rows() < needed) {
    throw CtcLengthError("ctc: target of length " + std::to_string(target.size()) + " needs " +
                         std::to_string(needed) + " frames, got " +
                         std::to_string(logits.rows()));
  }
}

std::vector<int> extend(std::span<const int> target, int blank) {
  std::vector<int> ext(2 * target.size() + 1, blank);
  for (std::size_t i = 0; i < target.size(); ++i) ext[2 * i + 1] = target[i];
  return ext;
}

// Log forward variables, T x S, emissions included.
Matrix forward(const Matrix& logp, const std::vector<int>& ext, int blank) {
  const Eigen::Index frames = logp.rows();
  const auto states = static_cast<Eigen::Index>(ext.size());
  Matrix alpha = Matrix::Constant(frames, states, kNegInf);
  alpha(0, 0) = logp(0, ext[0]);
  if (states > 1) alpha(0, 1) = logp(0, ext[1]);
  for (Eigen::Index t = 1; t < frames; ++t) {
    for (Eigen::Index s = 0; s < states; ++s) {
      double a = alpha(t - 1, s);
      if (s >= 1) a = log_add(a, alpha(t - 1, s - 1));
      if (s >= 2 && ext[s] != blank && ext[s] != ext[s - 2]) a = log_add(a, alpha(t - 1, s - 2));
      alpha(t, s) = a == kNegInf ? kNegInf : a + logp(t, ext[s]);
    }
  }
  return alpha;
}

Matrix backward(const Matrix& logp, const std::vector<int>& ext, int blank) {
  const Eigen::Index frames = logp.rows();
  const auto states = static_cast<Eigen::Index>(ext.size());
  Matrix beta = Matrix::Constant(frames, states, kNegInf);
  beta(frames - 1, states - 1) = logp(frames - 1, ext[states - 1]);
  if (states > 1) beta(frames - 1, states - 2) = logp(frames - 1, ext[states - 2]);
  for (Eigen::Index t = frames - 2; t >= 0; --t) {
    for (Eigen::Index s = 0; s < states; ++s) {
      double b = beta(t + 1, s);
      if (s + 1 < states) b = log_add(b, beta(t + 1, s + 1));
      if (s + 2 < states && ext[s] != blank && ext[s] != ext[s + 2]) {
        b = log_add(b, beta(t + 1, s + 2));
      }
      beta(t, s) = b == kNegInf ? kNegInf : b + logp(t, ext[s]);
    }
  }
  return beta;
}

double total_log_prob(const Matrix& alpha) {
  const Eigen::Index last = alpha.rows() - 1;
  const Eigen::Index states = alpha.cols();
  double lp = alpha(last, states - 1);
  if (states > 1) lp = log_add(lp, alpha(last, states - 2));
  return lp;
}

}  // namespace

int ctc_min_frames(std::span<const int> target) {
  int n = static_cast<int>(target.size());
  for (std::size_t i = 1; i < target.size(); ++i) {
    if (target[i] == target[i - 1]) ++n;
  }
  return n;
}

Matrix log_softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index t = 0; t < logits.rows(); ++t) {
    const double m = logits.row(t).maxCoeff();
    const double lse = m + std::log((logits.row(t).array() - m).exp().sum());
    out.row(t) = logits.row(t).array() - lse;
  }
  return out;
}

double ctc_loss(const Matrix& logits, std::span<const int> target, int blank) {
  check(logits, target, blank);
  if (logits.rows() == 0) return 0.0;
  const Matrix logp = log_softmax_rows(logits);
  return -total_log_prob(forward(logp, extend(target, blank), blank));
}

CtcResult ctc_loss_and_grad(const Matrix& logits, std::span<const int> target, int blank) {
  check(logits, target, blank);
  CtcResult r;
  r.grad = Matrix::Zero(logits.rows(), logits.cols());
  if (logits.rows() == 0) return r;

  const Matrix logp = log_softmax_rows(logits);
  const std::vector<int> ext = extend(target, blank);
  const Matrix alpha = forward(logp, ext, blank);
  const Matrix beta = backward(logp, ext, blank);
  const double log_p = total_log_prob(alpha);
  r.loss = -log_p;

  // d(-log P)/du_tk = y_tk - (1/P) sum_{s: ext_s = k} alpha_t(s) beta_t(s) / y_tk
  for (Eigen::Index t = 0; t < logits.rows(); ++t) {
    std::vector<double> occupancy(logits.cols(), kNegInf);
    for (std::size_t s = 0; s < ext.size(); ++s) {
      const double g = alpha(t, s) + beta(t, s) - logp(t, ext[s]);
      occupancy[ext[s]] = log_add(occupancy[ext[s]], g);
    }
    for (Eigen::Index k = 0; k < logits.cols(); ++k) {
      r.grad(t, k) = std::exp(logp(t, k)) - std::exp(occupancy[k] - log_p);
    }
  }
  return r;
}

std::vector<int> ctc_greedy_decode(const Matrix& logits, int blank) {
  std::vector<int> out;
  int prev = -1;
  for (Eigen::Index t = 0; t < logits.rows(); ++t) {
    Eigen::Index best;
    logits.row(t).maxCoeff(&best);
    const int k = static_cast<int>(best);
    if (k != prev && k != blank) out.push_back(k);
    prev = k;
  }
  return out;
}

}  // namespace m2s
