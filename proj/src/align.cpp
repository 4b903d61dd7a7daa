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

#include "m2s/align.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>

#include "m2s/error.hpp"

namespace m2s {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_inputs(const Matrix& a, const Matrix& b) {
  if (a.rows() == 0 || b.rows() == 0) throw ValidationError("cannot align an empty sequence");
  if (a.cols() != b.cols()) {
    throw ValidationError("cannot align sequences of dim " + std::to_string(a.cols()) +
                          " and " + std::to_string(b.cols()));
  }
}

}  // namespace

FrameMetric frame_metric_from_string(const std::string& name) {
  if (name == "euclidean") return FrameMetric::kEuclidean;
  if (name == "cosine") return FrameMetric::kCosine;
  if (name == "manhattan") return FrameMetric::kManhattan;
  throw ValidationError("unknown frame metric '" + name + "'");
}

const char* to_string(FrameMetric metric) {
  switch (metric) {
    case FrameMetric::kEuclidean:
      return "euclidean";
    case FrameMetric::kCosine:
      return "cosine";
    case FrameMetric::kManhattan:
      return "manhattan";
  }
  return "euclidean";
}

double frame_distance(const Eigen::Ref<const RowVector>& a,
                      const Eigen::Ref<const RowVector>& b, FrameMetric metric) {
  switch (metric) {
    case FrameMetric::kEuclidean:
      return (a - b).norm();
    case FrameMetric::kManhattan:
      return (a - b).cwiseAbs().sum();
    case FrameMetric::kCosine: {
      const double na = a.norm();
      const double nb = b.norm();
      if (na == 0.0 || nb == 0.0) return na == nb ? 0.0 : 1.0;
      return 1.0 - a.dot(b) / (na * nb);
    }
  }
  return 0.0;
}

void validate_path(const AlignmentPath& path, Eigen::Index n, Eigen::Index m) {
  if (path.pairs.empty()) throw ValidationError("empty alignment path");
  if (path.pair_costs.size() != path.pairs.size()) {
    throw ValidationError("alignment path is missing per-pair costs");
  }
  if (path.pairs.front() != std::pair<int, int>{0, 0}) {
    throw ValidationError("alignment path must start at (0, 0)");
  }
  if (path.pairs.back() != std::pair<int, int>{static_cast<int>(n - 1), static_cast<int>(m - 1)}) {
    throw ValidationError("alignment path does not end at (" + std::to_string(n - 1) + ", " +
                          std::to_string(m - 1) + ")");
  }
  for (std::size_t k = 1; k < path.pairs.size(); ++k) {
    const int di = path.pairs[k].first - path.pairs[k - 1].first;
    const int dj = path.pairs[k].second - path.pairs[k - 1].second;
    const bool ok = (di == 1 && dj == 0) || (di == 0 && dj == 1) || (di == 1 && dj == 1);
    if (!ok) throw ValidationError("alignment path has an invalid step at " + std::to_string(k));
  }
}

AlignmentPath dtw_windowed(const Matrix& a, const Matrix& b, const SearchWindow& window,
                           FrameMetric metric) {
  check_inputs(a, b);
  const int n = static_cast<int>(a.rows());
  const int m = static_cast<int>(b.rows());
  if (static_cast<int>(window.size()) != n) throw ValidationError("window/row count mismatch");

  // Row-compressed storage of the cumulative cost and the chosen step.
  std::vector<std::size_t> offset(n + 1, 0);
  for (int i = 0; i < n; ++i) {
    const auto [lo, hi] = window[i];
    if (lo < 0 || hi >= m || lo > hi) throw ValidationError("invalid search window");
    offset[i + 1] = offset[i] + static_cast<std::size_t>(hi - lo + 1);
  }
  std::vector<double> acc(offset[n], kInf);
  std::vector<double> local(offset[n], 0.0);
  std::vector<std::uint8_t> step(offset[n], 0);  // 0 diag, 1 up, 2 left, 3 origin

  auto at = [&](int i, int j) -> double {
    if (i < 0 || j < 0) return kInf;
    const auto [lo, hi] = window[i];
    if (j < lo || j > hi) return kInf;
    return acc[offset[i] + (j - lo)];
  };

  for (int i = 0; i < n; ++i) {
    const auto [lo, hi] = window[i];
    for (int j = lo; j <= hi; ++j) {
      const std::size_t idx = offset[i] + (j - lo);
      const double d = frame_distance(a.row(i), b.row(j), metric);
      local[idx] = d;
      if (i == 0 && j == 0) {
        acc[idx] = d;
        step[idx] = 3;
        continue;
      }
      double best = at(i - 1, j - 1);
      std::uint8_t choice = 0;
      if (const double up = at(i - 1, j); up < best) {
        best = up;
        choice = 1;
      }
      if (const double left = at(i, j - 1); left < best) {
        best = left;
        choice = 2;
      }
      acc[idx] = best + d;
      step[idx] = choice;
    }
  }

  if (!std::isfinite(at(n - 1, m - 1))) {
    throw Error("search window does not connect (0, 0) to the end cell");
  }

  AlignmentPath path;
  int i = n - 1;
  int j = m - 1;
  while (true) {
    const std::size_t idx = offset[i] + (j - window[i].first);
    path.pairs.emplace_back(i, j);
    path.pair_costs.push_back(local[idx]);
    if (step[idx] == 3) break;
    if (step[idx] == 0) {
      --i;
      --j;
    } else if (step[idx] == 1) {
      --i;
    } else {
      --j;
    }
  }
  std::reverse(path.pairs.begin(), path.pairs.end());
  std::reverse(path.pair_costs.begin(), path.pair_costs.end());
  path.cost = 0.0;
  for (double c : path.pair_costs) path.cost += c;
  return path;
}

AlignmentPath dtw_full(const Matrix& a, const Matrix& b, FrameMetric metric) {
  check_inputs(a, b);
  SearchWindow window(a.rows(), {0, static_cast<int>(b.rows()) - 1});
  return dtw_windowed(a, b, window, metric);
}

AlignmentPath dtw_full(const EmbeddingSequence& a, const EmbeddingSequence& b,
                       FrameMetric metric) {
  return dtw_full(a.frames, b.frames, metric);
}

Matrix coarsen(const Matrix& frames) {
  const Eigen::Index n = frames.rows();
  Matrix out((n + 1) / 2, frames.cols());
  for (Eigen::Index i = 0; i < n / 2; ++i) {
    out.row(i) = 0.5 * (frames.row(2 * i) + frames.row(2 * i + 1));
  }
  if (n % 2 == 1) out.row(n / 2) = frames.row(n - 1);
  return out;
}

SearchWindow expand_window(const AlignmentPath& coarse, int n, int m, int radius) {
  SearchWindow window(n, {std::numeric_limits<int>::max(), -1});
  for (const auto& [ci, cj] : coarse.pairs) {
    const int row_lo = std::max(0, 2 * (ci - radius));
    const int row_hi = std::min(n - 1, 2 * (ci + radius) + 1);
    const int col_lo = std::max(0, 2 * (cj - radius));
    const int col_hi = std::min(m - 1, 2 * (cj + radius) + 1);
    for (int r = row_lo; r <= row_hi; ++r) {
      window[r].first = std::min(window[r].first, col_lo);
      window[r].second = std::max(window[r].second, col_hi);
    }
  }
  for (const auto& [lo, hi] : window) {
    if (hi < lo) throw Error("projected window left a row uncovered");
  }
  return window;
}

AlignmentPath fastdtw(const Matrix& a, const Matrix& b, int radius, FrameMetric metric) {
  check_inputs(a, b);
  if (radius < 0) throw ValidationError("fastdtw radius must be non-negative");
  const Eigen::Index min_size = static_cast<Eigen::Index>(radius) + 2;
  if (a.rows() <= min_size || b.rows() <= min_size) return dtw_full(a, b, metric);

  const AlignmentPath coarse = fastdtw(coarsen(a), coarsen(b), radius, metric);
  const SearchWindow window = expand_window(coarse, static_cast<int>(a.rows()),
                                            static_cast<int>(b.rows()), radius);
  return dtw_windowed(a, b, window, metric);
}

AlignmentPath fastdtw(const EmbeddingSequence& a, const EmbeddingSequence& b, int radius,
                      FrameMetric metric) {
  return fastdtw(a.frames, b.frames, radius, metric);
}

EmbeddingSequence warp_to_target(const EmbeddingSequence& source, const AlignmentPath& path,
                                 Eigen::Index target_len) {
  if (target_len < 1) throw ValidationError("target length must be positive");
  validate_path(path, source.length(), target_len);
  std::vector<int> best_source(target_len, -1);
  std::vector<double> best_cost(target_len, kInf);
  for (std::size_t k = 0; k < path.pairs.size(); ++k) {
    const auto [i, j] = path.pairs[k];
    const double c = path.pair_costs[k];
    if (c < best_cost[j] || (c == best_cost[j] && i < best_source[j])) {
      best_cost[j] = c;
      best_source[j] = i;
    }
  }
  EmbeddingSequence out;
  out.frame_rate = source.frame_rate;
  out.frames.resize(target_len, source.dim());
  for (Eigen::Index j = 0; j < target_len; ++j) {
    out.frames.row(j) = source.frames.row(best_source[j]);
  }
  return out;
}

std::string format_path(const AlignmentPath& path) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t k = 0; k < path.pairs.size(); ++k) {
    out << path.pairs[k].first << ' ' << path.pairs[k].second << ' ' << path.pair_costs[k]
        << '\n';
  }
  return out.str();
}

}  // namespace m2s
