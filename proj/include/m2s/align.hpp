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

#ifndef M2S_ALIGN_HPP_
#define M2S_ALIGN_HPP_

#include <string>
#include <utility>
#include <vector>

#include "m2s/common.hpp"
#include "m2s/encode.hpp"

namespace m2s {

enum class FrameMetric { kEuclidean, kCosine, kManhattan };

FrameMetric frame_metric_from_string(const std::string& name);
const char* to_string(FrameMetric metric);

double frame_distance(const Eigen::Ref<const RowVector>& a,
                      const Eigen::Ref<const RowVector>& b, FrameMetric metric);

// Monotone warping path from (0, 0) to (N-1, M-1) using steps (1,0), (0,1)
// and (1,1). `pair_costs[k]` is the frame distance of `pairs[k]`; `cost` is
// their sum.
struct AlignmentPath {
  std::vector<std::pair<int, int>> pairs;
  std::vector<double> pair_costs;
  double cost = 0.0;
};

// Throws ValidationError unless `path` is a valid path for an N x M grid.
void validate_path(const AlignmentPath& path, Eigen::Index n, Eigen::Index m);

// Inclusive column range [lo, hi] allowed for each row.
using SearchWindow = std::vector<std::pair<int, int>>;

// Exact DP restricted to `window`. Ties prefer the diagonal, then (i-1, j),
// then (i, j-1).
AlignmentPath dtw_windowed(const Matrix& a, const Matrix& b, const SearchWindow& window,
                           FrameMetric metric);

AlignmentPath dtw_full(const Matrix& a, const Matrix& b,
                       FrameMetric metric = FrameMetric::kEuclidean);
AlignmentPath dtw_full(const EmbeddingSequence& a, const EmbeddingSequence& b,
                       FrameMetric metric = FrameMetric::kEuclidean);

// Halves the length by averaging adjacent frames; an odd trailing frame is
// kept as is.
Matrix coarsen(const Matrix& frames);

// Projects a coarse path onto the fine grid and widens it by `radius`
// coarse cells in every direction.
SearchWindow expand_window(const AlignmentPath& coarse, int n, int m, int radius);

// Multilevel approximation: coarsen, align recursively, project, refine
// inside the window. Runs exact DP once either side has at most radius + 2
// frames.
AlignmentPath fastdtw(const Matrix& a, const Matrix& b, int radius = 1,
                      FrameMetric metric = FrameMetric::kEuclidean);
AlignmentPath fastdtw(const EmbeddingSequence& a, const EmbeddingSequence& b, int radius = 1,
                      FrameMetric metric = FrameMetric::kEuclidean);

// Output frame j is the source frame i of the cheapest pair (i, j) on the
// path; ties go to the lowest i.
EmbeddingSequence warp_to_target(const EmbeddingSequence& source, const AlignmentPath& path,
                                 Eigen::Index target_len);

// Debug dump, one "i j pair_cost" line per pair.
std::string format_path(const AlignmentPath& path);

}  // namespace m2s

#endif  // M2S_ALIGN_HPP_
