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

#include "m2s/common.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

namespace m2s {

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

Fnv1a& Fnv1a::update(const void* data, std::size_t size) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    state_ ^= p[i];
    state_ *= 0x100000001b3ULL;
  }
  return *this;
}

std::uint64_t hash_matrix(const Matrix& m) {
  Fnv1a h;
  const std::int64_t shape[2] = {m.rows(), m.cols()};
  h.update(shape, sizeof(shape));
  h.update(m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
  return h.digest();
}


std::vector<std::size_t> batch_indices(int step, std::size_t num_examples, int batch_size,
                                       std::uint64_t seed) {
  std::vector<std::size_t> out;
  out.reserve(batch_size);
  const std::uint64_t start = static_cast<std::uint64_t>(step) * batch_size;
  std::uint64_t epoch = UINT64_MAX;
  std::vector<std::size_t> perm(num_examples);
  for (std::uint64_t pos = start; pos < start + static_cast<std::uint64_t>(batch_size); ++pos) {
    const std::uint64_t e = pos / num_examples;
    if (e != epoch) {
      epoch = e;
      std::iota(perm.begin(), perm.end(), 0);
      Rng rng(seed ^ (0x9E3779B97F4A7C15ULL * (e + 1)));
      for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.index(i)]);
    }
    out.push_back(perm[pos % num_examples]);
  }
  return out;
}

}  // namespace m2s
