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

#ifndef M2S_ENCODE_HPP_
#define M2S_ENCODE_HPP_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "m2s/audio.hpp"
#include "m2s/common.hpp"
#include "m2s/features.hpp"

namespace m2s {

inline constexpr double kCanonicalFrameRate = 50.0;
inline constexpr int kCanonicalEmbeddingDim = 768;

// T x D frame matrix at a fixed frame rate.
struct EmbeddingSequence {
  Matrix frames;
  double frame_rate = kCanonicalFrameRate;

  Eigen::Index length() const { return frames.rows(); }
  Eigen::Index dim() const { return frames.cols(); }
};

// One discrete unit per frame; never run-length collapsed.
struct UnitSequence {
  std::vector<int> units;
  double frame_rate = kCanonicalFrameRate;

  std::size_t length() const { return units.size(); }
  bool operator==(const UnitSequence&) const = default;
};

// Frame-level encoder. Implementations must be deterministic.
class EncoderBackend {
 public:
  virtual ~EncoderBackend() = default;
  virtual std::string name() const = 0;
  virtual int dim() const = 0;
  virtual double frame_rate() const = 0;
  // Minimum number of samples that yields one frame at `sample_rate`.
  virtual std::size_t min_samples(int sample_rate) const = 0;
  // Stable description of everything that influences the output; used in
  // cache keys.
  virtual std::string fingerprint() const = 0;
  virtual EmbeddingSequence extract(const AudioBuffer& audio) const = 0;
};

struct ToyEncoderOptions {
  int dim = kCanonicalEmbeddingDim;
  double frame_rate = kCanonicalFrameRate;
  int n_mels = 80;
  // Number of low-quefrency coefficients of the log-mel frame that survive
  // the projection. Keeping few removes pitch harmonics, so units track the
  // spectral envelope rather than the excitation.
  int lifter = 16;
  double log_offset = -8.0;
  double log_scale = 4.0;
  std::uint64_t seed = 0x6d32735f656e63ULL;
  // Layer selector; the toy backend has a single layer (0, or -1 for final).
  int layer = -1;
};

// Deterministic stand-in for a pretrained SSL encoder: 25 ms frames at a
// 20 ms hop, 80-band log-mel, then a fixed seeded linear projection to `dim`.
class ToyEncoder final : public EncoderBackend {
 public:
  explicit ToyEncoder(ToyEncoderOptions options = {});

  std::string name() const override { return "toy"; }
  int dim() const override { return options_.dim; }
  double frame_rate() const override { return options_.frame_rate; }
  std::size_t min_samples(int sample_rate) const override;
  std::string fingerprint() const override;
  EmbeddingSequence extract(const AudioBuffer& audio) const override;

  const ToyEncoderOptions& options() const { return options_; }
  FrameSpec frame_spec(int sample_rate) const;

 private:
  ToyEncoderOptions options_;
  Matrix projection_;  // dim x n_mels
};

// "toy" builds a ToyEncoder with `layer` applied; "hubert" needs pretrained
// weights that are not bundled and raises MissingDependencyError.
std::unique_ptr<EncoderBackend> make_encoder(const std::string& backend, int layer,
                                             ToyEncoderOptions toy = {});

// Validates the audio against the backend and runs it.
EmbeddingSequence extract_embeddings(const AudioBuffer& audio, const EncoderBackend& backend);

struct Codebook {
  Matrix centroids;  // K x D

  Eigen::Index size() const { return centroids.rows(); }
  Eigen::Index dim() const { return centroids.cols(); }
};

struct KMeansResult {
  Codebook codebook;
  // Total within-cluster squared distance after each assignment step.
  std::vector<double> distortion;
  int iterations = 0;
};

// Stacks every frame of every sequence into one matrix.
Matrix stack_frames(std::span<const EmbeddingSequence> sequences);

// k-means++ seeding: first centre uniform, then D^2 sampling.
Matrix kmeanspp_init(const Matrix& points, int k, std::uint64_t seed);

// Lloyd iterations from k-means++ seeding until assignments stop changing or
// max_iters is reached.
KMeansResult fit_kmeans(const Matrix& points, int k, std::uint64_t seed, int max_iters);

Codebook fit_codebook(std::span<const EmbeddingSequence> embeddings, int k,
                      std::uint64_t seed, int max_iters);

// Nearest centroid by Euclidean distance; ties go to the lowest index.
UnitSequence quantize(const EmbeddingSequence& embeddings, const Codebook& codebook);

// Binary tensor container: "M2ST", u16 version, u8 dtype, u8 reserved,
// u64 rows, u64 cols, f64 frame_rate, then the row-major payload. All fields
// little-endian.
void write_embeddings(const EmbeddingSequence& seq, const std::filesystem::path& path);
EmbeddingSequence read_embeddings(const std::filesystem::path& path);
void write_units(const UnitSequence& seq, const std::filesystem::path& path);
UnitSequence read_units(const std::filesystem::path& path);
void write_codebook(const Codebook& codebook, const std::filesystem::path& path);
Codebook read_codebook(const std::filesystem::path& path);

std::string encode_embeddings(const EmbeddingSequence& seq);
EmbeddingSequence decode_embeddings(std::string_view bytes);

}  // namespace m2s

#endif  // M2S_ENCODE_HPP_
