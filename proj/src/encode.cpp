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

#include "m2s/encode.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include "m2s/error.hpp"

namespace m2s {
namespace {

static_assert(std::endian::native == std::endian::little,
              "tensor containers assume a little-endian host");

constexpr char kMagic[4] = {'M', '2', 'S', 'T'};
constexpr std::uint16_t kVersion = 1;

enum class DType : std::uint8_t { kF64 = 1, kF32 = 2, kI32 = 3 };

template <typename T>
void append(std::string& out, const T& v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T take(std::string_view bytes, std::size_t& pos) {
  if (pos + sizeof(T) > bytes.size()) throw IoError("truncated tensor container");
  T v;
  std::memcpy(&v, bytes.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

std::string header(DType dtype, std::uint64_t rows, std::uint64_t cols, double frame_rate) {
  std::string out(kMagic, 4);
  append(out, kVersion);
  append(out, static_cast<std::uint8_t>(dtype));
  append(out, std::uint8_t{0});
  append(out, rows);
  append(out, cols);
  append(out, frame_rate);
  return out;
}

struct Header {
  DType dtype;
  std::uint64_t rows;
  std::uint64_t cols;
  double frame_rate;
};

Header parse_header(std::string_view bytes, std::size_t& pos) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw IoError("bad tensor container magic");
  }
  pos = 4;
  const auto version = take<std::uint16_t>(bytes, pos);
  if (version != kVersion) {
    throw IoError("unsupported tensor container version " + std::to_string(version));
  }
  Header h;
  h.dtype = static_cast<DType>(take<std::uint8_t>(bytes, pos));
  take<std::uint8_t>(bytes, pos);
  h.rows = take<std::uint64_t>(bytes, pos);
  h.cols = take<std::uint64_t>(bytes, pos);
  h.frame_rate = take<double>(bytes, pos);
  return h;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

std::string encode_matrix(const Matrix& m, double frame_rate) {
  std::string out = header(DType::kF64, static_cast<std::uint64_t>(m.rows()),
                           static_cast<std::uint64_t>(m.cols()), frame_rate);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) append(out, m(r, c));
  }
  return out;
}

Matrix decode_matrix(std::string_view bytes, double* frame_rate) {
  std::size_t pos = 0;
  const Header h = parse_header(bytes, pos);
  if (h.dtype != DType::kF64 && h.dtype != DType::kF32) {
    throw IoError("expected a real-valued tensor");
  }
  const std::size_t width = h.dtype == DType::kF64 ? 8 : 4;
  if (h.rows * h.cols * width != bytes.size() - pos) {
    throw IoError("tensor payload size does not match header");
  }
  Matrix m(static_cast<Eigen::Index>(h.rows), static_cast<Eigen::Index>(h.cols));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(r, c) = h.dtype == DType::kF64 ? take<double>(bytes, pos) : take<float>(bytes, pos);
    }
  }
  if (frame_rate) *frame_rate = h.frame_rate;
  return m;
}

}  // namespace

ToyEncoder::ToyEncoder(ToyEncoderOptions options) : options_(options) {
  if (options_.dim < 1 || options_.n_mels < 1 || options_.lifter < 1 ||
      options_.lifter > options_.n_mels || options_.frame_rate <= 0.0) {
    throw ValidationError("invalid toy encoder options");
  }
  if (options_.layer != 0 && options_.layer != -1) {
    throw ValidationError("toy encoder has a single layer; got layer " +
                          std::to_string(options_.layer));
  }
  Rng rng(options_.seed);
  Matrix random(options_.dim, options_.lifter);
  const double scale = 1.0 / std::sqrt(static_cast<double>(options_.lifter));
  for (Eigen::Index r = 0; r < random.rows(); ++r) {
    for (Eigen::Index c = 0; c < random.cols(); ++c) random(r, c) = rng.normal() * scale;
  }
  projection_ = random * dct_matrix(options_.lifter, options_.n_mels);
}

FrameSpec ToyEncoder::frame_spec(int sample_rate) const {
  FrameSpec spec;
  spec.hop = static_cast<int>(std::lround(sample_rate / options_.frame_rate));
  spec.window = static_cast<int>(std::lround(0.025 * sample_rate));
  spec.nfft = static_cast<int>(std::bit_ceil(static_cast<unsigned>(spec.window)));
  return spec;
}

std::size_t ToyEncoder::min_samples(int sample_rate) const {
  return static_cast<std::size_t>(frame_spec(sample_rate).window);
}

std::string ToyEncoder::fingerprint() const {
  std::ostringstream s;
  s << "toy/v1/dim=" << options_.dim << "/rate=" << options_.frame_rate
    << "/mels=" << options_.n_mels << "/lifter=" << options_.lifter
    << "/offset=" << options_.log_offset << "/scale=" << options_.log_scale
    << "/seed=" << options_.seed << "/layer=" << options_.layer;
  return s.str();
}

EmbeddingSequence ToyEncoder::extract(const AudioBuffer& audio) const {
  LogMelOptions lm;
  lm.frames = frame_spec(audio.sample_rate);
  lm.n_mels = options_.n_mels;
  lm.fmax = audio.sample_rate / 2.0;
  const Matrix log_mel = log_mel_spectrogram(audio, lm);
  const Matrix normalized =
      (log_mel.array() - options_.log_offset) / options_.log_scale;
  EmbeddingSequence out;
  out.frames = normalized.matrix() * projection_.transpose();
  out.frame_rate = options_.frame_rate;
  return out;
}

std::unique_ptr<EncoderBackend> make_encoder(const std::string& backend, int layer,
                                             ToyEncoderOptions toy) {
  if (backend == "toy") {
    toy.layer = layer;
    return std::make_unique<ToyEncoder>(toy);
  }
  if (backend == "hubert") {
    throw MissingDependencyError(
        "encoder 'hubert' needs pretrained weights, which are not bundled; "
        "use the toy encoder");
  }
  throw ValidationError("unknown encoder backend '" + backend + "'");
}

EmbeddingSequence extract_embeddings(const AudioBuffer& audio, const EncoderBackend& backend) {
  validate_audio(audio);
  if (audio.samples.size() < backend.min_samples(audio.sample_rate)) {
    throw ValidationError("audio shorter than one encoder frame (" +
                          std::to_string(audio.samples.size()) + " samples)");
  }
  EmbeddingSequence seq = backend.extract(audio);
  if (seq.length() < 1 || seq.dim() != backend.dim() || !seq.frames.allFinite()) {
    throw Error("encoder backend '" + backend.name() + "' produced invalid output");
  }
  return seq;
}

Matrix stack_frames(std::span<const EmbeddingSequence> sequences) {
  Eigen::Index rows = 0;
  Eigen::Index dim = -1;
  for (const auto& s : sequences) {
    if (dim >= 0 && s.dim() != dim) throw ValidationError("embedding dims differ");
    dim = s.dim();
    rows += s.length();
  }
  Matrix out(rows, std::max<Eigen::Index>(dim, 0));
  Eigen::Index at = 0;
  for (const auto& s : sequences) {
    out.middleRows(at, s.length()) = s.frames;
    at += s.length();
  }
  return out;
}

Matrix kmeanspp_init(const Matrix& points, int k, std::uint64_t seed) {
  const Eigen::Index n = points.rows();
  if (k < 1) throw ValidationError("k must be at least 1");
  if (n < k) {
    throw ValidationError("need at least " + std::to_string(k) + " frames, got " +
                          std::to_string(n));
  }
  Rng rng(seed);
  Matrix centers(k, points.cols());
  centers.row(0) = points.row(static_cast<Eigen::Index>(rng.index(n)));
  Vector nearest = (points.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = nearest.sum();
    if (!(total > 0.0)) {
      throw ValidationError("fewer than " + std::to_string(k) + " distinct frames");
    }
    const double target = rng.uniform() * total;
    double acc = 0.0;
    Eigen::Index pick = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (nearest(i) <= 0.0) continue;
      acc += nearest(i);
      pick = i;
      if (acc > target) break;
    }
    centers.row(c) = points.row(pick);
    nearest = nearest.cwiseMin((points.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }
  return centers;
}

KMeansResult fit_kmeans(const Matrix& points, int k, std::uint64_t seed, int max_iters) {
  if (max_iters < 1) throw ValidationError("max_iters must be at least 1");
  Matrix centers = kmeanspp_init(points, k, seed);
  const Eigen::Index n = points.rows();
  const Vector point_norms = points.rowwise().squaredNorm();
  std::vector<int> assign(n, -1);

  KMeansResult result;
  for (int iter = 0; iter < max_iters; ++iter) {
    // Expanded form for speed; the exact distance is recomputed for the
    // distortion of the chosen centre.
    const Vector center_norms = centers.rowwise().squaredNorm();
    const Matrix cross = points * centers.transpose();
    bool changed = false;
    double distortion = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = point_norms(i) - 2.0 * cross(i, c) + center_norms(c);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (assign[i] != best) changed = true;
      assign[i] = best;
      distortion += (points.row(i) - centers.row(best)).squaredNorm();
    }
    result.distortion.push_back(distortion);
    result.iterations = iter + 1;
    if (!changed && iter > 0) break;

    Matrix sums = Matrix::Zero(k, points.cols());
    std::vector<Eigen::Index> counts(k, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(assign[i]) += points.row(i);
      ++counts[assign[i]];
    }
    for (int c = 0; c < k; ++c) {
      // An empty cluster keeps its previous centre.
      if (counts[c] > 0) centers.row(c) = sums.row(c) / static_cast<double>(counts[c]);
    }
  }
  result.codebook.centroids = std::move(centers);
  return result;
}

Codebook fit_codebook(std::span<const EmbeddingSequence> embeddings, int k,
                      std::uint64_t seed, int max_iters) {
  return fit_kmeans(stack_frames(embeddings), k, seed, max_iters).codebook;
}

UnitSequence quantize(const EmbeddingSequence& embeddings, const Codebook& codebook) {
  if (embeddings.dim() != codebook.dim()) {
    throw ValidationError("embedding dim " + std::to_string(embeddings.dim()) +
                          " does not match codebook dim " + std::to_string(codebook.dim()));
  }
  if (codebook.size() < 1) throw ValidationError("empty codebook");
  UnitSequence out;
  out.frame_rate = embeddings.frame_rate;
  out.units.resize(embeddings.length());
  for (Eigen::Index t = 0; t < embeddings.length(); ++t) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < codebook.size(); ++c) {
      const double d = (embeddings.frames.row(t) - codebook.centroids.row(c)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    out.units[t] = best;
  }
  return out;
}

std::string encode_embeddings(const EmbeddingSequence& seq) {
  return encode_matrix(seq.frames, seq.frame_rate);
}

EmbeddingSequence decode_embeddings(std::string_view bytes) {
  EmbeddingSequence seq;
  seq.frames = decode_matrix(bytes, &seq.frame_rate);
  return seq;
}

void write_embeddings(const EmbeddingSequence& seq, const std::filesystem::path& path) {
  spit(path, encode_embeddings(seq));
}

EmbeddingSequence read_embeddings(const std::filesystem::path& path) {
  return decode_embeddings(slurp(path));
}

void write_units(const UnitSequence& seq, const std::filesystem::path& path) {
  std::string out = header(DType::kI32, seq.units.size(), 1, seq.frame_rate);
  for (int u : seq.units) append(out, static_cast<std::int32_t>(u));
  spit(path, out);
}

UnitSequence read_units(const std::filesystem::path& path) {
  const std::string bytes = slurp(path);
  std::size_t pos = 0;
  const Header h = parse_header(bytes, pos);
  if (h.dtype != DType::kI32 || h.cols != 1 || h.rows * 4 != bytes.size() - pos) {
    throw IoError(path.string() + ": not a unit container");
  }
  UnitSequence seq;
  seq.frame_rate = h.frame_rate;
  seq.units.resize(h.rows);
  for (auto& u : seq.units) u = take<std::int32_t>(bytes, pos);
  return seq;
}

void write_codebook(const Codebook& codebook, const std::filesystem::path& path) {
  spit(path, encode_matrix(codebook.centroids, 0.0));
}

Codebook read_codebook(const std::filesystem::path& path) {
  return Codebook{decode_matrix(slurp(path), nullptr)};
}

}  // namespace m2s
