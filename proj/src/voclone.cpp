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

#include "m2s/voclone.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <numbers>

#include <nlohmann/json.hpp>

#include "m2s/error.hpp"
#include "m2s/features.hpp"

namespace m2s {

using nlohmann::json;

int VocoderConfig::speaker_index(const std::string& id) const {
  const auto it = std::find(speaker_ids.begin(), speaker_ids.end(), id);
  return it == speaker_ids.end() ? -1 : static_cast<int>(it - speaker_ids.begin());
}

void VocoderConfig::validate() const {
  if (num_embeddings < 1 || embedding_dim < 1) throw ValidationError("invalid vocoder sizes");
  if (model_input_dim < embedding_dim) {
    throw ValidationError("model_input_dim must be at least embedding_dim");
  }
  if (!(learning_rate > 0.0) || batch_size < 1 || train_steps < 0) {
    throw ValidationError("invalid vocoder training settings");
  }
  if (speaker_ids.empty()) throw ValidationError("vocoder needs at least one speaker id");
  for (std::size_t i = 0; i < speaker_ids.size(); ++i) {
    if (speaker_ids[i].empty() || speaker_index(speaker_ids[i]) != static_cast<int>(i)) {
      throw ValidationError("speaker ids must be unique and non-empty");
    }
  }
}

void to_json(json& j, const VocoderConfig& c) {
  j = json{{"num_embeddings", c.num_embeddings}, {"embedding_dim", c.embedding_dim},
           {"model_input_dim", c.model_input_dim}, {"learning_rate", c.learning_rate},
           {"batch_size", c.batch_size},         {"speaker_ids", c.speaker_ids},
           {"train_steps", c.train_steps},       {"seed", c.seed}};
}

void from_json(const json& j, VocoderConfig& c) {
  VocoderConfig d;
  c.num_embeddings = j.value("num_embeddings", d.num_embeddings);
  c.embedding_dim = j.value("embedding_dim", d.embedding_dim);
  c.model_input_dim = j.value("model_input_dim", d.model_input_dim);
  c.learning_rate = j.value("learning_rate", d.learning_rate);
  c.batch_size = j.value("batch_size", d.batch_size);
  c.speaker_ids = j.value("speaker_ids", d.speaker_ids);
  c.train_steps = j.value("train_steps", d.train_steps);
  c.seed = j.value("seed", d.seed);
}

VocoderInput vocoder_input_from_string(const std::string& s) {
  if (s == "units") return VocoderInput::kUnits;
  if (s == "embeddings") return VocoderInput::kEmbeddings;
  throw ValidationError("unknown vocoder input '" + s + "' (units, embeddings)");
}

const char* to_string(VocoderInput mode) {
  return mode == VocoderInput::kUnits ? "units" : "embeddings";
}

double unit_pitch_hz(int unit) { return 50.0 + 0.5 * unit; }

namespace {

constexpr double kMaxHarmonicHz = 7900.0;
constexpr int kSampleRate = kCanonicalSampleRate;

LogMelOptions band_options() {
  LogMelOptions o;
  o.frames = FrameSpec{OscillatorVocoder::kWindow, OscillatorVocoder::kHop, 512};
  o.n_mels = OscillatorVocoder::kBands;
  o.fmin = 0.0;
  o.fmax = kSampleRate / 2.0;
  o.floor = 1e-6;
  return o;
}

// Fractional band position of a frequency on the filterbank's centre grid.
double band_position(double hz) {
  const double lo = hz_to_mel(0.0);
  const double hi = hz_to_mel(kSampleRate / 2.0);
  const double step = (hi - lo) / (OscillatorVocoder::kBands + 1);
  return std::clamp((hz_to_mel(hz) - lo) / step - 1.0, 0.0,
                    static_cast<double>(OscillatorVocoder::kBands - 1));
}

double interp_band(const Eigen::Ref<const RowVector>& row, double pos) {
  const int b0 = static_cast<int>(pos);
  const int b1 = std::min(b0 + 1, static_cast<int>(row.size()) - 1);
  const double f = pos - b0;
  return (1.0 - f) * row(b0) + f * row(b1);
}

constexpr double kFade = 16.0;  // samples, half cross-fade

int max_harmonics(double f0) { return static_cast<int>(kMaxHarmonicHz / f0); }

// Phase-continuous harmonic bank; amps[t][h-1] is the amplitude of harmonic
// h over frame t's region, centred on its analysis window.
std::vector<double> render_harmonics(const std::vector<int>& pitch_units,
                                     const std::vector<std::vector<double>>& amps) {
  const int hop = OscillatorVocoder::kHop;
  const int t_len = static_cast<int>(pitch_units.size());
  const std::size_t n = static_cast<std::size_t>(t_len) * hop +
                        (OscillatorVocoder::kWindow - hop);
  const double centre0 = OscillatorVocoder::kWindow / 2.0;
  std::size_t h_cap = 0;
  for (const auto& a : amps) h_cap = std::max(h_cap, a.size());
  // Each harmonic is a unit phasor advanced by complex rotation; the rotation
  // is rebuilt (and the phasor renormalized) when the pitch frame changes.
  std::vector<double> re(h_cap, 1.0), im(h_cap, 0.0), rot_re(h_cap), rot_im(h_cap);
  std::vector<double> out(n, 0.0);
  int current = -1;
  std::size_t hn = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double pos = (static_cast<double>(i) - centre0) / hop;
    const int tn = std::clamp(static_cast<int>(std::lround(pos)), 0, t_len - 1);
    // Amplitudes hold over each frame's centred region and cross-fade over a
    // few samples at region edges, so little energy reaches the neighbours'
    // analysis windows.
    const double edge = (pos - (tn - 0.5)) * hop;  // samples since region start
    int t0 = tn;
    int t1 = tn;
    double lam = 0.0;
    if (edge < kFade && tn > 0) {
      t0 = tn - 1;
      lam = 0.5 + 0.5 * edge / kFade;
    } else if (edge > hop - kFade && tn + 1 < t_len) {
      t1 = tn + 1;
      lam = 0.5 * (edge - (hop - kFade)) / kFade;
    }
    if (tn != current) {
      current = tn;
      const double f0 = unit_pitch_hz(pitch_units[tn]);
      hn = std::min(h_cap, static_cast<std::size_t>(max_harmonics(f0)));
      for (std::size_t h = 0; h < h_cap; ++h) {
        const double w = 2.0 * std::numbers::pi * static_cast<double>(h + 1) * f0 / kSampleRate;
        rot_re[h] = std::cos(w);
        rot_im[h] = std::sin(w);
        const double norm = std::hypot(re[h], im[h]);
        re[h] /= norm;
        im[h] /= norm;
      }
    }
    const auto& a0 = amps[t0];
    const auto& a1 = amps[t1];
    double acc = 0.0;
    for (std::size_t h = 0; h < hn; ++h) {
      const double r = re[h] * rot_re[h] - im[h] * rot_im[h];
      im[h] = re[h] * rot_im[h] + im[h] * rot_re[h];
      re[h] = r;
      const double a = (1.0 - lam) * (h < a0.size() ? a0[h] : 0.0) +
                       lam * (h < a1.size() ? a1[h] : 0.0);
      acc += a * im[h];
    }
    out[i] = std::clamp(acc, -1.0, 1.0);
  }
  return out;
}

Matrix xavier(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-bound, bound);
  return m;
}

Matrix gaussian(Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.normal();
  return m;
}

Matrix squared_distances(const Matrix& frames, const Matrix& centroids) {
  return (frames.rowwise().squaredNorm() * RowVector::Ones(centroids.rows()) -
          2.0 * frames * centroids.transpose() +
          Vector::Ones(frames.rows()) * centroids.rowwise().squaredNorm().transpose())
      .cwiseMax(0.0);
}

// log(power) from log(power + floor), clipped well below the floor.
Matrix raw_log_power(const Matrix& floored) {
  const double floor = band_options().floor;
  return ((floored.array().exp() - floor).cwiseMax(1e-4 * floor)).log().matrix();
}

}  // namespace

Matrix band_log_power(const AudioBuffer& audio) {
  return log_mel_spectrogram(audio, band_options());
}

OscillatorVocoder::OscillatorVocoder(VocoderConfig config) : config_(std::move(config)) {
  config_.validate();
}

void OscillatorVocoder::require_ready(const std::string& speaker) const {
  if (!trained_) throw MissingDependencyError("vocoder '" + name() + "' is not trained");
  if (config_.speaker_index(speaker) < 0) {
    std::string known;
    for (const auto& s : config_.speaker_ids) known += (known.empty() ? "" : ", ") + s;
    throw ValidationError("unknown speaker '" + speaker + "'; available: " + known);
  }
}

std::vector<double> OscillatorVocoder::fit(std::span<const VocoderExample> examples,
                                           const Codebook& codebook) {
  if (examples.empty()) throw ValidationError("vocoder training set is empty");
  if (codebook.size() < 1 || codebook.size() > config_.num_embeddings) {
    throw ValidationError("codebook size " + std::to_string(codebook.size()) +
                          " exceeds num_embeddings " + std::to_string(config_.num_embeddings));
  }
  struct Prepared {
    std::vector<int> units;
    int speaker;
    Matrix target;
  };
  std::vector<Prepared> data;
  data.reserve(examples.size());
  RowVector mean = RowVector::Zero(kBands);
  double frames = 0.0;
  for (const VocoderExample& ex : examples) {
    const int spk = config_.speaker_index(ex.speaker);
    if (spk < 0) throw ValidationError("unknown speaker '" + ex.speaker + "' in training data");
    for (int u : ex.units.units) {
      if (u < 0 || u >= codebook.size()) throw ValidationError("unit id out of range");
    }
    validate_audio(ex.audio);
    const Matrix bands = band_log_power(ex.audio);
    const auto n_units = static_cast<Eigen::Index>(ex.units.length());
    if (std::abs(bands.rows() - n_units) > 1) {
      throw ValidationError("units and audio disagree: " + std::to_string(n_units) +
                            " units vs " + std::to_string(bands.rows()) + " frames");
    }
    const Eigen::Index t = std::min(bands.rows(), n_units);
    if (t < 1) throw ValidationError("training example has no frames");
    Prepared p{std::vector<int>(ex.units.units.begin(), ex.units.units.begin() + t), spk,
               bands.topRows(t)};
    mean += p.target.colwise().sum();
    frames += static_cast<double>(t);
    data.push_back(std::move(p));
  }

  Rng rng(config_.seed);
  const int de = config_.embedding_dim;
  const int ds = config_.speaker_dim();
  unit_table_ = gaussian(rng, config_.num_embeddings, de, 0.1);
  speaker_table_ = gaussian(rng, static_cast<Eigen::Index>(config_.speaker_ids.size()), ds, 0.1);
  weight_ = xavier(rng, config_.model_input_dim, kBands);
  bias_ = mean / frames;
  codebook_ = codebook;

  std::vector<Matrix*> params{&unit_table_, &speaker_table_, &weight_, &bias_};
  std::vector<Matrix> m1, m2, grads;
  for (Matrix* p : params) {
    m1.push_back(Matrix::Zero(p->rows(), p->cols()));
    m2.push_back(Matrix::Zero(p->rows(), p->cols()));
    grads.push_back(Matrix::Zero(p->rows(), p->cols()));
  }
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  std::vector<double> losses;
  losses.reserve(config_.train_steps);
  for (int step = 0; step < config_.train_steps; ++step) {
    for (Matrix& g : grads) g.setZero();
    double sse = 0.0;
    double count = 0.0;
    for (std::size_t idx : batch_indices(step, data.size(), config_.batch_size, config_.seed)) {
      const Prepared& p = data[idx];
      const auto t = static_cast<Eigen::Index>(p.units.size());
      Matrix x(t, config_.model_input_dim);
      for (Eigen::Index r = 0; r < t; ++r) {
        x.row(r).head(de) = unit_table_.row(p.units[r]);
        if (ds > 0) x.row(r).tail(ds) = speaker_table_.row(p.speaker);
      }
      const Matrix resid = ((x * weight_).rowwise() + bias_.row(0)) - p.target;
      sse += resid.squaredNorm();
      count += static_cast<double>(resid.size());
      grads[2] += x.transpose() * resid;
      grads[3] += resid.colwise().sum();
      const Matrix dx = resid * weight_.transpose();
      for (Eigen::Index r = 0; r < t; ++r) {
        grads[0].row(p.units[r]) += dx.row(r).head(de);
        if (ds > 0) grads[1].row(p.speaker) += dx.row(r).tail(ds);
      }
    }
    losses.push_back(sse / count);
    const double tt = step + 1;
    const double c1 = 1.0 - std::pow(b1, tt);
    const double c2 = 1.0 - std::pow(b2, tt);
    for (std::size_t k = 0; k < params.size(); ++k) {
      const Matrix g = grads[k] * (2.0 / count);
      m1[k] = b1 * m1[k] + (1.0 - b1) * g;
      m2[k] = b2 * m2[k] + (1.0 - b2) * g.cwiseAbs2();
      params[k]->array() -= config_.learning_rate * (m1[k].array() / c1) /
                            ((m2[k].array() / c2).sqrt() + eps);
    }
  }

  // Soft-assignment scale: a quarter of the mean squared gap between each
  // centroid and its nearest neighbour.
  if (codebook_.size() > 1) {
    Matrix d = squared_distances(codebook_.centroids, codebook_.centroids);
    d.diagonal().setConstant(std::numeric_limits<double>::infinity());
    temperature_ = std::max(0.25 * d.rowwise().minCoeff().mean(), 1e-12);
  }
  calibrate();
  trained_ = true;
  return losses;
}

void OscillatorVocoder::calibrate() {
  // Measured at a small level so the in-phase harmonic peak stays far from
  // the clamp, then shifted back to unit amplitude.
  const double level = 1e-3;
  flat_response_.resize(config_.num_embeddings, kBands);
  for (int k = 0; k < config_.num_embeddings; ++k) {
    const std::vector<int> pitch(3, k);
    const std::vector<std::vector<double>> amps(
        3, std::vector<double>(max_harmonics(unit_pitch_hz(k)), level));
    AudioBuffer a;
    a.samples = render_harmonics(pitch, amps);
    flat_response_.row(k) = raw_log_power(band_log_power(a)).row(1).array() - 2.0 * std::log(level);
  }
}

Matrix OscillatorVocoder::envelope(const Matrix& unit_weights, const std::string& speaker) const {
  require_ready(speaker);
  if (unit_weights.cols() != config_.num_embeddings) {
    throw ValidationError("unit weight width does not match num_embeddings");
  }
  const int de = config_.embedding_dim;
  const int ds = config_.speaker_dim();
  Matrix out = unit_weights * unit_table_ * weight_.topRows(de);
  out.rowwise() += bias_.row(0);
  if (ds > 0) {
    const RowVector s = speaker_table_.row(config_.speaker_index(speaker)) * weight_.bottomRows(ds);
    out.rowwise() += s;
  }
  return out;
}

AudioBuffer OscillatorVocoder::render_frames(const Matrix& log_power,
                                             const std::vector<int>& pitch_units) const {
  // Targets and responses are inverted in raw power, so the analysis floor
  // does not bias quiet frames; a few render-measure-correct passes then
  // absorb what the per-harmonic interpolation misses.
  const Matrix target = raw_log_power(log_power);
  const auto t_len = static_cast<Eigen::Index>(pitch_units.size());
  std::vector<std::vector<double>> amps(pitch_units.size());
  std::vector<std::vector<double>> pos(pitch_units.size());
  for (Eigen::Index t = 0; t < t_len; ++t) {
    const int u = pitch_units[t];
    const double f0 = unit_pitch_hz(u);
    amps[t].resize(max_harmonics(f0));
    pos[t].resize(amps[t].size());
    for (std::size_t h = 0; h < amps[t].size(); ++h) {
      pos[t][h] = band_position((h + 1) * f0);
      amps[t][h] = std::exp(0.5 * (interp_band(target.row(t), pos[t][h]) -
                                   interp_band(flat_response_.row(u), pos[t][h])));
    }
  }
  AudioBuffer out;
  out.samples = render_harmonics(pitch_units, amps);
  for (int pass = 0; pass < kRefinePasses; ++pass) {
    const Matrix measured = raw_log_power(band_log_power(out));
    const Matrix step = (0.5 * (target - measured.topRows(t_len))).cwiseMax(-2.0).cwiseMin(2.0);
    for (Eigen::Index t = 0; t < t_len; ++t) {
      for (std::size_t h = 0; h < amps[t].size(); ++h) {
        amps[t][h] *= std::exp(interp_band(step.row(t), pos[t][h]));
      }
    }
    out.samples = render_harmonics(pitch_units, amps);
  }
  return out;
}

AudioBuffer OscillatorVocoder::render(const UnitSequence& units, const std::string& speaker) const {
  require_ready(speaker);
  if (units.units.empty()) throw ValidationError("cannot synthesize an empty unit sequence");
  Matrix onehot = Matrix::Zero(static_cast<Eigen::Index>(units.length()), config_.num_embeddings);
  for (std::size_t t = 0; t < units.length(); ++t) {
    const int u = units.units[t];
    if (u < 0 || u >= config_.num_embeddings) throw ValidationError("unit id out of range");
    onehot(static_cast<Eigen::Index>(t), u) = 1.0;
  }
  return render_frames(envelope(onehot, speaker), units.units);
}

AudioBuffer OscillatorVocoder::render(const EmbeddingSequence& embeddings, VocoderInput mode,
                                      const std::string& speaker) const {
  require_ready(speaker);
  if (mode == VocoderInput::kUnits) return render(quantize(embeddings, codebook_), speaker);
  if (embeddings.length() < 1) throw ValidationError("cannot synthesize an empty sequence");
  if (embeddings.dim() != codebook_.dim()) {
    throw ValidationError("embedding dim does not match the vocoder codebook");
  }
  const Matrix d = squared_distances(embeddings.frames, codebook_.centroids);
  Matrix w = Matrix::Zero(d.rows(), config_.num_embeddings);
  std::vector<int> pitch(d.rows());
  for (Eigen::Index t = 0; t < d.rows(); ++t) {
    Eigen::Index best = 0;
    const double dmin = d.row(t).minCoeff(&best);
    pitch[t] = static_cast<int>(best);
    const RowVector e = (-(d.row(t).array() - dmin) / temperature_).exp().matrix();
    w.row(t).head(d.cols()) = e / e.sum();
  }
  return render_frames(envelope(w, speaker), pitch);
}

std::uint64_t OscillatorVocoder::weights_checksum() const {
  Fnv1a h;
  for (const Matrix* m : {&unit_table_, &speaker_table_, &weight_, &bias_, &codebook_.centroids}) {
    const std::uint64_t v = hash_matrix(*m);
    h.update(&v, sizeof(v));
  }
  return h.digest();
}

namespace {

constexpr char kVocMagic[4] = {'M', '2', 'S', 'V'};
constexpr std::uint32_t kVocVersion = 1;

template <typename T>
void append(std::string& out, const T& v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T take(const std::string& bytes, std::size_t& pos) {
  if (pos + sizeof(T) > bytes.size()) throw IoError("truncated vocoder checkpoint");
  T v;
  std::memcpy(&v, bytes.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

void append_matrix(std::string& out, const Matrix& m) {
  append(out, static_cast<std::uint64_t>(m.rows()));
  append(out, static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) append(out, m(r, c));
  }
}

Matrix take_matrix(const std::string& bytes, std::size_t& pos) {
  const auto rows = take<std::uint64_t>(bytes, pos);
  const auto cols = take<std::uint64_t>(bytes, pos);
  if (rows * cols * sizeof(double) > bytes.size() - pos) {
    throw IoError("vocoder checkpoint matrix exceeds file size");
  }
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = take<double>(bytes, pos);
  }
  return m;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingDependencyError("vocoder checkpoint not found: " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json read_header(const std::string& bytes, std::size_t& pos) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kVocMagic, 4) != 0) {
    throw IoError("not a vocoder checkpoint");
  }
  pos = 4;
  if (take<std::uint32_t>(bytes, pos) != kVocVersion) {
    throw IoError("unsupported vocoder checkpoint version");
  }
  const auto len = take<std::uint64_t>(bytes, pos);
  if (len > bytes.size() - pos) throw IoError("truncated vocoder checkpoint header");
  json header;
  try {
    header = json::parse(bytes.substr(pos, len));
  } catch (const json::exception& e) {
    throw IoError(std::string("bad vocoder checkpoint header: ") + e.what());
  }
  pos += len;
  return header;
}

}  // namespace

std::string OscillatorVocoder::encode() const {
  if (!trained_) throw MissingDependencyError("cannot save an untrained vocoder");
  nlohmann::ordered_json header;
  header["format"] = "m2s-vocoder";
  header["backend"] = name();
  header["config"] = json(config_);
  header["temperature"] = temperature_;
  const std::string text = header.dump();
  std::string out(kVocMagic, 4);
  append(out, kVocVersion);
  append(out, static_cast<std::uint64_t>(text.size()));
  out += text;
  for (const Matrix* m : {&unit_table_, &speaker_table_, &weight_, &bias_, &codebook_.centroids}) {
    append_matrix(out, *m);
  }
  return out;
}

std::unique_ptr<OscillatorVocoder> OscillatorVocoder::decode(const std::string& bytes) {
  std::size_t pos = 0;
  const json header = read_header(bytes, pos);
  if (header.value("backend", "") != "oscillator") {
    throw IoError("checkpoint holds a different vocoder backend");
  }
  auto v = std::make_unique<OscillatorVocoder>(header.at("config").get<VocoderConfig>());
  v->temperature_ = header.at("temperature").get<double>();
  v->unit_table_ = take_matrix(bytes, pos);
  v->speaker_table_ = take_matrix(bytes, pos);
  v->weight_ = take_matrix(bytes, pos);
  v->bias_ = take_matrix(bytes, pos);
  v->codebook_.centroids = take_matrix(bytes, pos);
  if (pos != bytes.size()) throw IoError("trailing bytes in vocoder checkpoint");
  const VocoderConfig& c = v->config_;
  if (v->unit_table_.rows() != c.num_embeddings || v->unit_table_.cols() != c.embedding_dim ||
      v->speaker_table_.rows() != static_cast<Eigen::Index>(c.speaker_ids.size()) ||
      v->weight_.rows() != c.model_input_dim || v->weight_.cols() != kBands ||
      v->bias_.cols() != kBands || v->codebook_.size() > c.num_embeddings) {
    throw IoError("vocoder checkpoint shapes do not match its config");
  }
  v->calibrate();
  v->trained_ = true;
  return v;
}

void OscillatorVocoder::save(const std::filesystem::path& path) const {
  const std::string bytes = encode();
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

std::unique_ptr<OscillatorVocoder> OscillatorVocoder::load(const std::filesystem::path& path) {
  return decode(read_file(path));
}

std::unique_ptr<VocoderBackend> make_vocoder(const std::string& name, VocoderConfig config) {
  if (name == "oscillator") return std::make_unique<OscillatorVocoder>(std::move(config));
  if (name == "hifigan") {
    throw MissingDependencyError(
        "the hifigan backend needs externally trained weights and is not built in");
  }
  throw ValidationError("unknown vocoder backend '" + name + "'");
}

std::unique_ptr<VocoderBackend> load_vocoder(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  std::size_t pos = 0;
  const json header = read_header(bytes, pos);
  const std::string backend = header.value("backend", "");
  if (backend == "oscillator") return OscillatorVocoder::decode(bytes);
  throw MissingDependencyError("vocoder backend '" + backend + "' is not available");
}

std::vector<double> train_vocoder(std::span<const VocoderExample> examples,
                                  const Codebook& codebook, VocoderBackend& backend) {
  if (examples.empty()) throw ValidationError("vocoder training set is empty");
  return backend.fit(examples, codebook);
}

AudioBuffer synthesize(const std::variant<UnitSequence, EmbeddingSequence>& input,
                       const std::string& speaker, const VocoderBackend& backend,
                       VocoderInput mode) {
  if (const auto* u = std::get_if<UnitSequence>(&input)) return backend.render(*u, speaker);
  return backend.render(std::get<EmbeddingSequence>(input), mode, speaker);
}

SimulatedSpeech simulate_ground_truth(const AudioBuffer& whisper, const Codebook& codebook,
                                      const EncoderBackend& encoder,
                                      const VocoderBackend& voice_vocoder,
                                      const std::string& speaker) {
  SimulatedSpeech out;
  out.units = quantize(extract_embeddings(whisper, encoder), codebook);
  out.audio = voice_vocoder.render(out.units, speaker);
  return out;
}

CloneBatch generate_clone_corpus(std::span<const Utterance> speech_corpus,
                                 const Codebook& codebook, const EncoderBackend& encoder,
                                 const VocoderBackend& nam_vocoder, const std::string& speaker) {
  CloneBatch batch;
  for (const Utterance& u : speech_corpus) {
    try {
      const AudioBuffer src = read_audio(u.nam_path);
      const UnitSequence units = quantize(extract_embeddings(src, encoder), codebook);
      batch.clones.push_back({nam_vocoder.render(units, speaker), u});
    } catch (const std::exception& e) {
      batch.failures.push_back({u.id, e.what()});
    }
  }
  return batch;
}

ParallelPair build_aligned_pairs(const EmbeddingSequence& clone_embeddings,
                                 const EmbeddingSequence& target_embeddings, int radius,
                                 FrameMetric metric, std::string id) {
  if (clone_embeddings.length() < 1 || target_embeddings.length() < 1) {
    throw ValidationError("cannot align an empty sequence");
  }
  const AlignmentPath path = fastdtw(clone_embeddings, target_embeddings, radius, metric);
  ParallelPair pair;
  pair.id = std::move(id);
  pair.source = warp_to_target(clone_embeddings, path, target_embeddings.length());
  pair.target = target_embeddings;
  pair.aligned = true;
  return pair;
}

}  // namespace m2s
