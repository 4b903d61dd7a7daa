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

#include "m2s/toy_world.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "m2s/error.hpp"
#include "m2s/features.hpp"

namespace m2s::toy {

const std::vector<Letter>& alphabet() {
  static const std::vector<Letter> letters = {
      {'a', 750, 1250}, {'o', 500, 900},  {'u', 300, 750},  {'e', 500, 1900},
      {'i', 300, 2300}, {'n', 300, 1400}, {'m', 500, 1400}, {'r', 750, 1800},
      {'s', 300, 2900}, {'t', 500, 2700}, {'l', 750, 2400}, {'d', 750, 3100},
  };
  return letters;
}

const Letter* find_letter(char c) {
  for (const Letter& l : alphabet()) {
    if (l.symbol == c) return &l;
  }
  return nullptr;
}

Voice voice_by_name(const std::string& name) {
  if (name == "lj") return {"lj", Excitation::kHarmonic, 120.0, -2.0, 0.0, 0.3};
  if (name == "alt") return {"alt", Excitation::kHarmonic, 190.0, -0.5, 0.0, 0.25};
  if (name == "whisper") return {"whisper", Excitation::kNoise, 0.0, -1.0, 0.0, 0.15};
  if (name == "nam") return {"nam", Excitation::kNoise, 0.0, -4.0, 1800.0, 0.05};
  throw ValidationError("unknown toy voice '" + name + "'");
}

double envelope(const Letter& letter, const Voice& voice, double hz) {
  auto bump = [&](double centre, double width) {
    const double z = (hz - centre) / width;
    return std::exp(-0.5 * z * z);
  };
  double e = 0.04 + bump(letter.f1, 90.0) + 0.8 * bump(letter.f2, 140.0);
  e *= std::pow(10.0, voice.tilt_db_per_khz * hz / 1000.0 / 20.0);
  if (voice.lowpass_hz > 0.0) e /= std::sqrt(1.0 + std::pow(hz / voice.lowpass_hz, 8));
  return voice.gain * e;
}

std::vector<Segment> layout(const std::string& text, std::uint64_t timing_seed,
                            const TimingOptions& timing) {
  std::vector<std::vector<const Letter*>> words;
  bool new_word = true;
  for (char raw : text) {
    const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(raw)));
    if (c == ' ') {
      new_word = true;
      continue;
    }
    const Letter* l = find_letter(c);
    if (!l) throw ValidationError(std::string("toy alphabet has no letter '") + raw + "'");
    if (new_word) words.emplace_back();
    words.back().push_back(l);
    new_word = false;
  }
  if (words.empty()) throw ValidationError("toy text has no letters");

  Rng rng(timing_seed);
  std::vector<Segment> segs;
  std::size_t pos = 0;
  auto push = [&](int frames, const Letter* l) {
    const std::size_t len = static_cast<std::size_t>(std::max(1, frames)) * timing.frame_samples;
    segs.push_back({pos, pos + len, l});
    pos += len;
  };
  push(timing.edge_frames, nullptr);
  for (std::size_t w = 0; w < words.size(); ++w) {
    if (w) push(timing.gap_frames, nullptr);
    for (const Letter* l : words[w]) {
      const auto span = static_cast<std::size_t>(2 * timing.letter_jitter + 1);
      push(timing.letter_frames - timing.letter_jitter + static_cast<int>(rng.index(span)), l);
    }
  }
  push(timing.edge_frames, nullptr);
  return segs;
}

namespace {

constexpr int kNfft = 512;
constexpr int kHop = 128;

std::vector<double> excitation(const Voice& voice, std::size_t n, Rng& rng, int sr) {
  std::vector<double> x(n, 0.0);
  if (voice.excitation == Excitation::kNoise) {
    for (auto& v : x) v = rng.normal();
    return x;
  }
  // Flat-spectrum harmonic train with the same power density as unit noise.
  const double nyq = 0.5 * sr;
  const double amp = std::sqrt(2.0 * voice.f0 / nyq);
  for (int h = 1; h * voice.f0 < nyq - 50.0; ++h) {
    const double w = 2.0 * std::numbers::pi * h * voice.f0 / sr;
    for (std::size_t i = 0; i < n; ++i) x[i] += amp * std::cos(w * static_cast<double>(i));
  }
  return x;
}

}  // namespace

AudioBuffer render(const std::string& text, const Voice& voice, std::uint64_t timing_seed,
                   std::uint64_t noise_seed, const TimingOptions& timing) {
  const std::vector<Segment> segs = layout(text, timing_seed, timing);
  AudioBuffer out;
  const std::size_t n = segs.back().end;
  Rng rng(noise_seed);
  const std::vector<double> src = excitation(voice, n + kNfft, rng, out.sample_rate);

  // Short-time filtering: window, shape each frame's spectrum by the envelope
  // active at its centre, overlap-add.
  const std::vector<double> win = hann_window(kNfft);
  std::vector<double> acc(n + kNfft, 0.0);
  std::vector<double> norm(n + kNfft, 0.0);
  std::vector<double> frame(kNfft);
  std::size_t seg = 0;
  for (std::size_t start = 0; start < n; start += kHop) {
    const std::size_t centre = start + kNfft / 2;
    while (seg + 1 < segs.size() && centre >= segs[seg].end) ++seg;
    const Letter* letter = centre < n ? segs[seg].letter : nullptr;
    for (int i = 0; i < kNfft; ++i) frame[i] = src[start + i] * win[i];
    auto spec = real_fft(frame, kNfft);
    for (std::size_t k = 0; k < spec.size(); ++k) {
      const double hz = static_cast<double>(k) * out.sample_rate / kNfft;
      spec[k] *= letter ? envelope(*letter, voice, hz) : 0.0;
    }
    const std::vector<double> y = inverse_real_fft(spec, kNfft);
    for (int i = 0; i < kNfft; ++i) {
      acc[start + i] += y[i] * win[i];
      norm[start + i] += win[i] * win[i];
    }
  }
  out.samples.resize(n);
  Rng floor_rng(noise_seed ^ 0x5bd1e995ULL);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = norm[i] > 1e-9 ? acc[i] / std::max(norm[i], 0.5) : 0.0;
    out.samples[i] = std::clamp(v + 1e-4 * floor_rng.normal(), -1.0, 1.0);
  }
  return out;
}

std::string random_sentence(Rng& rng, int min_words, int max_words) {
  const auto& letters = alphabet();
  const int words = min_words + static_cast<int>(rng.index(max_words - min_words + 1));
  std::string s;
  for (int w = 0; w < words; ++w) {
    if (w) s += ' ';
    const int len = 2 + static_cast<int>(rng.index(3));
    char prev = 0;
    for (int i = 0; i < len; ++i) {
      char c;
      do {
        c = letters[rng.index(letters.size())].symbol;
      } while (c == prev);
      s += c;
      prev = c;
    }
  }
  return s;
}

namespace {

std::string utt_id(const std::string& prefix, int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%03d", i + 1);
  return prefix + "_" + buf;
}

void write_transcripts(const std::filesystem::path& path,
                       const std::vector<std::pair<std::string, std::string>>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& [id, text] : rows) out << id << ' ' << text << '\n';
}

}  // namespace

void write_nam_corpus(const std::filesystem::path& root, const CorpusOptions& options) {
  std::filesystem::create_directories(root / "nam");
  std::filesystem::create_directories(root / "whisper");
  Rng rng(options.seed);
  const Voice nam = voice_by_name("nam");
  const Voice whisper = voice_by_name("whisper");
  std::vector<std::pair<std::string, std::string>> rows;
  for (int i = 0; i < options.utterances; ++i) {
    const std::string id = utt_id(options.id_prefix, i);
    const std::string text = random_sentence(rng);
    const std::uint64_t base = rng.next();
    // separate sessions: same words, independent timing
    write_audio(render(text, nam, base, base + 1), root / "nam" / (id + ".wav"));
    write_audio(render(text, whisper, base + 2, base + 3), root / "whisper" / (id + ".wav"));
    rows.emplace_back(id, text);
  }
  write_transcripts(root / "transcripts.txt", rows);
}

void write_reference_corpus(const std::filesystem::path& root,
                            const std::vector<std::string>& speakers,
                            const CorpusOptions& options) {
  Rng rng(options.seed);
  std::vector<std::pair<std::string, std::string>> rows;
  for (int i = 0; i < options.utterances; ++i) {
    const std::string id = utt_id(options.id_prefix, i);
    const std::string text = random_sentence(rng);
    const std::uint64_t base = rng.next();
    for (const std::string& spk : speakers) {
      std::filesystem::create_directories(root / spk);
      write_audio(render(text, voice_by_name(spk), base, base + 1), root / spk / (id + ".wav"));
    }
    rows.emplace_back(id, text);
  }
  write_transcripts(root / "transcripts.txt", rows);
}

}  // namespace m2s::toy
