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

// Stacked log-mel panels written as an 8-bit RGB PNG.

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <memory>

#include "m2s/error.hpp"
#include "m2s/features.hpp"
#include "m2s/pipeline.hpp"

namespace m2s {

namespace {

constexpr int kMels = 80;
constexpr int kGap = 4;             // rows between panels
constexpr double kRangeNats = 18.42;  // ~80 dB below each panel's peak

// Dark blue -> teal -> yellow.
std::array<std::uint8_t, 3> colour(double v) {
  static constexpr double stops[][3] = {
      {0.27, 0.00, 0.33}, {0.23, 0.32, 0.55}, {0.13, 0.57, 0.55}, {0.37, 0.79, 0.38},
      {0.99, 0.91, 0.14}};
  v = std::clamp(v, 0.0, 1.0) * 4.0;
  const int i = std::min(static_cast<int>(v), 3);
  const double f = v - i;
  std::array<std::uint8_t, 3> rgb;
  for (int c = 0; c < 3; ++c) {
    const double x = stops[i][c] * (1.0 - f) + stops[i + 1][c] * f;
    rgb[c] = static_cast<std::uint8_t>(std::lround(255.0 * x));
  }
  return rgb;
}

void write_png(const std::filesystem::path& out, int width, int height,
               const std::vector<std::uint8_t>& rgb) {
  if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
  std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(out.c_str(), "wb"), &std::fclose);
  if (!fp) throw IoError("cannot write " + out.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("failed writing " + out.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, width, height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < height; ++y) {
    png_write_row(png, rgb.data() + static_cast<std::size_t>(y) * width * 3);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

void plot_spectrograms(const std::vector<std::filesystem::path>& inputs,
                       const std::filesystem::path& out) {
  if (inputs.empty()) throw ValidationError("plot needs at least one audio file");
  LogMelOptions opts;
  opts.frames = {400, 160, 512};
  opts.n_mels = kMels;
  opts.floor = 1e-10;
  std::vector<Matrix> panels;
  for (const auto& in : inputs) {
    const AudioBuffer audio = read_audio(in);
    if (audio.samples.size() < static_cast<std::size_t>(opts.frames.window)) {
      throw ValidationError(in.string() + " is shorter than one analysis frame");
    }
    panels.push_back(log_mel_spectrogram(audio, opts));
  }
  int width = 0;
  for (const auto& p : panels) width = std::max(width, static_cast<int>(p.rows()));
  const int n = static_cast<int>(panels.size());
  const int height = n * kMels + (n - 1) * kGap;
  std::vector<std::uint8_t> rgb(static_cast<std::size_t>(width) * height * 3, 255);
  for (int k = 0; k < n; ++k) {
    const Matrix& p = panels[k];
    const double top = p.maxCoeff();
    const int y0 = k * (kMels + kGap);
    for (int t = 0; t < p.rows(); ++t) {
      for (int m = 0; m < kMels; ++m) {
        const auto c = colour((p(t, m) - (top - kRangeNats)) / kRangeNats);
        const int y = y0 + (kMels - 1 - m);  // low bands at the bottom
        std::copy(c.begin(), c.end(), rgb.begin() + (static_cast<std::size_t>(y) * width + t) * 3);
      }
    }
  }
  write_png(out, width, height, rgb);
}

}  // namespace m2s
