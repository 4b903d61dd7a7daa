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

#include "m2s/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <unsupported/Eigen/FFT>

#include "m2s/error.hpp"

namespace m2s {

int frame_count(std::size_t num_samples, const FrameSpec& spec) {
  if (num_samples < static_cast<std::size_t>(spec.window)) return 0;
  return 1 + static_cast<int>((num_samples - spec.window) / spec.hop);
}

std::vector<double> hann_window(int length) {
  std::vector<double> w(length);
  for (int i = 0; i < length; ++i) {
    // Periodic Hann.
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / length);
  }
  return w;
}

std::vector<std::complex<double>> real_fft(std::span<const double> frame, int nfft) {
  std::vector<double> padded(nfft, 0.0);
  std::copy_n(frame.begin(), std::min<std::size_t>(frame.size(), nfft), padded.begin());
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> full;
  fft.fwd(full, padded);
  full.resize(nfft / 2 + 1);
  return full;
}

std::vector<double> inverse_real_fft(const std::vector<std::complex<double>>& half_spectrum,
                                     int nfft) {
  std::vector<std::complex<double>> full(nfft);
  for (int k = 0; k <= nfft / 2; ++k) full[k] = half_spectrum[k];
  for (int k = nfft / 2 + 1; k < nfft; ++k) full[k] = std::conj(half_spectrum[nfft - k]);
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> time;
  fft.inv(time, full);
  std::vector<double> out(nfft);
  for (int i = 0; i < nfft; ++i) out[i] = time[i].real();
  return out;
}

Matrix power_spectrogram(std::span<const double> samples, const FrameSpec& spec) {
  if (spec.window <= 0 || spec.hop <= 0 || spec.nfft < spec.window) {
    throw ValidationError("invalid frame settings");
  }
  const int frames = frame_count(samples.size(), spec);
  const int bins = spec.nfft / 2 + 1;
  const auto window = hann_window(spec.window);
  double energy = 0.0;
  for (double w : window) energy += w * w;

  Matrix out(frames, bins);
  Eigen::FFT<double> fft;
  std::vector<double> buf(spec.nfft, 0.0);
  std::vector<std::complex<double>> spectrum;
  for (int t = 0; t < frames; ++t) {
    std::fill(buf.begin(), buf.end(), 0.0);
    const std::size_t start = static_cast<std::size_t>(t) * spec.hop;
    for (int i = 0; i < spec.window; ++i) buf[i] = samples[start + i] * window[i];
    fft.fwd(spectrum, buf);
    for (int k = 0; k < bins; ++k) out(t, k) = std::norm(spectrum[k]) / energy;
  }
  return out;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

Matrix mel_filterbank(int n_mels, int nfft, int sample_rate, double fmin, double fmax) {
  const int bins = nfft / 2 + 1;
  const double mel_lo = hz_to_mel(fmin);
  const double mel_hi = hz_to_mel(fmax);
  std::vector<double> edges(n_mels + 2);
  for (int i = 0; i < n_mels + 2; ++i) {
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (n_mels + 1));
  }
  Matrix fb = Matrix::Zero(n_mels, bins);
  for (int m = 0; m < n_mels; ++m) {
    const double left = edges[m];
    const double center = edges[m + 1];
    const double right = edges[m + 2];
    for (int k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / nfft;
      if (f > left && f < center) {
        fb(m, k) = (f - left) / (center - left);
      } else if (f >= center && f < right) {
        fb(m, k) = (right - f) / (right - center);
      }
    }
  }
  return fb;
}

Matrix dct_matrix(int n_out, int n_in) {
  Matrix d(n_out, n_in);
  for (int k = 0; k < n_out; ++k) {
    const double scale = k == 0 ? std::sqrt(1.0 / n_in) : std::sqrt(2.0 / n_in);
    for (int n = 0; n < n_in; ++n) {
      d(k, n) = scale * std::cos(std::numbers::pi * (n + 0.5) * k / n_in);
    }
  }
  return d;
}

Matrix log_mel_spectrogram(const AudioBuffer& audio, const LogMelOptions& options) {
  const Matrix power = power_spectrogram(audio.samples, options.frames);
  const Matrix fb = mel_filterbank(options.n_mels, options.frames.nfft, audio.sample_rate,
                                   options.fmin, options.fmax);
  Matrix mel = power * fb.transpose();
  return (mel.array() + options.floor).log().matrix();
}

Matrix mel_cepstrum(const AudioBuffer& audio, const MelCepstrumOptions& options) {
  LogMelOptions lm;
  lm.frames = options.frames;
  lm.n_mels = options.n_mels;
  lm.fmax = audio.sample_rate / 2.0;
  lm.floor = options.floor;
  const Matrix log_power = log_mel_spectrogram(audio, lm);
  const Matrix dct = dct_matrix(options.order, options.n_mels);
  return 0.5 * log_power * dct.transpose();
}

}  // namespace m2s
