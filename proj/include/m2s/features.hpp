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

#ifndef M2S_FEATURES_HPP_
#define M2S_FEATURES_HPP_

#include <complex>
#include <span>
#include <vector>

#include "m2s/audio.hpp"
#include "m2s/common.hpp"

namespace m2s {

// Framing: frame t covers samples [t * hop, t * hop + window). No padding, so
// a signal shorter than one window has zero frames.
struct FrameSpec {
  int window = 400;
  int hop = 160;
  int nfft = 512;
};

int frame_count(std::size_t num_samples, const FrameSpec& spec);

std::vector<double> hann_window(int length);

// Hann-windowed power spectrum, frames x (nfft / 2 + 1), normalized by the
// window energy.
Matrix power_spectrogram(std::span<const double> samples, const FrameSpec& spec);

// Triangular HTK-mel filters, n_mels x (nfft / 2 + 1).
Matrix mel_filterbank(int n_mels, int nfft, int sample_rate, double fmin, double fmax);

// Orthonormal DCT-II basis, rows = output coefficients.
Matrix dct_matrix(int n_out, int n_in);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

struct LogMelOptions {
  FrameSpec frames{400, 320, 512};
  int n_mels = 80;
  double fmin = 0.0;
  double fmax = 8000.0;
  double floor = 1e-6;  // added to mel power before the log
};

// frames x n_mels natural-log mel power.
Matrix log_mel_spectrogram(const AudioBuffer& audio, const LogMelOptions& options);

// Mel-cepstrum: orthonormal DCT of the natural-log mel amplitude (half the
// log power). Row t holds coefficients c0..c(order-1).
struct MelCepstrumOptions {
  FrameSpec frames{400, 160, 512};  // 25 ms / 10 ms at 16 kHz
  int n_mels = 40;
  int order = 25;
  double floor = 1e-10;
};

Matrix mel_cepstrum(const AudioBuffer& audio, const MelCepstrumOptions& options);

// Inverse of power_spectrogram's framing for a single complex half spectrum.
std::vector<double> inverse_real_fft(const std::vector<std::complex<double>>& half_spectrum,
                                     int nfft);
std::vector<std::complex<double>> real_fft(std::span<const double> frame, int nfft);

}  // namespace m2s

#endif  // M2S_FEATURES_HPP_
