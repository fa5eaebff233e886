// Copyright 2026  unit-codec authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "unitcodec/audio_io.hpp"

namespace unitcodec {

// Log floor applied before taking logs of mel energies.
inline constexpr double kLogEps = 1e-10;

enum class FeatureKind { kLogMel, kMfcc };

struct FeatureConfig {
  int sample_rate = 16000;
  int frame_rate = 50;       // hop = sample_rate / frame_rate, must divide
  std::size_t n_fft = 1024;  // power of two, >= window
  std::size_t window = 640;  // Hann length in samples
  std::size_t n_mels = 40;
  double fmin = 0.0;
  double fmax = 8000.0;
  FeatureKind kind = FeatureKind::kLogMel;
  std::size_t n_coeffs = 13;     // MFCC only
  bool normalize = false;        // per-utterance mean/variance normalization

  std::size_t hop() const {
    return static_cast<std::size_t>(sample_rate / frame_rate);
  }
  std::size_t dim() const {
    return kind == FeatureKind::kMfcc ? n_coeffs : n_mels;
  }
};

// Throws InvalidArgument/DegenerateBand when the config is inconsistent.
void validate(const FeatureConfig& cfg);

// 50 Hz frame grid over 16 kHz audio (40 ms Hann window).
FeatureConfig feature_preset_50hz();
// 100 Hz frame grid over 16 kHz audio (25 ms Hann window).
FeatureConfig feature_preset_100hz();

FeatureConfig feature_preset(const std::string& name);

// "logmel-<hash>" / "mfcc<n>-<hash>"; identifies both the feature kind and
// the exact analysis configuration.
std::string feature_fingerprint(const FeatureConfig& cfg);

struct FeatureSequence {
  std::size_t n_frames = 0;
  std::size_t dim = 0;
  double frame_rate = 0.0;
  std::string fingerprint;
  std::vector<float> data;  // row-major n_frames x dim

  const float* frame(std::size_t t) const { return data.data() + t * dim; }
  float* frame(std::size_t t) { return data.data() + t * dim; }
};

struct Spectrogram {
  std::size_t n_frames = 0;
  std::size_t n_bins = 0;  // n_fft / 2 + 1
  std::vector<std::complex<double>> data;  // row-major

  const std::complex<double>* frame(std::size_t t) const {
    return data.data() + t * n_bins;
  }
};

// Frame t covers samples [t*hop, t*hop + window), Hann-windowed and
// zero-padded to n_fft. L = 1 + floor((len - window) / hop).
Spectrogram stft(const Waveform& w, const FeatureConfig& cfg);

// Triangular filters on the HTK mel scale. Each filter's support is a
// contiguous bin range, stored sparsely.
struct MelFilterbank {
  std::size_t n_mels = 0;
  std::size_t n_bins = 0;
  std::vector<std::size_t> start;        // first nonzero bin per filter
  std::vector<std::vector<double>> weights;
  std::vector<double> center_hz;

  // y[m] = sum_k weights[m][k] * x[start[m] + k]
  void apply(const double* spectrum, double* out) const;
  // x[k] += sum_m weights[m][k'] * y[m] (transpose product)
  void apply_transpose(const double* mel, double* out) const;
  std::vector<double> row_dense(std::size_t m) const;
};

MelFilterbank mel_filterbank(const FeatureConfig& cfg);

FeatureSequence log_mel(const Waveform& w, const FeatureConfig& cfg);
FeatureSequence mfcc(const Waveform& w, const FeatureConfig& cfg);

// Orthonormal DCT-II over rows; used by mfcc and by tests to invert it.
std::vector<double> dct2(const std::vector<double>& input, std::size_t n_out);
std::vector<double> idct2(const std::vector<double>& coeffs, std::size_t n_out);

// TLFT feature file: magic "TLFT", u32 version=1, u32 L, u32 d,
// f32 frame_rate, then L*d float32 little-endian row-major.
void export_features(const FeatureSequence& f, const std::string& path);
FeatureSequence import_features(const std::string& path);

}  // namespace unitcodec
