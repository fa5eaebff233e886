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

#include "unitcodec/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "unitcodec/error.hpp"
#include "unitcodec/fft.hpp"
#include "unitcodec/hash.hpp"

namespace unitcodec {

namespace {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(i) / n);
  }
  return w;
}

void normalize_in_place(FeatureSequence& f) {
  if (f.n_frames == 0) return;
  for (std::size_t d = 0; d < f.dim; ++d) {
    double mean = 0.0;
    for (std::size_t t = 0; t < f.n_frames; ++t) mean += f.frame(t)[d];
    mean /= static_cast<double>(f.n_frames);
    double var = 0.0;
    for (std::size_t t = 0; t < f.n_frames; ++t) {
      const double dv = f.frame(t)[d] - mean;
      var += dv * dv;
    }
    const double inv_std = 1.0 / std::sqrt(var / f.n_frames + 1e-8);
    for (std::size_t t = 0; t < f.n_frames; ++t) {
      f.frame(t)[d] = static_cast<float>((f.frame(t)[d] - mean) * inv_std);
    }
  }
}

void write_exact(std::ofstream& out, const void* data, std::size_t size) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
}

}  // namespace

void validate(const FeatureConfig& cfg) {
  if (cfg.sample_rate <= 0 || cfg.frame_rate <= 0) {
    throw Error(ErrorCode::InvalidArgument, "rates must be positive");
  }
  if (cfg.sample_rate % cfg.frame_rate != 0) {
    throw Error(ErrorCode::InvalidArgument,
                "frame_rate must divide sample_rate evenly");
  }
  if (!is_power_of_two(cfg.n_fft) || cfg.n_fft < cfg.window || cfg.window == 0) {
    throw Error(ErrorCode::InvalidArgument,
                "n_fft must be a power of two >= window");
  }
  if (!(cfg.fmin < cfg.fmax) || cfg.fmax > cfg.sample_rate / 2.0) {
    throw Error(ErrorCode::InvalidArgument,
                "need fmin < fmax <= sample_rate / 2");
  }
  if (cfg.n_mels < 2) {
    throw Error(ErrorCode::InvalidArgument, "n_mels must be >= 2");
  }
  if (cfg.kind == FeatureKind::kMfcc &&
      (cfg.n_coeffs == 0 || cfg.n_coeffs > cfg.n_mels)) {
    throw Error(ErrorCode::InvalidArgument, "need 0 < n_coeffs <= n_mels");
  }
}

FeatureConfig feature_preset_50hz() {
  FeatureConfig cfg;
  cfg.sample_rate = 16000;
  cfg.frame_rate = 50;
  cfg.n_fft = 1024;
  cfg.window = 640;
  cfg.n_mels = 40;
  cfg.fmin = 0.0;
  cfg.fmax = 8000.0;
  return cfg;
}

FeatureConfig feature_preset_100hz() {
  FeatureConfig cfg;
  cfg.sample_rate = 16000;
  cfg.frame_rate = 100;
  cfg.n_fft = 512;
  cfg.window = 400;
  cfg.n_mels = 40;
  cfg.fmin = 0.0;
  cfg.fmax = 8000.0;
  return cfg;
}

FeatureConfig feature_preset(const std::string& name) {
  if (name == "mel-50hz") return feature_preset_50hz();
  if (name == "mel-100hz") return feature_preset_100hz();
  throw Error(ErrorCode::InvalidArgument, "unknown preset: " + name);
}

std::string feature_fingerprint(const FeatureConfig& cfg) {
  std::ostringstream key;
  key << cfg.sample_rate << ';' << cfg.frame_rate << ';' << cfg.n_fft << ';'
      << cfg.window << ';' << cfg.n_mels << ';' << cfg.fmin << ';' << cfg.fmax
      << ';' << (cfg.kind == FeatureKind::kMfcc ? cfg.n_coeffs : 0) << ';'
      << (cfg.normalize ? 1 : 0);
  const std::string hex = to_hex(fnv1a64(key.str()));
  if (cfg.kind == FeatureKind::kMfcc) {
    return "mfcc" + std::to_string(cfg.n_coeffs) + "-" + hex;
  }
  return "logmel-" + hex;
}

Spectrogram stft(const Waveform& w, const FeatureConfig& cfg) {
  validate(cfg);
  if (w.samples.size() < cfg.window) {
    throw Error(ErrorCode::InputTooShort,
                "waveform shorter than one analysis window");
  }
  const std::size_t hop = cfg.hop();
  const std::size_t n_frames = 1 + (w.samples.size() - cfg.window) / hop;
  const std::vector<double> window = hann_window(cfg.window);

  Spectrogram spec;
  spec.n_frames = n_frames;
  spec.n_bins = cfg.n_fft / 2 + 1;
  spec.data.resize(n_frames * spec.n_bins);

  std::vector<double> frame(cfg.n_fft);
  for (std::size_t t = 0; t < n_frames; ++t) {
    const std::size_t offset = t * hop;
    for (std::size_t i = 0; i < cfg.window; ++i) {
      frame[i] = w.samples[offset + i] * window[i];
    }
    std::fill(frame.begin() + static_cast<std::ptrdiff_t>(cfg.window),
              frame.end(), 0.0);
    const auto bins = rfft(frame);
    std::copy(bins.begin(), bins.end(), spec.data.begin() + t * spec.n_bins);
  }
  return spec;
}

void MelFilterbank::apply(const double* spectrum, double* out) const {
  for (std::size_t m = 0; m < n_mels; ++m) {
    double acc = 0.0;
    const auto& row = weights[m];
    const double* x = spectrum + start[m];
    for (std::size_t k = 0; k < row.size(); ++k) acc += row[k] * x[k];
    out[m] = acc;
  }
}

void MelFilterbank::apply_transpose(const double* mel, double* out) const {
  for (std::size_t m = 0; m < n_mels; ++m) {
    const auto& row = weights[m];
    double* x = out + start[m];
    for (std::size_t k = 0; k < row.size(); ++k) x[k] += row[k] * mel[m];
  }
}

std::vector<double> MelFilterbank::row_dense(std::size_t m) const {
  std::vector<double> row(n_bins, 0.0);
  for (std::size_t k = 0; k < weights[m].size(); ++k) {
    row[start[m] + k] = weights[m][k];
  }
  return row;
}

MelFilterbank mel_filterbank(const FeatureConfig& cfg) {
  validate(cfg);
  const std::size_t n_bins = cfg.n_fft / 2 + 1;
  const double bin_hz = static_cast<double>(cfg.sample_rate) / cfg.n_fft;

  const double mel_lo = hz_to_mel(cfg.fmin);
  const double mel_hi = hz_to_mel(cfg.fmax);
  std::vector<double> edge_hz(cfg.n_mels + 2);
  for (std::size_t i = 0; i < edge_hz.size(); ++i) {
    edge_hz[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (cfg.n_mels + 1));
  }

  MelFilterbank fb;
  fb.n_mels = cfg.n_mels;
  fb.n_bins = n_bins;
  fb.start.resize(cfg.n_mels);
  fb.weights.resize(cfg.n_mels);
  fb.center_hz.resize(cfg.n_mels);

  for (std::size_t m = 0; m < cfg.n_mels; ++m) {
    const double left = edge_hz[m], center = edge_hz[m + 1], right = edge_hz[m + 2];
    fb.center_hz[m] = center;
    const auto lo_bin = static_cast<std::size_t>(std::ceil(left / bin_hz));
    const auto hi_bin =
        std::min(n_bins - 1, static_cast<std::size_t>(std::floor(right / bin_hz)));
    std::vector<double> row;
    std::size_t first = lo_bin;
    for (std::size_t k = lo_bin; k <= hi_bin; ++k) {
      const double f = k * bin_hz;
      double v = 0.0;
      if (f <= center) {
        v = center > left ? (f - left) / (center - left) : 0.0;
      } else {
        v = right > center ? (right - f) / (right - center) : 0.0;
      }
      if (v <= 0.0 && row.empty()) {
        ++first;
        continue;
      }
      row.push_back(std::max(0.0, v));
    }
    while (!row.empty() && row.back() <= 0.0) row.pop_back();
    double sum = 0.0;
    for (double v : row) sum += v;
    if (row.empty() || sum <= 0.0) {
      throw Error(ErrorCode::DegenerateBand,
                  "mel filter " + std::to_string(m) +
                      " has no spectral support; reduce n_mels or raise n_fft");
    }
    fb.start[m] = first;
    fb.weights[m] = std::move(row);
  }
  return fb;
}

FeatureSequence log_mel(const Waveform& w, const FeatureConfig& cfg) {
  if (cfg.kind != FeatureKind::kLogMel) {
    throw Error(ErrorCode::ConfigMismatch, "config is not log-mel");
  }
  const Spectrogram spec = stft(w, cfg);
  const MelFilterbank fb = mel_filterbank(cfg);

  FeatureSequence f;
  f.n_frames = spec.n_frames;
  f.dim = cfg.n_mels;
  f.frame_rate = cfg.frame_rate;
  f.fingerprint = feature_fingerprint(cfg);
  f.data.resize(f.n_frames * f.dim);

  std::vector<double> magnitude(spec.n_bins);
  std::vector<double> mel(cfg.n_mels);
  for (std::size_t t = 0; t < spec.n_frames; ++t) {
    const auto* bins = spec.frame(t);
    for (std::size_t k = 0; k < spec.n_bins; ++k) magnitude[k] = std::abs(bins[k]);
    fb.apply(magnitude.data(), mel.data());
    for (std::size_t m = 0; m < cfg.n_mels; ++m) {
      f.frame(t)[m] = static_cast<float>(std::log(mel[m] + kLogEps));
    }
  }
  if (cfg.normalize) normalize_in_place(f);
  return f;
}

std::vector<double> dct2(const std::vector<double>& input, std::size_t n_out) {
  const std::size_t n = input.size();
  std::vector<double> out(n_out, 0.0);
  for (std::size_t k = 0; k < n_out; ++k) {
    double acc = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
      acc += input[m] * std::cos(M_PI * k * (2.0 * m + 1.0) / (2.0 * n));
    }
    const double scale = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    out[k] = scale * acc;
  }
  return out;
}

std::vector<double> idct2(const std::vector<double>& coeffs, std::size_t n_out) {
  std::vector<double> out(n_out, 0.0);
  const double n = static_cast<double>(n_out);
  for (std::size_t m = 0; m < n_out; ++m) {
    double acc = 0.0;
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
      const double scale = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
      acc += scale * coeffs[k] * std::cos(M_PI * k * (2.0 * m + 1.0) / (2.0 * n));
    }
    out[m] = acc;
  }
  return out;
}

FeatureSequence mfcc(const Waveform& w, const FeatureConfig& cfg) {
  if (cfg.kind != FeatureKind::kMfcc) {
    throw Error(ErrorCode::ConfigMismatch, "config is not mfcc");
  }
  FeatureConfig mel_cfg = cfg;
  mel_cfg.kind = FeatureKind::kLogMel;
  mel_cfg.normalize = false;
  const FeatureSequence lm = log_mel(w, mel_cfg);

  FeatureSequence f;
  f.n_frames = lm.n_frames;
  f.dim = cfg.n_coeffs;
  f.frame_rate = cfg.frame_rate;
  f.fingerprint = feature_fingerprint(cfg);
  f.data.resize(f.n_frames * f.dim);

  std::vector<double> row(cfg.n_mels);
  for (std::size_t t = 0; t < lm.n_frames; ++t) {
    for (std::size_t m = 0; m < cfg.n_mels; ++m) row[m] = lm.frame(t)[m];
    const auto coeffs = dct2(row, cfg.n_coeffs);
    for (std::size_t k = 0; k < cfg.n_coeffs; ++k) {
      f.frame(t)[k] = static_cast<float>(coeffs[k]);
    }
  }
  if (cfg.normalize) normalize_in_place(f);
  return f;
}

void export_features(const FeatureSequence& f, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot create " + path);
  out.write("TLFT", 4);
  const std::uint32_t version = 1;
  const auto frames = static_cast<std::uint32_t>(f.n_frames);
  const auto dim = static_cast<std::uint32_t>(f.dim);
  const auto rate = static_cast<float>(f.frame_rate);
  write_exact(out, &version, 4);
  write_exact(out, &frames, 4);
  write_exact(out, &dim, 4);
  write_exact(out, &rate, 4);
  write_exact(out, f.data.data(), f.data.size() * sizeof(float));
  if (!out) throw Error(ErrorCode::IoError, "write failure on " + path);
}

FeatureSequence import_features(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);

  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "TLFT", 4) != 0) {
    throw Error(ErrorCode::BadMagic, path + " is not a TLFT file");
  }
  std::uint32_t version = 0, frames = 0, dim = 0;
  float rate = 0.0f;
  if (!in.read(reinterpret_cast<char*>(&version), 4) ||
      !in.read(reinterpret_cast<char*>(&frames), 4) ||
      !in.read(reinterpret_cast<char*>(&dim), 4) ||
      !in.read(reinterpret_cast<char*>(&rate), 4)) {
    throw Error(ErrorCode::TruncatedFile, path + ": truncated TLFT header");
  }
  if (version != 1) {
    throw Error(ErrorCode::VersionMismatch,
                path + ": TLFT version " + std::to_string(version));
  }

  FeatureSequence f;
  f.n_frames = frames;
  f.dim = dim;
  f.frame_rate = rate;
  f.data.resize(static_cast<std::size_t>(frames) * dim);
  if (!in.read(reinterpret_cast<char*>(f.data.data()),
               static_cast<std::streamsize>(f.data.size() * sizeof(float)))) {
    throw Error(ErrorCode::TruncatedFile, path + ": truncated TLFT payload");
  }
  for (float v : f.data) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::NonFiniteEntry, path + " contains a non-finite value");
    }
  }
  f.fingerprint = "import-" + to_hex(fnv1a64(path));
  return f;
}

}  // namespace unitcodec
