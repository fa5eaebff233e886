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

#include "unitcodec/vocoder.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include "unitcodec/error.hpp"
#include "unitcodec/fft.hpp"

namespace unitcodec {

namespace {

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(i) / n);
  }
  return w;
}

}  // namespace

FeatureSequence units_to_features(const EncodedUtterance& e, const Codebook& cb) {
  if (e.vocab != cb.k) {
    throw Error(ErrorCode::VocabMismatch,
                "utterance vocab " + std::to_string(e.vocab) +
                    " != codebook K " + std::to_string(cb.k));
  }
  if (cb.feature_fingerprint.rfind("logmel-", 0) != 0) {
    throw Error(ErrorCode::FeatureKindMismatch,
                "codebook was not trained on log-mel features");
  }

  FeatureSequence f;
  f.dim = cb.dim;
  f.frame_rate = e.frame_rate;
  f.fingerprint = cb.feature_fingerprint;
  f.n_frames = static_cast<std::size_t>(e.total_frames());
  f.data.reserve(f.n_frames * f.dim);
  for (std::size_t s = 0; s < e.n_segments(); ++s) {
    const float* c = cb.centroid(e.units[s]);
    for (std::uint32_t r = 0; r < e.durations[s]; ++r) {
      f.data.insert(f.data.end(), c, c + cb.dim);
    }
  }
  return f;
}

MagnitudeSpectrogram mel_to_linear(const FeatureSequence& f,
                                   const FeatureConfig& cfg,
                                   std::size_t nnls_iters) {
  if (!f.fingerprint.empty() && f.fingerprint != feature_fingerprint(cfg)) {
    throw Error(ErrorCode::ConfigMismatch,
                "features were not produced with this analysis config");
  }
  if (f.dim != cfg.n_mels) {
    throw Error(ErrorCode::ConfigMismatch, "feature dim != n_mels");
  }
  const MelFilterbank fb = mel_filterbank(cfg);

  MagnitudeSpectrogram out;
  out.n_frames = f.n_frames;
  out.n_bins = fb.n_bins;
  out.data.assign(out.n_frames * out.n_bins, 0.0);

  std::vector<double> colsum(fb.n_bins, 0.0);
  for (std::size_t m = 0; m < fb.n_mels; ++m) {
    for (std::size_t i = 0; i < fb.weights[m].size(); ++i) {
      colsum[fb.start[m] + i] += fb.weights[m][i];
    }
  }

  std::vector<double> target(fb.n_mels);
  std::vector<double> weighted_target(fb.n_mels);
  std::vector<double> solution(fb.n_bins);
  std::vector<double> numerator(fb.n_bins);
  std::vector<double> denominator(fb.n_bins);
  std::vector<double> mel(fb.n_mels);

  for (std::size_t t = 0; t < f.n_frames; ++t) {
    double peak = 0.0;
    for (std::size_t m = 0; m < fb.n_mels; ++m) {
      target[m] = std::max(0.0, std::exp(static_cast<double>(f.frame(t)[m])) -
                                    kLogEps);
      peak = std::max(peak, target[m]);
    }
    if (peak <= 0.0) continue;  // silent frame stays all-zero

    // Relative-error row weighting keeps quiet bands converging as fast as
    // loud ones.
    std::vector<double> weight_sq(fb.n_mels);
    for (std::size_t m = 0; m < fb.n_mels; ++m) {
      const double w = 1.0 / std::max(target[m], peak * 1e-8 + 1e-30);
      weight_sq[m] = w * w;
      weighted_target[m] = target[m] * weight_sq[m];
    }
    std::fill(numerator.begin(), numerator.end(), 0.0);
    fb.apply_transpose(weighted_target.data(), numerator.data());

    // Start from the column-normalized transpose image of the targets.
    std::fill(solution.begin(), solution.end(), 0.0);
    fb.apply_transpose(target.data(), solution.data());
    for (std::size_t b = 0; b < fb.n_bins; ++b) {
      solution[b] = colsum[b] > 1e-12 ? solution[b] / colsum[b] : 0.0;
    }

    // Multiplicative updates: projected gradient with per-component step
    // s_b / (M^T W^2 M s)_b. Zeros stay zero, so filter support is kept.
    for (std::size_t it = 0; it < nnls_iters; ++it) {
      fb.apply(solution.data(), mel.data());
      for (std::size_t m = 0; m < fb.n_mels; ++m) mel[m] *= weight_sq[m];
      std::fill(denominator.begin(), denominator.end(), 0.0);
      fb.apply_transpose(mel.data(), denominator.data());
      for (std::size_t b = 0; b < fb.n_bins; ++b) {
        if (denominator[b] > 1e-300) {
          solution[b] *= numerator[b] / denominator[b];
        }
      }
    }
    std::copy(solution.begin(), solution.end(), out.frame(t));
  }
  return out;
}

GriffinLimResult griffin_lim(const MagnitudeSpectrogram& mag,
                             const FeatureConfig& cfg,
                             const SynthesisConfig& cfg_synth) {
  validate(cfg);
  if (mag.n_bins != cfg.n_fft / 2 + 1) {
    throw Error(ErrorCode::ConfigMismatch, "spectrogram bins != n_fft/2+1");
  }
  for (double v : mag.data) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::NonFiniteInput, "magnitudes must be finite and >= 0");
    }
  }

  GriffinLimResult result;
  result.audio.sample_rate = cfg.sample_rate;
  if (mag.n_frames == 0) return result;

  const std::size_t hop = cfg.hop();
  const std::size_t n_samples = (mag.n_frames - 1) * hop + cfg.window;
  const std::vector<double> window = hann_window(cfg.window);

  // Overlap-add denominator (sum of squared windows) is iteration-invariant.
  std::vector<double> denom(n_samples, 0.0);
  for (std::size_t t = 0; t < mag.n_frames; ++t) {
    for (std::size_t i = 0; i < cfg.window; ++i) {
      denom[t * hop + i] += window[i] * window[i];
    }
  }

  double mag_norm_sq = 0.0;
  for (double v : mag.data) mag_norm_sq += v * v;
  const double mag_norm = std::sqrt(mag_norm_sq);

  // Random initial phase; DC and Nyquist bins stay real.
  std::mt19937_64 rng(cfg_synth.phase_seed);
  std::vector<double> phase(mag.n_frames * mag.n_bins, 0.0);
  for (std::size_t t = 0; t < mag.n_frames; ++t) {
    for (std::size_t b = 1; b + 1 < mag.n_bins; ++b) {
      phase[t * mag.n_bins + b] =
          2.0 * M_PI * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    }
  }

  std::vector<double> x(n_samples, 0.0);
  std::vector<std::complex<double>> spec_frame(mag.n_bins);
  std::vector<double> frame(cfg.n_fft);

  for (std::size_t iter = 0; iter < cfg_synth.griffin_lim_iters; ++iter) {
    // Least-squares inverse STFT of mag * e^{i phase}.
    std::fill(x.begin(), x.end(), 0.0);
    for (std::size_t t = 0; t < mag.n_frames; ++t) {
      for (std::size_t b = 0; b < mag.n_bins; ++b) {
        const double m = mag.frame(t)[b];
        const double ph = phase[t * mag.n_bins + b];
        spec_frame[b] = {m * std::cos(ph), m * std::sin(ph)};
      }
      const auto samples = irfft(spec_frame, cfg.n_fft);
      for (std::size_t i = 0; i < cfg.window; ++i) {
        x[t * hop + i] += window[i] * samples[i];
      }
    }
    for (std::size_t i = 0; i < n_samples; ++i) {
      x[i] = denom[i] > 1e-10 ? x[i] / denom[i] : 0.0;
    }

    // Re-analyze, measure convergence, keep the new phase.
    double err_sq = 0.0;
    for (std::size_t t = 0; t < mag.n_frames; ++t) {
      for (std::size_t i = 0; i < cfg.window; ++i) {
        frame[i] = x[t * hop + i] * window[i];
      }
      std::fill(frame.begin() + static_cast<std::ptrdiff_t>(cfg.window),
                frame.end(), 0.0);
      const auto bins = rfft(frame);
      for (std::size_t b = 0; b < mag.n_bins; ++b) {
        const double diff = std::abs(bins[b]) - mag.frame(t)[b];
        err_sq += diff * diff;
        phase[t * mag.n_bins + b] = std::arg(bins[b]);
      }
    }
    result.convergence.push_back(mag_norm > 0.0 ? std::sqrt(err_sq) / mag_norm
                                                : 0.0);
  }

  // Final synthesis from the last phase estimate.
  std::fill(x.begin(), x.end(), 0.0);
  for (std::size_t t = 0; t < mag.n_frames; ++t) {
    for (std::size_t b = 0; b < mag.n_bins; ++b) {
      const double m = mag.frame(t)[b];
      const double ph = phase[t * mag.n_bins + b];
      spec_frame[b] = {m * std::cos(ph), m * std::sin(ph)};
    }
    const auto samples = irfft(spec_frame, cfg.n_fft);
    for (std::size_t i = 0; i < cfg.window; ++i) {
      x[t * hop + i] += window[i] * samples[i];
    }
  }
  for (std::size_t i = 0; i < n_samples; ++i) {
    x[i] = denom[i] > 1e-10 ? x[i] / denom[i] : 0.0;
  }

  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  const double scale = peak > 0.0 ? 0.95 / peak : 0.0;
  result.audio.samples.resize(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    result.audio.samples[i] = static_cast<float>(x[i] * scale);
  }
  return result;
}

void write_convergence_csv(const std::vector<double>& trace, std::ostream& out) {
  out << "iteration,spectral_convergence\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    out << i << ',' << trace[i] << "\n";
  }
}

Waveform resynthesize(const Waveform& w, const Codebook& cb,
                      const FeatureConfig& cfg,
                      const SynthesisConfig& cfg_synth) {
  const FeatureSequence features = log_mel(w, cfg);
  const UnitSequence units = quantize(features, cb);
  const EncodedUtterance encoded = dedup(units);
  const FeatureSequence reconstructed = units_to_features(encoded, cb);
  const MagnitudeSpectrogram linear =
      mel_to_linear(reconstructed, cfg, cfg_synth.nnls_iters);
  GriffinLimResult gl = griffin_lim(linear, cfg, cfg_synth);

  // Duration accounting: exactly hop samples per analysis frame.
  gl.audio.samples.resize(features.n_frames * cfg.hop(), 0.0f);
  return gl.audio;
}

}  // namespace unitcodec
