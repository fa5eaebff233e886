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

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "unitcodec/codec.hpp"
#include "unitcodec/features.hpp"
#include "unitcodec/quantizer.hpp"
#include "unitcodec/streams.hpp"

namespace unitcodec {

struct SynthesisConfig {
  std::size_t griffin_lim_iters = 60;
  std::uint64_t phase_seed = 0;  // fixed seed keeps outputs reproducible
  std::size_t nnls_iters = 50;
};

struct MagnitudeSpectrogram {
  std::size_t n_frames = 0;
  std::size_t n_bins = 0;
  std::vector<double> data;  // row-major, all >= 0

  const double* frame(std::size_t t) const { return data.data() + t * n_bins; }
  double* frame(std::size_t t) { return data.data() + t * n_bins; }
};

// Centroid lookup with duration inflation: frame t of the inflated stream is
// the centroid of its unit. The codebook must come from log-mel features.
FeatureSequence units_to_features(const EncodedUtterance& e, const Codebook& cb);

// Inverts the mel filterbank per frame by projected-gradient non-negative
// least squares after undoing the log.
MagnitudeSpectrogram mel_to_linear(const FeatureSequence& f,
                                   const FeatureConfig& cfg,
                                   std::size_t nnls_iters = 50);

struct GriffinLimResult {
  Waveform audio;
  std::vector<double> convergence;  // ||(|STFT(x)| - mag)|| / ||mag|| per iter
};

// Iterative phase reconstruction from a magnitude spectrogram. Phase is
// seeded from cfg_synth.phase_seed; the output is peak-normalized to 0.95.
GriffinLimResult griffin_lim(const MagnitudeSpectrogram& mag,
                             const FeatureConfig& cfg,
                             const SynthesisConfig& cfg_synth = {});

void write_convergence_csv(const std::vector<double>& trace, std::ostream& out);

// Full audio -> units -> audio round trip: log_mel, quantize, dedup,
// inflate, centroid lookup, mel inversion, Griffin-Lim. Output is trimmed
// to exactly frames * hop samples.
Waveform resynthesize(const Waveform& w, const Codebook& cb,
                      const FeatureConfig& cfg,
                      const SynthesisConfig& cfg_synth = {});

}  // namespace unitcodec
