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
#include <map>
#include <string>
#include <vector>

#include "unitcodec/audio_io.hpp"
#include "unitcodec/features.hpp"
#include "unitcodec/quantizer.hpp"
#include "unitcodec/streams.hpp"
#include "unitcodec/vocoder.hpp"

namespace unitcodec {

// Add-k n-gram model over deduped unit streams. Sequences are padded with
// order-1 boundary symbols up front and one at the end; the boundary id is
// vocab (so the prediction space has vocab+1 outcomes).
struct NGramModel {
  std::size_t order = 3;
  std::size_t vocab = 0;
  double smoothing_k = 0.1;

  struct ContextCounts {
    std::uint64_t total = 0;
    std::vector<std::pair<std::uint16_t, std::uint64_t>> counts;  // sorted
  };
  std::map<std::vector<std::uint16_t>, ContextCounts> table;

  std::uint16_t boundary() const { return static_cast<std::uint16_t>(vocab); }

  // P(target | context), add-k smoothed over vocab+1 outcomes.
  double prob(const std::vector<std::uint16_t>& context,
              std::uint16_t target) const;
};

NGramModel train_ngram(const std::vector<std::vector<std::uint32_t>>& corpus,
                       std::size_t order, std::size_t vocab,
                       double smoothing_k = 0.1);

// exp of the mean negative log-likelihood, end-of-sequence included.
double perplexity(const NGramModel& m, const std::vector<std::uint32_t>& stream);

struct SamplingOptions {
  std::size_t max_len = 100;
  double temperature = 1.0;
  std::uint64_t seed = 0;
};

// Autoregressive sampling from P(.|ctx)^(1/T), renormalized; stops at the
// boundary symbol or max_len. The prompt is not repeated in the output.
std::vector<std::uint32_t> sample_continuation(
    const NGramModel& m, const std::vector<std::uint32_t>& prompt,
    const SamplingOptions& opts = {});

// Per-unit median segment duration in frames, fallback 2 for unseen units.
std::vector<std::uint32_t> learn_unit_durations(
    const std::vector<EncodedUtterance>& corpus, std::size_t vocab);

// Full continuation pipeline: encode the prompt, sample new units, give them
// their median durations, and synthesize prompt + continuation.
Waveform continue_speech(const Waveform& w, const Codebook& cb,
                         const NGramModel& m,
                         const std::vector<std::uint32_t>& unit_durations,
                         const FeatureConfig& cfg,
                         const SynthesisConfig& cfg_synth = {},
                         const SamplingOptions& sampling = {});

// TLLM model file: magic "TLLM", u32 order, u32 K, f64 k, u64 n_triples,
// then sorted (context, unit, count) triples.
void save_ngram(const NGramModel& m, const std::string& path);
NGramModel load_ngram(const std::string& path);

}  // namespace unitcodec
