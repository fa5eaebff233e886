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
#include <optional>
#include <string>
#include <vector>

#include "unitcodec/features.hpp"
#include "unitcodec/quantizer.hpp"

namespace unitcodec {

// Temporal mean and standard deviation per dimension, concatenated (2d).
std::vector<float> pool_continuous(const FeatureSequence& f);

// Normalized unit histogram (dim = vocab, sums to 1).
std::vector<float> pool_quantized(const UnitSequence& u);

struct ProbeMeta {
  std::size_t epochs = 0;
  double lr = 0.0;
  std::uint64_t seed = 0;
  double final_loss = 0.0;
  std::vector<double> per_epoch_loss;
};

// Multinomial logistic regression over pooled representations.
struct Probe {
  std::size_t n_classes = 0;
  std::size_t dim = 0;
  std::vector<float> weights;  // row-major n_classes x dim
  std::vector<float> bias;
  ProbeMeta meta;
};

struct ProbeTrainOptions {
  std::size_t epochs = 5;
  double lr = 1.0;
  std::size_t batch_size = 8;
  std::uint64_t seed = 0;
};

Probe train_probe(const std::vector<std::vector<float>>& examples,
                  const std::vector<int>& labels,
                  const ProbeTrainOptions& opts = {});

// Argmax accuracy; prediction ties go to the lowest class index.
double eval_probe(const Probe& p, const std::vector<std::vector<float>>& examples,
                  const std::vector<int>& labels);

struct LabeledUtterance {
  FeatureSequence features;
  int speaker = 0;
};

struct ProbeRow {
  std::string representation;   // "continuous" or "quantized"
  std::optional<std::size_t> vocab;
  double accuracy = 0.0;
};

// Probe training budget used by the experiment: desk-scale corpora are two
// orders of magnitude smaller than the corpora the probe literature trains
// on, so the experiment runs its probes to convergence instead.
inline ProbeTrainOptions experiment_probe_options() {
  ProbeTrainOptions opts;
  opts.epochs = 60;
  opts.lr = 0.5;
  opts.batch_size = 8;
  return opts;
}

// Stratified 90/10 split by utterance, one probe per representation:
// pooled continuous features plus a quantized histogram per codebook.
// Features are standardized with train-split statistics before training.
std::vector<ProbeRow> speaker_probe_experiment(
    const std::vector<LabeledUtterance>& corpus,
    const std::vector<const Codebook*>& codebooks, std::uint64_t split_seed,
    const ProbeTrainOptions& opts = experiment_probe_options());

std::string format_probe_table(const std::vector<ProbeRow>& rows);
std::string format_probe_csv(const std::vector<ProbeRow>& rows);

}  // namespace unitcodec
