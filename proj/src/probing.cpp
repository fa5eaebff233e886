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

#include "unitcodec/probing.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "unitcodec/error.hpp"

namespace unitcodec {

std::vector<float> pool_continuous(const FeatureSequence& f) {
  if (f.n_frames == 0) {
    throw Error(ErrorCode::EmptySequence, "cannot pool an empty sequence");
  }
  std::vector<float> pooled(2 * f.dim);
  for (std::size_t d = 0; d < f.dim; ++d) {
    double mean = 0.0;
    for (std::size_t t = 0; t < f.n_frames; ++t) mean += f.frame(t)[d];
    mean /= static_cast<double>(f.n_frames);
    double var = 0.0;
    for (std::size_t t = 0; t < f.n_frames; ++t) {
      const double dv = f.frame(t)[d] - mean;
      var += dv * dv;
    }
    pooled[d] = static_cast<float>(mean);
    pooled[f.dim + d] =
        static_cast<float>(std::sqrt(var / static_cast<double>(f.n_frames)));
  }
  return pooled;
}

std::vector<float> pool_quantized(const UnitSequence& u) {
  if (u.units.empty()) {
    throw Error(ErrorCode::EmptySequence, "cannot pool an empty sequence");
  }
  std::vector<float> hist(u.vocab, 0.0f);
  for (auto unit : u.units) {
    if (unit >= u.vocab) {
      throw Error(ErrorCode::VocabMismatch, "unit out of vocabulary");
    }
    hist[unit] += 1.0f;
  }
  const auto inv = static_cast<float>(1.0 / static_cast<double>(u.units.size()));
  for (auto& h : hist) h *= inv;
  return hist;
}

Probe train_probe(const std::vector<std::vector<float>>& examples,
                  const std::vector<int>& labels,
                  const ProbeTrainOptions& opts) {
  if (examples.empty() || examples.size() != labels.size()) {
    throw Error(ErrorCode::InsufficientData, "need one label per example");
  }
  std::set<int> distinct(labels.begin(), labels.end());
  if (distinct.size() < 2) {
    throw Error(ErrorCode::DegenerateLabels, "need at least two classes");
  }
  int max_label = 0;
  for (int l : labels) {
    if (l < 0) throw Error(ErrorCode::DegenerateLabels, "negative label");
    max_label = std::max(max_label, l);
  }

  const std::size_t n = examples.size();
  const std::size_t dim = examples[0].size();
  for (const auto& x : examples) {
    if (x.size() != dim) {
      throw Error(ErrorCode::DimensionMismatch, "ragged example dimensions");
    }
  }
  const auto n_classes = static_cast<std::size_t>(max_label) + 1;

  Probe p;
  p.n_classes = n_classes;
  p.dim = dim;
  p.weights.assign(n_classes * dim, 0.0f);
  p.bias.assign(n_classes, 0.0f);
  p.meta.epochs = opts.epochs;
  p.meta.lr = opts.lr;
  p.meta.seed = opts.seed;

  std::mt19937_64 rng(opts.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::vector<double> logits(n_classes);
  std::vector<double> grad_w(n_classes * dim);
  std::vector<double> grad_b(n_classes);

  for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;

    for (std::size_t start = 0; start < n; start += opts.batch_size) {
      const std::size_t end = std::min(n, start + opts.batch_size);
      std::fill(grad_w.begin(), grad_w.end(), 0.0);
      std::fill(grad_b.begin(), grad_b.end(), 0.0);

      for (std::size_t i = start; i < end; ++i) {
        const auto& x = examples[order[i]];
        const int y = labels[order[i]];

        double max_logit = -1e300;
        for (std::size_t c = 0; c < n_classes; ++c) {
          double z = p.bias[c];
          const float* w = p.weights.data() + c * dim;
          for (std::size_t d = 0; d < dim; ++d) z += w[d] * x[d];
          logits[c] = z;
          max_logit = std::max(max_logit, z);
        }
        double denom = 0.0;
        for (std::size_t c = 0; c < n_classes; ++c) {
          logits[c] = std::exp(logits[c] - max_logit);
          denom += logits[c];
        }
        epoch_loss -= std::log(logits[static_cast<std::size_t>(y)] / denom);

        for (std::size_t c = 0; c < n_classes; ++c) {
          const double err =
              logits[c] / denom - (static_cast<int>(c) == y ? 1.0 : 0.0);
          grad_b[c] += err;
          double* gw = grad_w.data() + c * dim;
          for (std::size_t d = 0; d < dim; ++d) gw[d] += err * x[d];
        }
      }

      const double scale = opts.lr / static_cast<double>(end - start);
      for (std::size_t c = 0; c < n_classes; ++c) {
        p.bias[c] -= static_cast<float>(scale * grad_b[c]);
        float* w = p.weights.data() + c * dim;
        const double* gw = grad_w.data() + c * dim;
        for (std::size_t d = 0; d < dim; ++d) {
          w[d] -= static_cast<float>(scale * gw[d]);
        }
      }
    }
    p.meta.per_epoch_loss.push_back(epoch_loss / static_cast<double>(n));
  }
  p.meta.final_loss =
      p.meta.per_epoch_loss.empty() ? 0.0 : p.meta.per_epoch_loss.back();
  return p;
}

double eval_probe(const Probe& p, const std::vector<std::vector<float>>& examples,
                  const std::vector<int>& labels) {
  if (examples.empty() || examples.size() != labels.size()) {
    throw Error(ErrorCode::InsufficientData, "empty or mismatched test set");
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto& x = examples[i];
    if (x.size() != p.dim) {
      throw Error(ErrorCode::DimensionMismatch, "example dim != probe dim");
    }
    std::size_t best = 0;
    double best_z = -1e300;
    for (std::size_t c = 0; c < p.n_classes; ++c) {
      double z = p.bias[c];
      const float* w = p.weights.data() + c * p.dim;
      for (std::size_t d = 0; d < p.dim; ++d) z += w[d] * x[d];
      if (z > best_z) {  // strict: ties stay at the lowest index
        best_z = z;
        best = c;
      }
    }
    if (static_cast<int>(best) == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(examples.size());
}

namespace {

void standardize(std::vector<std::vector<float>>& train,
                 std::vector<std::vector<float>>& test) {
  if (train.empty()) return;
  const std::size_t dim = train[0].size();
  for (std::size_t d = 0; d < dim; ++d) {
    double mean = 0.0;
    for (const auto& x : train) mean += x[d];
    mean /= static_cast<double>(train.size());
    double var = 0.0;
    for (const auto& x : train) {
      const double dv = x[d] - mean;
      var += dv * dv;
    }
    // Relative variance floor keeps near-constant dimensions from being
    // amplified into noise.
    const double floor = 1e-6 * (1.0 + mean * mean);
    const double inv_std = 1.0 / std::sqrt(var / train.size() + floor);
    for (auto& x : train) {
      x[d] = static_cast<float>((x[d] - mean) * inv_std);
    }
    for (auto& x : test) {
      x[d] = static_cast<float>((x[d] - mean) * inv_std);
    }
  }
}

}  // namespace

std::vector<ProbeRow> speaker_probe_experiment(
    const std::vector<LabeledUtterance>& corpus,
    const std::vector<const Codebook*>& codebooks, std::uint64_t split_seed,
    const ProbeTrainOptions& opts) {
  std::map<int, std::vector<std::size_t>> by_speaker;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    by_speaker[corpus[i].speaker].push_back(i);
  }
  if (by_speaker.size() < 2) {
    throw Error(ErrorCode::InsufficientData, "need at least two speakers");
  }
  for (const auto& [speaker, utts] : by_speaker) {
    if (utts.size() < 10) {
      throw Error(ErrorCode::InsufficientData,
                  "speaker " + std::to_string(speaker) +
                      " has fewer than 10 utterances");
    }
  }

  // Stratified 90/10 split by utterance; speakers appear on both sides.
  std::mt19937_64 rng(split_seed);
  std::vector<std::size_t> train_idx, test_idx;
  for (auto& [speaker, utts] : by_speaker) {
    std::shuffle(utts.begin(), utts.end(), rng);
    const auto n_test = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(0.1 * utts.size())));
    for (std::size_t i = 0; i < utts.size(); ++i) {
      (i < n_test ? test_idx : train_idx).push_back(utts[i]);
    }
  }

  // Dense speaker labels in sorted-speaker order.
  std::map<int, int> label_of;
  for (const auto& [speaker, utts] : by_speaker) {
    label_of.emplace(speaker, static_cast<int>(label_of.size()));
  }
  auto labels_for = [&](const std::vector<std::size_t>& idx) {
    std::vector<int> labels;
    labels.reserve(idx.size());
    for (auto i : idx) labels.push_back(label_of.at(corpus[i].speaker));
    return labels;
  };
  const std::vector<int> train_labels = labels_for(train_idx);
  const std::vector<int> test_labels = labels_for(test_idx);

  std::vector<ProbeRow> rows;

  auto run_row = [&](const std::string& name, std::optional<std::size_t> vocab,
                     auto&& pool) {
    std::vector<std::vector<float>> train, test;
    train.reserve(train_idx.size());
    test.reserve(test_idx.size());
    for (auto i : train_idx) train.push_back(pool(corpus[i]));
    for (auto i : test_idx) test.push_back(pool(corpus[i]));
    standardize(train, test);
    ProbeTrainOptions row_opts = opts;
    row_opts.seed = opts.seed ^ split_seed;
    const Probe probe = train_probe(train, train_labels, row_opts);
    rows.push_back({name, vocab, eval_probe(probe, test, test_labels)});
  };

  run_row("continuous", std::nullopt, [](const LabeledUtterance& u) {
    return pool_continuous(u.features);
  });
  for (const Codebook* cb : codebooks) {
    run_row("quantized", cb->k, [cb](const LabeledUtterance& u) {
      return pool_quantized(quantize(u.features, *cb));
    });
  }
  return rows;
}

std::string format_probe_table(const std::vector<ProbeRow>& rows) {
  std::ostringstream out;
  out << "representation  vocab  accuracy\n";
  for (const auto& r : rows) {
    char line[80];
    std::snprintf(line, sizeof(line), "%-14s  %5s  %8.4f\n",
                  r.representation.c_str(),
                  r.vocab ? std::to_string(*r.vocab).c_str() : "-",
                  r.accuracy);
    out << line;
  }
  return out.str();
}

std::string format_probe_csv(const std::vector<ProbeRow>& rows) {
  std::ostringstream out;
  out << "representation,vocab,accuracy\n";
  for (const auto& r : rows) {
    out << r.representation << ','
        << (r.vocab ? std::to_string(*r.vocab) : "") << ',' << r.accuracy
        << "\n";
  }
  return out.str();
}

}  // namespace unitcodec
