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

#include "unitcodec/unit_lm.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "unitcodec/error.hpp"

namespace unitcodec {

namespace {

std::uint64_t count_of(const NGramModel::ContextCounts& cc, std::uint16_t target) {
  const auto it = std::lower_bound(
      cc.counts.begin(), cc.counts.end(), target,
      [](const auto& pair, std::uint16_t t) { return pair.first < t; });
  if (it != cc.counts.end() && it->first == target) return it->second;
  return 0;
}

void shift_context(std::vector<std::uint16_t>& ctx, std::uint16_t symbol) {
  if (ctx.empty()) return;
  for (std::size_t i = 0; i + 1 < ctx.size(); ++i) ctx[i] = ctx[i + 1];
  ctx.back() = symbol;
}

std::vector<std::uint16_t> context_from_prompt(
    const NGramModel& m, const std::vector<std::uint32_t>& prompt) {
  std::vector<std::uint16_t> ctx(m.order - 1, m.boundary());
  for (auto u : prompt) {
    if (u >= m.vocab) {
      throw Error(ErrorCode::VocabMismatch,
                  "prompt unit " + std::to_string(u) + " out of vocabulary");
    }
    shift_context(ctx, static_cast<std::uint16_t>(u));
  }
  return ctx;
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

double NGramModel::prob(const std::vector<std::uint16_t>& context,
                        std::uint16_t target) const {
  const double outcomes = static_cast<double>(vocab) + 1.0;
  const auto it = table.find(context);
  const std::uint64_t ctx_total = it == table.end() ? 0 : it->second.total;
  const std::uint64_t c =
      it == table.end() ? 0 : count_of(it->second, target);
  const double denom =
      static_cast<double>(ctx_total) + smoothing_k * outcomes;
  if (denom <= 0.0) return 1.0 / outcomes;  // k == 0 and unseen context
  return (static_cast<double>(c) + smoothing_k) / denom;
}

NGramModel train_ngram(const std::vector<std::vector<std::uint32_t>>& corpus,
                       std::size_t order, std::size_t vocab,
                       double smoothing_k) {
  if (corpus.empty()) {
    throw Error(ErrorCode::EmptyCorpus, "ngram training needs streams");
  }
  if (order < 1) throw Error(ErrorCode::InvalidArgument, "order must be >= 1");
  if (vocab < 1 || vocab >= 0xffff) {
    throw Error(ErrorCode::InvalidArgument, "vocab must be in [1, 65534]");
  }
  if (smoothing_k < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "smoothing_k must be >= 0");
  }

  NGramModel m;
  m.order = order;
  m.vocab = vocab;
  m.smoothing_k = smoothing_k;

  std::map<std::vector<std::uint16_t>, std::map<std::uint16_t, std::uint64_t>>
      raw;
  for (const auto& stream : corpus) {
    std::vector<std::uint16_t> ctx(order - 1, m.boundary());
    for (auto u : stream) {
      if (u >= vocab) {
        throw Error(ErrorCode::VocabMismatch,
                    "unit " + std::to_string(u) + " out of vocabulary");
      }
      ++raw[ctx][static_cast<std::uint16_t>(u)];
      shift_context(ctx, static_cast<std::uint16_t>(u));
    }
    ++raw[ctx][m.boundary()];  // end of sequence
  }

  for (auto& [ctx, counts] : raw) {
    NGramModel::ContextCounts cc;
    for (const auto& [target, count] : counts) {
      cc.counts.emplace_back(target, count);
      cc.total += count;
    }
    m.table.emplace(ctx, std::move(cc));
  }
  return m;
}

double perplexity(const NGramModel& m, const std::vector<std::uint32_t>& stream) {
  std::vector<std::uint16_t> ctx(m.order - 1, m.boundary());
  double nll = 0.0;
  std::size_t tokens = 0;
  for (auto u : stream) {
    if (u >= m.vocab) {
      throw Error(ErrorCode::VocabMismatch,
                  "unit " + std::to_string(u) + " out of vocabulary");
    }
    nll -= std::log(m.prob(ctx, static_cast<std::uint16_t>(u)));
    ++tokens;
    shift_context(ctx, static_cast<std::uint16_t>(u));
  }
  nll -= std::log(m.prob(ctx, m.boundary()));
  ++tokens;
  return std::exp(nll / static_cast<double>(tokens));
}

std::vector<std::uint32_t> sample_continuation(
    const NGramModel& m, const std::vector<std::uint32_t>& prompt,
    const SamplingOptions& opts) {
  if (opts.temperature < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "temperature must be >= 0");
  }
  std::vector<std::uint16_t> ctx = context_from_prompt(m, prompt);
  std::mt19937_64 rng(opts.seed);
  const std::size_t outcomes = m.vocab + 1;
  std::vector<double> p(outcomes);

  std::vector<std::uint32_t> output;
  for (std::size_t step = 0; step < opts.max_len; ++step) {
    for (std::size_t t = 0; t < outcomes; ++t) {
      p[t] = m.prob(ctx, static_cast<std::uint16_t>(t));
    }

    std::uint16_t sampled;
    if (opts.temperature < 1e-9) {
      // Greedy limit: argmax, ties to the smallest index.
      std::size_t best = 0;
      for (std::size_t t = 1; t < outcomes; ++t) {
        if (p[t] > p[best]) best = t;
      }
      sampled = static_cast<std::uint16_t>(best);
    } else {
      // P^(1/T), renormalized in log space.
      double max_lp = -1e300;
      for (std::size_t t = 0; t < outcomes; ++t) {
        p[t] = std::log(p[t]) / opts.temperature;
        max_lp = std::max(max_lp, p[t]);
      }
      double total = 0.0;
      for (std::size_t t = 0; t < outcomes; ++t) {
        p[t] = std::exp(p[t] - max_lp);
        total += p[t];
      }
      const double r = uniform01(rng) * total;
      double acc = 0.0;
      std::size_t pick = outcomes - 1;
      for (std::size_t t = 0; t < outcomes; ++t) {
        acc += p[t];
        if (acc >= r) {
          pick = t;
          break;
        }
      }
      sampled = static_cast<std::uint16_t>(pick);
    }

    if (sampled == m.boundary()) break;
    output.push_back(sampled);
    shift_context(ctx, sampled);
  }
  return output;
}

std::vector<std::uint32_t> learn_unit_durations(
    const std::vector<EncodedUtterance>& corpus, std::size_t vocab) {
  std::vector<std::vector<std::uint32_t>> per_unit(vocab);
  for (const auto& e : corpus) {
    for (std::size_t s = 0; s < e.n_segments(); ++s) {
      if (e.units[s] < vocab) per_unit[e.units[s]].push_back(e.durations[s]);
    }
  }
  std::vector<std::uint32_t> medians(vocab, 2);  // fallback for unseen units
  for (std::size_t u = 0; u < vocab; ++u) {
    if (per_unit[u].empty()) continue;
    auto& durations = per_unit[u];
    std::sort(durations.begin(), durations.end());
    medians[u] = durations[(durations.size() - 1) / 2];
  }
  return medians;
}

Waveform continue_speech(const Waveform& w, const Codebook& cb,
                         const NGramModel& m,
                         const std::vector<std::uint32_t>& unit_durations,
                         const FeatureConfig& cfg,
                         const SynthesisConfig& cfg_synth,
                         const SamplingOptions& sampling) {
  if (m.vocab != cb.k) {
    throw Error(ErrorCode::VocabMismatch, "model vocab != codebook K");
  }
  if (unit_durations.size() != cb.k) {
    throw Error(ErrorCode::VocabMismatch, "duration table size != codebook K");
  }

  const FeatureSequence features = log_mel(w, cfg);
  const UnitSequence units = quantize(features, cb);
  EncodedUtterance prompt = dedup(units);

  const auto continuation =
      sample_continuation(m, prompt.units, sampling);

  for (auto u : continuation) {
    const std::uint32_t duration = std::max<std::uint32_t>(1, unit_durations[u]);
    if (!prompt.units.empty() && prompt.units.back() == u) {
      prompt.durations.back() += duration;  // keep the dedup invariant
    } else {
      prompt.units.push_back(u);
      prompt.durations.push_back(duration);
      prompt.pitch.push_back(0.0f);
      prompt.pitch_voiced.push_back(0);
    }
  }

  const FeatureSequence reconstructed = units_to_features(prompt, cb);
  const MagnitudeSpectrogram linear =
      mel_to_linear(reconstructed, cfg, cfg_synth.nnls_iters);
  GriffinLimResult gl = griffin_lim(linear, cfg, cfg_synth);
  gl.audio.samples.resize(reconstructed.n_frames * cfg.hop(), 0.0f);
  return gl.audio;
}

void save_ngram(const NGramModel& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot create " + path);

  out.write("TLLM", 4);
  const auto order = static_cast<std::uint32_t>(m.order);
  const auto vocab = static_cast<std::uint32_t>(m.vocab);
  out.write(reinterpret_cast<const char*>(&order), 4);
  out.write(reinterpret_cast<const char*>(&vocab), 4);
  out.write(reinterpret_cast<const char*>(&m.smoothing_k), 8);

  std::uint64_t n_triples = 0;
  for (const auto& [ctx, cc] : m.table) n_triples += cc.counts.size();
  out.write(reinterpret_cast<const char*>(&n_triples), 8);

  for (const auto& [ctx, cc] : m.table) {
    for (const auto& [target, count] : cc.counts) {
      out.write(reinterpret_cast<const char*>(ctx.data()),
                static_cast<std::streamsize>(ctx.size() * 2));
      out.write(reinterpret_cast<const char*>(&target), 2);
      out.write(reinterpret_cast<const char*>(&count), 8);
    }
  }
  if (!out) throw Error(ErrorCode::IoError, "write failure on " + path);
}

NGramModel load_ngram(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);

  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "TLLM", 4) != 0) {
    throw Error(ErrorCode::BadMagic, path + " is not a TLLM file");
  }
  std::uint32_t order = 0, vocab = 0;
  double smoothing_k = 0.0;
  std::uint64_t n_triples = 0;
  if (!in.read(reinterpret_cast<char*>(&order), 4) ||
      !in.read(reinterpret_cast<char*>(&vocab), 4) ||
      !in.read(reinterpret_cast<char*>(&smoothing_k), 8) ||
      !in.read(reinterpret_cast<char*>(&n_triples), 8)) {
    throw Error(ErrorCode::TruncatedFile, path + ": truncated TLLM header");
  }

  NGramModel m;
  m.order = order;
  m.vocab = vocab;
  m.smoothing_k = smoothing_k;

  std::vector<std::uint16_t> ctx(order - 1);
  for (std::uint64_t i = 0; i < n_triples; ++i) {
    std::uint16_t target = 0;
    std::uint64_t count = 0;
    if (!in.read(reinterpret_cast<char*>(ctx.data()),
                 static_cast<std::streamsize>(ctx.size() * 2)) ||
        !in.read(reinterpret_cast<char*>(&target), 2) ||
        !in.read(reinterpret_cast<char*>(&count), 8)) {
      throw Error(ErrorCode::TruncatedFile, path + ": truncated TLLM triples");
    }
    auto& cc = m.table[ctx];
    cc.counts.emplace_back(target, count);
    cc.total += count;
  }
  return m;
}

}  // namespace unitcodec
