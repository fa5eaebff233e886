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

#include <chrono>
#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "unitcodec/error.hpp"
#include "unitcodec/synth.hpp"

using namespace unitcodec;
using testutil::TempDir;

namespace {

using Stream = std::vector<std::uint32_t>;

}  // namespace

TEST_CASE("train_ngram: hand-counted bigram table") {
  // Corpus "0 1 0 1", order 2, k -> 0.
  const NGramModel m = train_ngram({{0, 1, 0, 1}}, 2, 2, 1e-12);

  // After 0 the corpus always continues with 1.
  CHECK(m.prob({0}, 1) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(m.prob({0}, 0) == doctest::Approx(0.0).epsilon(1e-9));
  // After 1: one continuation 0, one end-of-sequence.
  CHECK(m.prob({1}, 0) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(m.prob({1}, m.boundary()) == doctest::Approx(0.5).epsilon(1e-9));
  // Sequence start: always 0.
  CHECK(m.prob({m.boundary()}, 0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("train_ngram: order 1 matches the codec's unigram up to sentinels") {
  const Stream s = {0, 1, 0, 2, 0, 1, 0, 2, 0, 1};
  const NGramModel m = train_ngram({s}, 1, 3, 0.0);

  // 11 events: 10 units + EOS. Unigram over units: 5/10, 3/10, 2/10.
  CHECK(m.prob({}, 0) == doctest::Approx(5.0 / 11.0).epsilon(1e-9));
  CHECK(m.prob({}, 1) == doctest::Approx(3.0 / 11.0).epsilon(1e-9));
  CHECK(m.prob({}, 2) == doctest::Approx(2.0 / 11.0).epsilon(1e-9));
  CHECK(m.prob({}, m.boundary()) == doctest::Approx(1.0 / 11.0).epsilon(1e-9));
}

TEST_CASE("train_ngram: positive smoothing makes every conditional positive") {
  const NGramModel m = train_ngram({{0, 1, 2}}, 2, 4, 0.1);
  for (std::uint16_t ctx_sym = 0; ctx_sym <= 4; ++ctx_sym) {
    double total = 0.0;
    for (std::uint16_t t = 0; t <= 4; ++t) {
      const double p = m.prob({ctx_sym}, t);
      CHECK(p > 0.0);
      total += p;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("train_ngram: empty corpus") {
  try {
    train_ngram({}, 2, 4, 0.1);
    FAIL("expected EmptyCorpus");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyCorpus);
  }
}

TEST_CASE("perplexity: uniform limit approaches K+1") {
  const NGramModel m = train_ngram({{0, 1}}, 1, 7, 1e9);
  const double ppl = perplexity(m, {0, 1, 2, 3});
  CHECK(ppl == doctest::Approx(8.0).epsilon(1e-3));
}

TEST_CASE("perplexity: training data beats the uniform model") {
  std::mt19937_64 rng(8);
  Stream s;
  for (int i = 0; i < 200; ++i) {
    s.push_back(static_cast<std::uint32_t>(testutil::uniform01(rng) * 3.0));
  }
  const NGramModel trained = train_ngram({s}, 3, 5, 0.1);
  const NGramModel uniform = train_ngram({s}, 3, 5, 1e9);
  CHECK(perplexity(trained, s) <= perplexity(uniform, s));
}

TEST_CASE("perplexity: deterministic pattern approaches 1 with high order") {
  Stream s;
  for (int i = 0; i < 120; ++i) s.push_back(static_cast<std::uint32_t>(i % 4));
  const NGramModel m = train_ngram({s, s, s, s}, 4, 4, 1e-6);
  CHECK(perplexity(m, s) == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("perplexity: higher order never hurts on fully-observed corpora") {
  // Pattern 0,1,0,2: ambiguous after a lone 0, deterministic with two
  // symbols of context.
  const std::uint32_t pattern[4] = {0, 1, 0, 2};
  Stream s;
  for (int i = 0; i < 120; ++i) s.push_back(pattern[i % 4]);
  const double p1 = perplexity(train_ngram({s}, 1, 3, 0.01), s);
  const double p2 = perplexity(train_ngram({s}, 2, 3, 0.01), s);
  const double p3 = perplexity(train_ngram({s}, 3, 3, 0.01), s);
  CHECK(p2 <= p1 + 1e-9);
  CHECK(p3 <= p2 + 1e-9);
}

TEST_CASE("sample_continuation: deterministic per seed, varied across seeds") {
  std::mt19937_64 rng(10);
  std::vector<Stream> corpus;
  for (int i = 0; i < 20; ++i) {
    Stream s;
    for (int t = 0; t < 50; ++t) {
      s.push_back(static_cast<std::uint32_t>(testutil::uniform01(rng) * 8.0));
    }
    corpus.push_back(std::move(s));
  }
  const NGramModel m = train_ngram(corpus, 3, 8, 0.1);
  const Stream prompt = {1, 2, 3};

  SamplingOptions opts;
  opts.max_len = 30;
  opts.seed = 7;
  const auto a = sample_continuation(m, prompt, opts);
  const auto b = sample_continuation(m, prompt, opts);
  CHECK(a == b);

  std::set<Stream> distinct;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SamplingOptions o;
    o.max_len = 30;
    o.seed = seed;
    distinct.insert(sample_continuation(m, prompt, o));
  }
  CHECK(distinct.size() >= 2);
}

TEST_CASE("sample_continuation: temperature zero equals explicit argmax") {
  const NGramModel m =
      train_ngram({{0, 1, 2, 0, 1, 2, 0, 1}, {1, 2, 0, 1, 2}}, 2, 3, 0.05);
  const Stream prompt = {0};

  SamplingOptions greedy;
  greedy.temperature = 0.0;
  greedy.max_len = 20;
  const auto sampled = sample_continuation(m, prompt, greedy);

  // Reference argmax decoding.
  Stream expect;
  std::vector<std::uint16_t> ctx = {0};
  for (std::size_t step = 0; step < 20; ++step) {
    std::uint16_t best = 0;
    double best_p = -1.0;
    for (std::uint16_t t = 0; t <= 3; ++t) {
      const double p = m.prob(ctx, t);
      if (p > best_p) {
        best_p = p;
        best = t;
      }
    }
    if (best == m.boundary()) break;
    expect.push_back(best);
    ctx[0] = best;
  }
  CHECK(sampled == expect);
}

TEST_CASE("sample_continuation: empirical frequencies match conditionals") {
  const NGramModel m =
      train_ngram({{0, 1, 0, 2, 0, 1, 0, 2, 0, 0}}, 2, 3, 0.2);
  const Stream prompt = {0};

  // Exact conditional after context [0].
  std::vector<double> expect(4);
  for (std::uint16_t t = 0; t <= 3; ++t) expect[t] = m.prob({0}, t);

  const std::size_t draws = 100000;
  std::vector<std::size_t> counts(4, 0);
  for (std::size_t seed = 0; seed < draws; ++seed) {
    SamplingOptions o;
    o.max_len = 1;
    o.seed = seed;
    const auto out = sample_continuation(m, prompt, o);
    ++counts[out.empty() ? 3 : out[0]];
  }
  for (std::size_t t = 0; t < 4; ++t) {
    const double p = expect[t];
    const double sigma = std::sqrt(p * (1.0 - p) / draws);
    CHECK(std::abs(counts[t] / static_cast<double>(draws) - p) <=
          3.0 * sigma + 1e-12);
  }
}

TEST_CASE("sampling never leaves the vocabulary") {
  std::mt19937_64 rng(3);
  Stream s;
  for (int i = 0; i < 100; ++i) {
    s.push_back(static_cast<std::uint32_t>(testutil::uniform01(rng) * 5.0));
  }
  const NGramModel m = train_ngram({s}, 2, 5, 0.5);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    SamplingOptions o;
    o.seed = seed;
    o.max_len = 64;
    for (auto u : sample_continuation(m, {0, 1}, o)) CHECK(u < 5);
  }
}

TEST_CASE("learn_unit_durations: medians with fallback") {
  EncodedUtterance e;
  e.vocab = 4;
  e.frame_rate = 50.0;
  e.units = {0, 1, 0, 1, 0};
  e.durations = {1, 10, 3, 20, 5};
  e.pitch.assign(5, 0.0f);
  e.pitch_voiced.assign(5, 0);

  const auto durations = learn_unit_durations({e}, 4);
  REQUIRE(durations.size() == 4);
  CHECK(durations[0] == 3);   // median of {1, 3, 5}
  CHECK(durations[1] == 10);  // lower median of {10, 20}
  CHECK(durations[2] == 2);   // unseen -> fallback
  CHECK(durations[3] == 2);
}

TEST_CASE("TLLM: save/load round-trip preserves the distribution") {
  TempDir tmp("tllm");
  std::mt19937_64 rng(9);
  std::vector<Stream> corpus;
  for (int i = 0; i < 10; ++i) {
    Stream s;
    for (int t = 0; t < 40; ++t) {
      s.push_back(static_cast<std::uint32_t>(testutil::uniform01(rng) * 6.0));
    }
    corpus.push_back(std::move(s));
  }
  const NGramModel m = train_ngram(corpus, 3, 6, 0.1);
  save_ngram(m, tmp.file("m.tllm"));
  const NGramModel back = load_ngram(tmp.file("m.tllm"));

  CHECK(back.order == m.order);
  CHECK(back.vocab == m.vocab);
  CHECK(back.smoothing_k == m.smoothing_k);
  CHECK(back.table.size() == m.table.size());
  CHECK(perplexity(back, corpus[0]) == doctest::Approx(perplexity(m, corpus[0])));

  // Same seed, same continuation.
  SamplingOptions o;
  o.seed = 123;
  CHECK(sample_continuation(back, {0, 1}, o) ==
        sample_continuation(m, {0, 1}, o));
}

TEST_CASE("TLLM: bad magic") {
  TempDir tmp("tllm_bad");
  std::ofstream(tmp.file("x.tllm"), std::ios::binary) << "WXYZ1234";
  CHECK_THROWS_AS(load_ngram(tmp.file("x.tllm")), Error);
}

TEST_CASE("continue_speech: output extends the prompt deterministically") {
  const FeatureConfig cfg = feature_preset_50hz();

  std::vector<float> pool;
  for (int i = 0; i < 4; ++i) {
    const auto f = log_mel(make_speech_like(16000, 1.0, {}, 40 + i), cfg);
    pool.insert(pool.end(), f.data.begin(), f.data.end());
  }
  KmeansOptions kopts;
  kopts.seed = 2;
  kopts.feature_fingerprint = feature_fingerprint(cfg);
  const Codebook cb = kmeans_train(pool, cfg.n_mels, 12, kopts);

  // LM corpus from real encodings.
  std::vector<Stream> streams;
  std::vector<EncodedUtterance> encoded;
  for (int i = 0; i < 4; ++i) {
    const auto f = log_mel(make_speech_like(16000, 1.0, {}, 40 + i), cfg);
    encoded.push_back(dedup(quantize(f, cb)));
    streams.push_back(encoded.back().units);
  }
  const NGramModel m = train_ngram(streams, 3, cb.k, 0.1);
  const auto durations = learn_unit_durations(encoded, cb.k);

  const Waveform prompt = make_speech_like(16000, 0.8, {}, 99);
  SynthesisConfig synth;
  synth.griffin_lim_iters = 8;
  SamplingOptions sampling;
  sampling.seed = 5;
  sampling.max_len = 20;

  const Waveform a =
      continue_speech(prompt, cb, m, durations, cfg, synth, sampling);
  const Waveform b =
      continue_speech(prompt, cb, m, durations, cfg, synth, sampling);
  CHECK(a.samples == b.samples);

  const Waveform resynth_only = resynthesize(prompt, cb, cfg, synth);
  CHECK(a.samples.size() > resynth_only.samples.size());
  for (float s : a.samples) CHECK(std::isfinite(s));
}

TEST_CASE("continue_speech: 2 s prompt finishes inside the time budget") {
  const FeatureConfig cfg = feature_preset_50hz();
  std::vector<float> pool;
  std::vector<Stream> streams;
  std::vector<EncodedUtterance> encoded;
  for (int i = 0; i < 3; ++i) {
    const auto f = log_mel(make_speech_like(16000, 1.5, {}, 70 + i), cfg);
    pool.insert(pool.end(), f.data.begin(), f.data.end());
  }
  KmeansOptions kopts;
  kopts.seed = 1;
  kopts.feature_fingerprint = feature_fingerprint(cfg);
  const Codebook cb = kmeans_train(pool, cfg.n_mels, 16, kopts);
  for (int i = 0; i < 3; ++i) {
    const auto f = log_mel(make_speech_like(16000, 1.5, {}, 70 + i), cfg);
    encoded.push_back(dedup(quantize(f, cb)));
    streams.push_back(encoded.back().units);
  }
  const NGramModel m = train_ngram(streams, 3, cb.k, 0.1);
  const auto durations = learn_unit_durations(encoded, cb.k);

  const Waveform prompt = make_speech_like(16000, 2.0, {}, 500);
  SamplingOptions sampling;
  sampling.seed = 3;
  sampling.max_len = 40;

  const auto start = std::chrono::steady_clock::now();
  const Waveform out = continue_speech(prompt, cb, m, durations, cfg, {},
                                       sampling);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  CHECK(out.samples.size() > 0);
  CHECK(elapsed < 10.0);
}
