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

#include "unitcodec/codec.hpp"

#include <cmath>
#include <cstring>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "unitcodec/bitio.hpp"
#include "unitcodec/error.hpp"

using namespace unitcodec;
using testutil::TempDir;

namespace {

EncodedUtterance make_utterance(std::mt19937_64& rng, std::size_t vocab,
                                std::size_t max_segments = 40,
                                double pitch_range = 1.4) {
  EncodedUtterance e;
  e.vocab = vocab;
  e.frame_rate = 50.0;
  const auto n = static_cast<std::size_t>(testutil::uniform01(rng) * max_segments);
  std::uint32_t prev = vocab;  // out-of-range sentinel
  for (std::size_t s = 0; s < n; ++s) {
    std::uint32_t u;
    do {
      u = static_cast<std::uint32_t>(testutil::uniform01(rng) * vocab);
    } while (u == prev);
    prev = u;
    e.units.push_back(u);
    e.durations.push_back(
        1 + static_cast<std::uint32_t>(testutil::uniform01(rng) * 30));
    const bool voiced = testutil::uniform01(rng) < 0.7;
    e.pitch_voiced.push_back(voiced ? 1 : 0);
    e.pitch.push_back(voiced ? static_cast<float>((2.0 * testutil::uniform01(rng) -
                                                   1.0) * pitch_range)
                             : 0.0f);
  }
  return e;
}

UnigramModel model_from_probs(std::vector<double> probs) {
  UnigramModel m;
  m.probs = std::move(probs);
  m.support_count.assign(m.probs.size(), 1);
  m.total = m.probs.size();
  m.smoothing_k = 0.0;
  return m;
}

EncodedUtterance corpus_line(std::vector<std::uint32_t> units, std::size_t vocab) {
  EncodedUtterance e;
  e.vocab = vocab;
  e.frame_rate = 50.0;
  for (auto u : units) {
    e.units.push_back(u);
    e.durations.push_back(1);
    e.pitch.push_back(0.0f);
    e.pitch_voiced.push_back(0);
  }
  return e;
}

}  // namespace

TEST_CASE("bit I/O: MSB-first packing round-trips") {
  BitWriter w;
  w.put(0b101, 3);
  w.put(0b0110, 4);
  w.put(0xabcd, 16);
  const auto bytes = w.bytes();
  BitReader r(bytes.data(), bytes.size());
  CHECK(r.get(3) == 0b101);
  CHECK(r.get(4) == 0b0110);
  CHECK(r.get(16) == 0xabcd);
}

TEST_CASE("bit I/O: reading past the end throws TruncatedPayload") {
  BitWriter w;
  w.put(0xff, 8);
  const auto bytes = w.bytes();
  BitReader r(bytes.data(), bytes.size());
  r.get(8);
  CHECK_THROWS_AS(r.get_bit(), Error);
}

TEST_CASE("elias gamma: known codewords and round-trip") {
  // 1 -> "1", 2 -> "010", 5 -> "00101".
  BitWriter w;
  put_elias_gamma(w, 1);
  put_elias_gamma(w, 2);
  put_elias_gamma(w, 5);
  CHECK(w.bit_count() == 1 + 3 + 5);

  const auto bytes = w.bytes();
  BitReader r(bytes.data(), bytes.size());
  CHECK(get_elias_gamma(r) == 1);
  CHECK(get_elias_gamma(r) == 2);
  CHECK(get_elias_gamma(r) == 5);

  std::mt19937_64 rng(11);
  BitWriter w2;
  std::vector<std::uint64_t> values;
  for (int i = 0; i < 500; ++i) {
    values.push_back(1 + static_cast<std::uint64_t>(testutil::uniform01(rng) *
                                                    100000.0));
    put_elias_gamma(w2, values.back());
  }
  const auto bytes2 = w2.bytes();
  BitReader r2(bytes2.data(), bytes2.size());
  for (auto v : values) CHECK(get_elias_gamma(r2) == v);
}

TEST_CASE("fit_unigram: add-k formula on a tiny corpus") {
  // Counts (4, 0) over K=2 with k=0.5: P = (4.5/5, 0.5/5).
  EncodedUtterance only_zero;
  only_zero.vocab = 2;
  only_zero.frame_rate = 50.0;
  only_zero.units = {0};
  only_zero.durations = {4};
  only_zero.pitch = {0.0f};
  only_zero.pitch_voiced = {0};

  std::vector<EncodedUtterance> corpus(4, only_zero);
  const UnigramModel m = fit_unigram(corpus, 0.5);
  CHECK(m.total == 4);
  CHECK(m.probs[0] == doctest::Approx(4.5 / 5.0).epsilon(1e-12));
  CHECK(m.probs[1] == doctest::Approx(0.5 / 5.0).epsilon(1e-12));
}

TEST_CASE("fit_unigram: uniform corpus gives 1/K") {
  const auto e = corpus_line({0, 1, 2, 3}, 4);
  const UnigramModel m = fit_unigram({e}, 0.5);
  for (double p : m.probs) CHECK(p == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("fit_unigram: k -> 0 converges to relative frequencies") {
  const auto e = corpus_line({0, 1, 0, 2, 0, 1, 0, 2, 0, 1}, 3);
  const UnigramModel m = fit_unigram({e}, 1e-9);
  CHECK(m.probs[0] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(m.probs[1] == doctest::Approx(0.3).epsilon(1e-6));
  CHECK(m.probs[2] == doctest::Approx(0.2).epsilon(1e-6));
}

TEST_CASE("fit_unigram: empty corpus") {
  try {
    fit_unigram({}, 0.5);
    FAIL("expected EmptyCorpus");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyCorpus);
  }
}

TEST_CASE("bitrate_fixed: formula cases") {
  CHECK(bitrate_fixed(25, 1.0, 100) == doctest::Approx(175.0).epsilon(1e-12));
  CHECK(bitrate_fixed(0, 1.0, 100) == doctest::Approx(0.0));
  CHECK(bitrate_fixed(12, 2.0, 256) == doctest::Approx(8.0 * 12 / 2.0));
  CHECK_THROWS_AS(bitrate_fixed(1, 0.0, 100), Error);
}

TEST_CASE("bitrate_entropy: formula cases") {
  SUBCASE("uniform model hits (n/l) log2 K") {
    const UnigramModel m = model_from_probs(std::vector<double>(8, 0.125));
    CHECK(bitrate_entropy(100, 2.0, m) ==
          doctest::Approx(50.0 * 3.0).epsilon(1e-12));
  }
  SUBCASE("near-degenerate model approaches zero") {
    UnigramModel m = model_from_probs({1.0 - 2e-12, 1e-12, 1e-12});
    CHECK(bitrate_entropy(100, 1.0, m) < 1e-8);
  }
  SUBCASE("hand-computed entropy") {
    const UnigramModel m = model_from_probs({0.5, 0.25, 0.25});
    CHECK(bitrate_entropy(100, 2.0, m) == doctest::Approx(75.0).epsilon(1e-12));
  }
}

TEST_CASE("Gibbs bound: entropy bitrate never exceeds fixed bitrate") {
  std::mt19937_64 rng(2718);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 2 + static_cast<std::size_t>(
                                  testutil::uniform01(rng) * 300);
    std::vector<double> probs(k);
    double total = 0.0;
    for (auto& p : probs) {
      p = testutil::uniform01(rng) + 1e-6;
      total += p;
    }
    for (auto& p : probs) p /= total;
    const UnigramModel m = model_from_probs(probs);
    CHECK(bitrate_entropy(1000, 7.0, m) <=
          bitrate_fixed(1000, 7.0, k) + 1e-9);
  }
}

TEST_CASE("huffman: expected length sits in [H, H+1)") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = 2 + static_cast<std::size_t>(
                                  testutil::uniform01(rng) * 200);
    std::vector<double> probs(k);
    double total = 0.0;
    for (auto& p : probs) {
      p = std::pow(testutil::uniform01(rng), 3.0) + 1e-9;
      total += p;
    }
    for (auto& p : probs) p /= total;

    const UnigramModel m = model_from_probs(probs);
    const HuffmanCode code = build_huffman(probs);
    const double expected = code.expected_length(probs);
    const double h = entropy_bits(m);
    CHECK(expected >= h - 1e-9);
    CHECK(expected < h + 1.0);
  }
}

TEST_CASE("huffman: codes are prefix-free and complete (Kraft sum 1)") {
  std::mt19937_64 rng(7);
  std::vector<double> probs(37);
  double total = 0.0;
  for (auto& p : probs) {
    p = testutil::uniform01(rng) + 1e-9;
    total += p;
  }
  for (auto& p : probs) p /= total;
  const HuffmanCode code = build_huffman(probs);

  double kraft = 0.0;
  for (auto len : code.lengths) kraft += std::pow(2.0, -double(len));
  CHECK(kraft == doctest::Approx(1.0).epsilon(1e-12));

  // No code is a prefix of another.
  for (std::size_t a = 0; a < probs.size(); ++a) {
    for (std::size_t b = 0; b < probs.size(); ++b) {
      if (a == b || code.lengths[a] > code.lengths[b]) continue;
      const auto shifted = code.codes[b] >> (code.lengths[b] - code.lengths[a]);
      CHECK((a == b || shifted != code.codes[a]));
    }
  }
}

TEST_CASE("bitstream: fixed-width payload size is exact") {
  EncodedUtterance e;
  e.vocab = 4;
  e.frame_rate = 50.0;
  e.units = {0, 1, 2};
  e.durations = {1, 1, 1};
  e.pitch = {0, 0, 0};
  e.pitch_voiced = {0, 0, 0};
  const Bitstream b = encode_bitstream(e, nullptr, false);
  CHECK(b.stats.unit_bits == 6);  // 3 units x 2 bits
  CHECK(b.stats.duration_bits == 3);  // three gamma-coded 1s
  CHECK(b.payload.size() == 2);  // 9 bits padded to 2 bytes
}

TEST_CASE("bitstream: round-trip, fixed and entropy modes") {
  std::mt19937_64 rng(424242);
  const std::size_t vocab = 37;

  std::vector<EncodedUtterance> corpus;
  for (int i = 0; i < 50; ++i) corpus.push_back(make_utterance(rng, vocab));
  while (corpus.back().n_segments() == 0) corpus.pop_back();
  const UnigramModel m = fit_unigram(corpus, 0.5);

  for (int trial = 0; trial < 200; ++trial) {
    const EncodedUtterance e = make_utterance(rng, vocab);
    for (const bool entropy : {false, true}) {
      const Bitstream b = encode_bitstream(e, entropy ? &m : nullptr, true);
      const EncodedUtterance back = decode_bitstream(b, entropy ? &m : nullptr);
      CHECK(back.units == e.units);
      CHECK(back.durations == e.durations);
      CHECK(back.pitch_voiced == e.pitch_voiced);
      REQUIRE(back.pitch.size() == e.pitch.size());
      for (std::size_t s = 0; s < e.pitch.size(); ++s) {
        if (e.pitch_voiced[s]) {
          CHECK(std::abs(back.pitch[s] - e.pitch[s]) <= kPitchStep);
        }
      }
    }
  }
}

TEST_CASE("bitstream: out-of-range pitch clamps and counts") {
  EncodedUtterance e;
  e.vocab = 4;
  e.frame_rate = 50.0;
  e.units = {0, 1};
  e.durations = {1, 1};
  e.pitch = {2.5f, -3.0f};
  e.pitch_voiced = {1, 1};
  const Bitstream b = encode_bitstream(e, nullptr, true);
  CHECK(b.stats.pitch_clamped == 2);
  const auto back = decode_bitstream(b);
  CHECK(back.pitch[0] == doctest::Approx(kPitchHi));
  CHECK(back.pitch[1] == doctest::Approx(kPitchLo));
}

TEST_CASE("bitstream: header and model error paths") {
  std::mt19937_64 rng(5);
  const auto e = make_utterance(rng, 16);
  const auto corpus = std::vector<EncodedUtterance>{corpus_line({0, 1, 2}, 16)};
  const UnigramModel m = fit_unigram(corpus, 0.5);

  SUBCASE("bad magic") {
    auto bytes = serialize_bitstream(encode_bitstream(e));
    bytes[0] = 'X';
    try {
      parse_bitstream(bytes.data(), bytes.size());
      FAIL("expected BadMagic");
    } catch (const Error& err) {
      CHECK(err.code() == ErrorCode::BadMagic);
    }
  }
  SUBCASE("truncated payload") {
    EncodedUtterance big = corpus_line({0, 1, 2, 3, 4, 5, 6, 7}, 16);
    auto bytes = serialize_bitstream(encode_bitstream(big));
    bytes.resize(bytes.size() - 2);
    const Bitstream parsed = parse_bitstream(bytes.data(), bytes.size());
    try {
      decode_bitstream(parsed);
      FAIL("expected TruncatedPayload");
    } catch (const Error& err) {
      CHECK(err.code() == ErrorCode::TruncatedPayload);
    }
  }
  SUBCASE("model fingerprint mismatch") {
    const Bitstream b = encode_bitstream(e, &m);
    UnigramModel other = m;
    other.support_count[0] += 3;
    other.total += 3;
    try {
      decode_bitstream(b, &other);
      FAIL("expected ModelFingerprintMismatch");
    } catch (const Error& err) {
      CHECK(err.code() == ErrorCode::ModelFingerprintMismatch);
    }
  }
  SUBCASE("entropy encode with wrong vocab") {
    auto wrong = make_utterance(rng, 8);
    try {
      encode_bitstream(wrong, &m);
      FAIL("expected ModelMismatch");
    } catch (const Error& err) {
      CHECK(err.code() == ErrorCode::ModelMismatch);
    }
  }
}

TEST_CASE("bitstream: TLUC file round-trip") {
  TempDir tmp("tluc");
  std::mt19937_64 rng(6);
  const auto e = make_utterance(rng, 50);
  const Bitstream b = encode_bitstream(e);
  save_bitstream(b, tmp.file("u.tluc"));
  const Bitstream back = load_bitstream(tmp.file("u.tluc"));
  CHECK(back.vocab == b.vocab);
  CHECK(back.n_segments == b.n_segments);
  CHECK(back.payload == b.payload);
  const auto decoded = decode_bitstream(back);
  CHECK(decoded.units == e.units);
}

TEST_CASE("huffman coding beats fixed width on a skewed corpus") {
  std::mt19937_64 rng(31);
  const std::size_t vocab = 50;
  // Skewed Zipf-ish distribution.
  std::vector<double> weights(vocab);
  for (std::size_t u = 0; u < vocab; ++u) weights[u] = 1.0 / (1.0 + u);

  auto draw = [&]() {
    double total = 0.0;
    for (double w : weights) total += w;
    double r = testutil::uniform01(rng) * total;
    for (std::size_t u = 0; u < vocab; ++u) {
      r -= weights[u];
      if (r <= 0.0) return static_cast<std::uint32_t>(u);
    }
    return static_cast<std::uint32_t>(vocab - 1);
  };

  EncodedUtterance e;
  e.vocab = vocab;
  e.frame_rate = 50.0;
  std::uint32_t prev = vocab;
  for (int i = 0; i < 1000; ++i) {
    std::uint32_t u;
    do {
      u = draw();
    } while (u == prev);
    prev = u;
    e.units.push_back(u);
    e.durations.push_back(1);
    e.pitch.push_back(0.0f);
    e.pitch_voiced.push_back(0);
  }
  const UnigramModel m = fit_unigram({e}, 0.5);

  const Bitstream fixed = encode_bitstream(e, nullptr, false);
  const Bitstream entropy = encode_bitstream(e, &m, false);
  CHECK(entropy.stats.unit_bits <= fixed.stats.unit_bits);
}

TEST_CASE("bitstream: random garbage decodes to an error, never worse") {
  std::mt19937_64 rng(90210);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::uint8_t> bytes(
        static_cast<std::size_t>(testutil::uniform01(rng) * 64));
    for (auto& b : bytes) {
      b = static_cast<std::uint8_t>(testutil::uniform01(rng) * 256);
    }
    if (trial % 3 == 0 && bytes.size() >= 4) {
      std::memcpy(bytes.data(), "TLUC", 4);  // valid magic, garbage tail
    }
    try {
      const Bitstream b = parse_bitstream(bytes.data(), bytes.size());
      (void)decode_bitstream(b);
    } catch (const Error&) {
      // any typed error is acceptable here
    }
  }
}

TEST_CASE("bitrate_report: aggregates and source-coding bound") {
  std::mt19937_64 rng(8);
  std::vector<EncodedUtterance> corpus;
  std::vector<double> seconds;
  for (int i = 0; i < 10; ++i) {
    corpus.push_back(make_utterance(rng, 20));
    seconds.push_back(corpus.back().total_frames() / 50.0 + 0.01);
  }
  const UnigramModel m = fit_unigram(corpus, 0.5);
  const BitrateReport report =
      bitrate_report(corpus, m, seconds, CodingMode::kEntropy, true);

  CHECK(report.entropy_bits_per_sec <= report.fixed_bits_per_sec + 1e-9);
  // Measured unit-stream bits cannot beat the entropy ideal.
  const double ideal_unit_bits =
      entropy_bits(m) * static_cast<double>(report.n_tokens);
  CHECK(static_cast<double>(report.breakdown.unit_bits) >=
        ideal_unit_bits - 1e-6);

  CHECK_THROWS_AS(bitrate_report({}, m, {}, CodingMode::kFixed, false), Error);
}
