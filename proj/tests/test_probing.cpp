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

#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "unitcodec/error.hpp"

using namespace unitcodec;

namespace {

FeatureSequence features_from(const std::vector<std::vector<float>>& rows) {
  FeatureSequence f;
  f.n_frames = rows.size();
  f.dim = rows[0].size();
  f.frame_rate = 50.0;
  for (const auto& r : rows) f.data.insert(f.data.end(), r.begin(), r.end());
  return f;
}

// Two linearly separable 2-D blobs.
void separable_blobs(std::size_t per_class,
                     std::vector<std::vector<float>>* examples,
                     std::vector<int>* labels, std::uint64_t seed = 0) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < per_class; ++i) {
    examples->push_back({static_cast<float>(1.0 + testutil::uniform01(rng)),
                         static_cast<float>(1.0 + testutil::uniform01(rng))});
    labels->push_back(0);
    examples->push_back({static_cast<float>(-1.0 - testutil::uniform01(rng)),
                         static_cast<float>(-1.0 - testutil::uniform01(rng))});
    labels->push_back(1);
  }
}

}  // namespace

TEST_CASE("pool_continuous: constant sequence gives (value, zeros)") {
  const auto f = features_from({{2.0f, -1.0f}, {2.0f, -1.0f}, {2.0f, -1.0f}});
  const auto pooled = pool_continuous(f);
  REQUIRE(pooled.size() == 4);
  CHECK(pooled[0] == doctest::Approx(2.0f));
  CHECK(pooled[1] == doctest::Approx(-1.0f));
  CHECK(pooled[2] == doctest::Approx(0.0f));
  CHECK(pooled[3] == doctest::Approx(0.0f));
}

TEST_CASE("pool_continuous: frames {-1, +1} give mean 0, std 1") {
  const auto f = features_from({{-1.0f}, {1.0f}});
  const auto pooled = pool_continuous(f);
  CHECK(pooled[0] == doctest::Approx(0.0f));
  CHECK(pooled[1] == doctest::Approx(1.0f));
}

TEST_CASE("pool_continuous: matches brute-force column statistics") {
  std::mt19937_64 rng(14);
  std::vector<std::vector<float>> rows;
  for (int t = 0; t < 37; ++t) {
    rows.push_back({static_cast<float>(testutil::uniform01(rng)),
                    static_cast<float>(testutil::uniform01(rng) * 3.0),
                    static_cast<float>(testutil::uniform01(rng) - 2.0)});
  }
  const auto pooled = pool_continuous(features_from(rows));

  for (std::size_t d = 0; d < 3; ++d) {
    double mean = 0.0;
    for (const auto& r : rows) mean += r[d];
    mean /= rows.size();
    double var = 0.0;
    for (const auto& r : rows) var += (r[d] - mean) * (r[d] - mean);
    CHECK(pooled[d] == doctest::Approx(mean).epsilon(1e-5));
    CHECK(pooled[3 + d] ==
          doctest::Approx(std::sqrt(var / rows.size())).epsilon(1e-4));
  }
}

TEST_CASE("pool_continuous: empty sequence") {
  FeatureSequence f;
  f.dim = 4;
  try {
    pool_continuous(f);
    FAIL("expected EmptySequence");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptySequence);
  }
}

TEST_CASE("pool_quantized: histogram cases") {
  UnitSequence u;
  u.vocab = 5;
  u.frame_rate = 50.0;

  SUBCASE("all one unit -> one-hot") {
    u.units = {3, 3, 3, 3};
    const auto h = pool_quantized(u);
    CHECK(h == std::vector<float>{0, 0, 0, 1, 0});
  }
  SUBCASE("alternating 0/1 -> half and half") {
    u.vocab = 2;
    u.units = {0, 1, 0, 1};
    const auto h = pool_quantized(u);
    CHECK(h[0] == doctest::Approx(0.5f));
    CHECK(h[1] == doctest::Approx(0.5f));
  }
  SUBCASE("random sequence matches counts / L") {
    std::mt19937_64 rng(5);
    u.vocab = 7;
    std::vector<std::size_t> counts(7, 0);
    for (int i = 0; i < 200; ++i) {
      const auto unit =
          static_cast<std::uint32_t>(testutil::uniform01(rng) * 7);
      u.units.push_back(unit);
      ++counts[unit];
    }
    const auto h = pool_quantized(u);
    for (std::size_t k = 0; k < 7; ++k) {
      CHECK(h[k] == doctest::Approx(counts[k] / 200.0).epsilon(1e-6));
    }
  }
  SUBCASE("empty sequence") {
    CHECK_THROWS_AS(pool_quantized(u), Error);
  }
}

TEST_CASE("train_probe: separable blobs reach training accuracy 1.0") {
  std::vector<std::vector<float>> examples;
  std::vector<int> labels;
  separable_blobs(40, &examples, &labels);

  const Probe p = train_probe(examples, labels);
  CHECK(eval_probe(p, examples, labels) == doctest::Approx(1.0));
  REQUIRE(p.meta.per_epoch_loss.size() == 5);
  CHECK(p.meta.per_epoch_loss.back() < p.meta.per_epoch_loss.front());
  for (double loss : p.meta.per_epoch_loss) CHECK(std::isfinite(loss));
}

TEST_CASE("train_probe: single class is degenerate") {
  const std::vector<std::vector<float>> examples = {{1.0f}, {2.0f}};
  const std::vector<int> labels = {0, 0};
  try {
    train_probe(examples, labels);
    FAIL("expected DegenerateLabels");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateLabels);
  }
}

TEST_CASE("train_probe: same seed gives a bit-identical probe") {
  std::vector<std::vector<float>> examples;
  std::vector<int> labels;
  separable_blobs(25, &examples, &labels, 3);

  ProbeTrainOptions opts;
  opts.seed = 17;
  const Probe a = train_probe(examples, labels, opts);
  const Probe b = train_probe(examples, labels, opts);
  CHECK(a.weights == b.weights);
  CHECK(a.bias == b.bias);
  CHECK(a.meta.per_epoch_loss == b.meta.per_epoch_loss);
}

TEST_CASE("eval_probe: untrained probe on random labels is near 1/C") {
  std::mt19937_64 rng(100);
  const std::size_t c = 4, n = 4000;
  std::vector<std::vector<float>> examples;
  std::vector<int> labels;
  for (std::size_t i = 0; i < n; ++i) {
    examples.push_back({static_cast<float>(testutil::uniform01(rng)),
                        static_cast<float>(testutil::uniform01(rng))});
    labels.push_back(static_cast<int>(testutil::uniform01(rng) * c));
  }
  Probe p;  // all-zero weights: always predicts class 0
  p.n_classes = c;
  p.dim = 2;
  p.weights.assign(c * 2, 0.0f);
  p.bias.assign(c, 0.0f);

  const double accuracy = eval_probe(p, examples, labels);
  // Binomial oracle: mean 1/C, sigma = sqrt(p(1-p)/n).
  const double sigma = std::sqrt(0.25 * 0.75 / static_cast<double>(n));
  CHECK(std::abs(accuracy - 0.25) <= 3.0 * sigma);
}

TEST_CASE("eval_probe: error paths") {
  Probe p;
  p.n_classes = 2;
  p.dim = 2;
  p.weights.assign(4, 0.0f);
  p.bias.assign(2, 0.0f);

  CHECK_THROWS_AS(eval_probe(p, {}, {}), Error);
  try {
    eval_probe(p, {{1.0f}}, {0});
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
}

TEST_CASE("speaker_probe_experiment: split is deterministic and disjoint") {
  // Tiny synthetic corpus: 3 speakers with distinct constant features.
  std::vector<LabeledUtterance> corpus;
  std::mt19937_64 rng(50);
  for (int speaker = 0; speaker < 3; ++speaker) {
    for (int i = 0; i < 12; ++i) {
      std::vector<std::vector<float>> rows;
      for (int t = 0; t < 8; ++t) {
        rows.push_back(
            {static_cast<float>(speaker + 0.1 * testutil::uniform01(rng)),
             static_cast<float>(speaker - 0.1 * testutil::uniform01(rng))});
      }
      corpus.push_back({features_from(rows), speaker});
    }
  }

  const auto rows_a = speaker_probe_experiment(corpus, {}, 42);
  const auto rows_b = speaker_probe_experiment(corpus, {}, 42);
  REQUIRE(rows_a.size() == 1);
  CHECK(rows_a[0].representation == "continuous");
  CHECK(rows_a[0].accuracy == rows_b[0].accuracy);
  // Easily separable: the probe should get the held-out utterances right.
  CHECK(rows_a[0].accuracy == doctest::Approx(1.0));
}

TEST_CASE("speaker_probe_experiment: insufficient data") {
  std::vector<LabeledUtterance> corpus;
  for (int i = 0; i < 12; ++i) {
    corpus.push_back({features_from({{0.0f}}), 0});
  }
  try {
    speaker_probe_experiment(corpus, {}, 0);
    FAIL("expected InsufficientData");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientData);
  }
}

TEST_CASE("probe report formatting") {
  const std::vector<ProbeRow> rows = {{"continuous", std::nullopt, 0.9875},
                                      {"quantized", 50, 0.11}};
  const std::string table = format_probe_table(rows);
  CHECK(table.find("continuous") != std::string::npos);
  CHECK(table.find("50") != std::string::npos);

  const std::string csv = format_probe_csv(rows);
  CHECK(csv.find("representation,vocab,accuracy\n") == 0);
  CHECK(csv.find("continuous,,0.9875") != std::string::npos);
  CHECK(csv.find("quantized,50,0.11") != std::string::npos);
}
