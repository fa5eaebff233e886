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
#include <span>
#include <string>
#include <vector>

#include "unitcodec/features.hpp"

namespace unitcodec {

struct TrainingMeta {
  std::uint32_t iters_run = 0;
  double final_distortion = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> distortion_per_iter;
};

// K centroids defining the unit vocabulary {0 .. K-1}.
struct Codebook {
  std::vector<float> centroids;  // row-major K x dim
  std::size_t k = 0;
  std::size_t dim = 0;
  std::string feature_fingerprint;
  TrainingMeta meta;

  const float* centroid(std::size_t i) const {
    return centroids.data() + i * dim;
  }
};

// Frame-level unit IDs, all < vocab.
struct UnitSequence {
  std::vector<std::uint32_t> units;
  double frame_rate = 0.0;
  std::size_t vocab = 0;
};

struct KmeansOptions {
  std::size_t max_iters = 100;
  double rel_tol = 1e-4;  // stop when relative distortion improvement drops below
  std::uint64_t seed = 0;
  unsigned n_threads = 1;
  std::string feature_fingerprint;
};

// Lloyd's algorithm with k-means++ initialization. Empty clusters are
// re-seeded to the point farthest from its assigned centroid. Accumulation
// is chunked in a fixed order, so results are bit-identical for any thread
// count. The recorded per-iteration distortion is non-increasing.
Codebook kmeans_train(std::span<const float> frames, std::size_t dim,
                      std::size_t k, const KmeansOptions& opts = {});

// Nearest centroid by squared Euclidean distance; ties go to the smallest
// index. Warns (stderr) on a fingerprint mismatch, errors on dimension.
UnitSequence quantize(const FeatureSequence& f, const Codebook& cb);

// Mean squared distance to the assigned centroid.
double distortion(std::span<const float> frames, std::size_t dim,
                  const Codebook& cb);

// TLCB codebook file: magic "TLCB", u32 version=1, u32 K, u32 d, 32-byte
// fingerprint, K*d float32 LE row-major, length-prefixed training-meta JSON.
void save_codebook(const Codebook& cb, const std::string& path);
Codebook load_codebook(const std::string& path);

}  // namespace unitcodec
