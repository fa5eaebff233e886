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

#include "unitcodec/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <limits>
#include <random>

#include "json.hpp"
#include "unitcodec/error.hpp"
#include "unitcodec/parallel.hpp"

namespace unitcodec {

namespace {

constexpr std::size_t kChunk = 4096;

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Squared distance with early exit once the partial sum exceeds `bound`.
template <typename C>
double sq_dist(const float* x, const C* c, std::size_t dim, double bound) {
  double acc = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    const double d = static_cast<double>(x[i]) - static_cast<double>(c[i]);
    acc += d * d;
    if (acc > bound) return acc;
  }
  return acc;
}

template <typename C>
std::uint32_t nearest(const float* x, const C* centroids, std::size_t k,
                      std::size_t dim, double* best_out) {
  std::uint32_t best = 0;
  double best_d = sq_dist(x, centroids, dim,
                          std::numeric_limits<double>::infinity());
  for (std::size_t c = 1; c < k; ++c) {
    const double d = sq_dist(x, centroids + c * dim, dim, best_d);
    if (d < best_d) {
      best_d = d;
      best = static_cast<std::uint32_t>(c);
    }
  }
  if (best_out) *best_out = best_d;
  return best;
}

struct ChunkAccum {
  std::vector<double> sums;    // k x dim
  std::vector<std::size_t> counts;
  double sq_err = 0.0;
  double max_dist = -1.0;
  std::size_t max_idx = 0;
};

void check_finite(std::span<const float> frames) {
  for (float v : frames) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::NonFiniteInput, "frames contain a non-finite value");
    }
  }
}

std::vector<double> kmeanspp_init(std::span<const float> frames, std::size_t n,
                                  std::size_t dim, std::size_t k,
                                  std::mt19937_64& rng, unsigned n_threads) {
  std::vector<double> centroids(k * dim);
  std::vector<double> dist2(n, std::numeric_limits<double>::infinity());

  auto pick_first = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n));
  pick_first = std::min(pick_first, n - 1);
  for (std::size_t i = 0; i < dim; ++i) {
    centroids[i] = frames[pick_first * dim + i];
  }

  for (std::size_t c = 0; c < k; ++c) {
    if (c > 0) {
      // Weighted draw proportional to the squared distance to the nearest
      // chosen center.
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) total += dist2[i];
      std::size_t idx = 0;
      if (total > 0.0) {
        const double r = uniform01(rng) * total;
        double acc = 0.0;
        idx = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
          acc += dist2[i];
          if (acc >= r) {
            idx = i;
            break;
          }
        }
      } else {
        // All remaining mass is zero (duplicate-heavy data): walk to the
        // next point not yet used as a center.
        idx = std::min(static_cast<std::size_t>(uniform01(rng) * n), n - 1);
      }
      for (std::size_t i = 0; i < dim; ++i) {
        centroids[c * dim + i] = frames[idx * dim + i];
      }
    }

    // Fold the new center into the running nearest-distance table.
    const double* added = centroids.data() + c * dim;
    parallel_chunks(n, kChunk, n_threads,
                    [&](std::size_t, std::size_t begin, std::size_t end) {
                      for (std::size_t i = begin; i < end; ++i) {
                        const double d = sq_dist(frames.data() + i * dim, added,
                                                 dim, dist2[i]);
                        if (d < dist2[i]) dist2[i] = d;
                      }
                    });
  }
  return centroids;
}

}  // namespace

Codebook kmeans_train(std::span<const float> frames, std::size_t dim,
                      std::size_t k, const KmeansOptions& opts) {
  if (dim == 0 || frames.size() % dim != 0) {
    throw Error(ErrorCode::DimensionMismatch, "frame buffer is not n x dim");
  }
  const std::size_t n = frames.size() / dim;
  if (k < 2) throw Error(ErrorCode::InvalidArgument, "k must be >= 2");
  if (n < k) {
    throw Error(ErrorCode::TooFewPoints,
                std::to_string(n) + " points for k=" + std::to_string(k));
  }
  check_finite(frames);

  std::mt19937_64 rng(opts.seed);
  std::vector<double> centroids = kmeanspp_init(frames, n, dim, k, rng,
                                                opts.n_threads);

  std::vector<std::uint32_t> assignment(n, 0);
  const std::size_t n_chunks = (n + kChunk - 1) / kChunk;
  std::vector<ChunkAccum> accums(n_chunks);

  std::vector<double> history;
  history.reserve(opts.max_iters);

  for (std::size_t iter = 0; iter < opts.max_iters; ++iter) {
    // Assignment step: per-chunk partial sums, reduced in chunk order below.
    parallel_chunks(n, kChunk, opts.n_threads,
                    [&](std::size_t chunk, std::size_t begin, std::size_t end) {
                      ChunkAccum& a = accums[chunk];
                      a.sums.assign(k * dim, 0.0);
                      a.counts.assign(k, 0);
                      a.sq_err = 0.0;
                      a.max_dist = -1.0;
                      a.max_idx = begin;
                      for (std::size_t i = begin; i < end; ++i) {
                        const float* x = frames.data() + i * dim;
                        double d = 0.0;
                        const std::uint32_t c =
                            nearest(x, centroids.data(), k, dim, &d);
                        assignment[i] = c;
                        a.sq_err += d;
                        a.counts[c] += 1;
                        double* s = a.sums.data() + static_cast<std::size_t>(c) * dim;
                        for (std::size_t j = 0; j < dim; ++j) s[j] += x[j];
                        if (d > a.max_dist) {
                          a.max_dist = d;
                          a.max_idx = i;
                        }
                      }
                    });

    double sq_err = 0.0;
    std::vector<double> sums(k * dim, 0.0);
    std::vector<std::size_t> counts(k, 0);
    double max_dist = -1.0;
    std::size_t max_idx = 0;
    for (std::size_t c = 0; c < n_chunks; ++c) {
      const ChunkAccum& a = accums[c];
      sq_err += a.sq_err;
      for (std::size_t j = 0; j < k * dim; ++j) sums[j] += a.sums[j];
      for (std::size_t j = 0; j < k; ++j) counts[j] += a.counts[j];
      if (a.max_dist > max_dist) {
        max_dist = a.max_dist;
        max_idx = a.max_idx;
      }
    }

    history.push_back(sq_err / static_cast<double>(n));

    const bool converged =
        history.size() >= 2 &&
        (history[history.size() - 2] <= 0.0 ||
         (history[history.size() - 2] - history.back()) <
             opts.rel_tol * history[history.size() - 2]);
    if (converged) break;

    // Update step.
    std::vector<std::size_t> empties;
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        empties.push_back(c);
        continue;
      }
      for (std::size_t j = 0; j < dim; ++j) {
        centroids[c * dim + j] =
            sums[c * dim + j] / static_cast<double>(counts[c]);
      }
    }

    // Re-seed empty clusters to the farthest-assigned points, one each.
    if (!empties.empty()) {
      std::vector<std::size_t> used;
      for (std::size_t e : empties) {
        std::size_t pick = max_idx;
        if (!used.empty()) {
          // Subsequent empties take the next-farthest unused point.
          double best = -1.0;
          for (std::size_t i = 0; i < n; ++i) {
            if (std::find(used.begin(), used.end(), i) != used.end()) continue;
            const float* x = frames.data() + i * dim;
            const std::uint32_t c = assignment[i];
            const double d =
                sq_dist(x, centroids.data() + c * dim, dim,
                        std::numeric_limits<double>::infinity());
            if (d > best) {
              best = d;
              pick = i;
            }
          }
        }
        used.push_back(pick);
        for (std::size_t j = 0; j < dim; ++j) {
          centroids[e * dim + j] = frames[pick * dim + j];
        }
      }
    }
  }

  Codebook cb;
  cb.k = k;
  cb.dim = dim;
  cb.feature_fingerprint = opts.feature_fingerprint;
  cb.centroids.resize(k * dim);
  for (std::size_t i = 0; i < k * dim; ++i) {
    cb.centroids[i] = static_cast<float>(centroids[i]);
  }
  cb.meta.iters_run = static_cast<std::uint32_t>(history.size());
  cb.meta.final_distortion = history.empty() ? 0.0 : history.back();
  cb.meta.seed = opts.seed;
  cb.meta.distortion_per_iter = std::move(history);
  return cb;
}

UnitSequence quantize(const FeatureSequence& f, const Codebook& cb) {
  if (f.dim != cb.dim) {
    throw Error(ErrorCode::DimensionMismatch,
                "feature dim " + std::to_string(f.dim) + " vs codebook dim " +
                    std::to_string(cb.dim));
  }
  if (!cb.feature_fingerprint.empty() && !f.fingerprint.empty() &&
      f.fingerprint != cb.feature_fingerprint) {
    std::cerr << "unitcodec: warning: feature fingerprint " << f.fingerprint
              << " does not match codebook " << cb.feature_fingerprint << "\n";
  }

  UnitSequence u;
  u.frame_rate = f.frame_rate;
  u.vocab = cb.k;
  u.units.resize(f.n_frames);
  for (std::size_t t = 0; t < f.n_frames; ++t) {
    u.units[t] = nearest(f.frame(t), cb.centroids.data(), cb.k, cb.dim, nullptr);
  }
  return u;
}

double distortion(std::span<const float> frames, std::size_t dim,
                  const Codebook& cb) {
  if (dim != cb.dim || frames.size() % dim != 0) {
    throw Error(ErrorCode::DimensionMismatch, "frames do not match codebook");
  }
  const std::size_t n = frames.size() / dim;
  if (n == 0) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = 0.0;
    nearest(frames.data() + i * dim, cb.centroids.data(), cb.k, dim, &d);
    acc += d;
  }
  return acc / static_cast<double>(n);
}

void save_codebook(const Codebook& cb, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot create " + path);

  out.write("TLCB", 4);
  const std::uint32_t version = 1;
  const auto k = static_cast<std::uint32_t>(cb.k);
  const auto dim = static_cast<std::uint32_t>(cb.dim);
  out.write(reinterpret_cast<const char*>(&version), 4);
  out.write(reinterpret_cast<const char*>(&k), 4);
  out.write(reinterpret_cast<const char*>(&dim), 4);

  char fingerprint[32] = {0};
  std::memcpy(fingerprint, cb.feature_fingerprint.data(),
              std::min<std::size_t>(32, cb.feature_fingerprint.size()));
  out.write(fingerprint, 32);
  out.write(reinterpret_cast<const char*>(cb.centroids.data()),
            static_cast<std::streamsize>(cb.centroids.size() * sizeof(float)));

  nlohmann::json meta = {
      {"iters_run", cb.meta.iters_run},
      {"final_distortion", cb.meta.final_distortion},
      {"seed", cb.meta.seed},
      {"distortion_per_iter", cb.meta.distortion_per_iter},
  };
  const std::string json = meta.dump();
  const auto json_len = static_cast<std::uint32_t>(json.size());
  out.write(reinterpret_cast<const char*>(&json_len), 4);
  out.write(json.data(), static_cast<std::streamsize>(json.size()));
  if (!out) throw Error(ErrorCode::IoError, "write failure on " + path);
}

Codebook load_codebook(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);

  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "TLCB", 4) != 0) {
    throw Error(ErrorCode::BadMagic, path + " is not a TLCB file");
  }
  std::uint32_t version = 0, k = 0, dim = 0;
  char fingerprint[32];
  if (!in.read(reinterpret_cast<char*>(&version), 4) ||
      !in.read(reinterpret_cast<char*>(&k), 4) ||
      !in.read(reinterpret_cast<char*>(&dim), 4) ||
      !in.read(fingerprint, 32)) {
    throw Error(ErrorCode::TruncatedFile, path + ": truncated TLCB header");
  }
  if (version != 1) {
    throw Error(ErrorCode::VersionMismatch,
                path + ": TLCB version " + std::to_string(version));
  }

  Codebook cb;
  cb.k = k;
  cb.dim = dim;
  std::size_t fp_len = 0;
  while (fp_len < 32 && fingerprint[fp_len] != '\0') ++fp_len;
  cb.feature_fingerprint.assign(fingerprint, fp_len);
  cb.centroids.resize(static_cast<std::size_t>(k) * dim);
  if (!in.read(reinterpret_cast<char*>(cb.centroids.data()),
               static_cast<std::streamsize>(cb.centroids.size() * sizeof(float)))) {
    throw Error(ErrorCode::TruncatedFile, path + ": truncated centroid table");
  }

  std::uint32_t json_len = 0;
  if (!in.read(reinterpret_cast<char*>(&json_len), 4)) {
    throw Error(ErrorCode::TruncatedFile, path + ": missing training meta");
  }
  std::string json(json_len, '\0');
  if (!in.read(json.data(), json_len)) {
    throw Error(ErrorCode::TruncatedFile, path + ": truncated training meta");
  }
  const auto meta = nlohmann::json::parse(json, nullptr, false);
  if (meta.is_discarded()) {
    throw Error(ErrorCode::TruncatedFile, path + ": bad training meta JSON");
  }
  cb.meta.iters_run = meta.value("iters_run", 0u);
  cb.meta.final_distortion = meta.value("final_distortion", 0.0);
  cb.meta.seed = meta.value("seed", std::uint64_t{0});
  cb.meta.distortion_per_iter =
      meta.value("distortion_per_iter", std::vector<double>{});
  return cb;
}

}  // namespace unitcodec
