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
#include <optional>
#include <string>
#include <vector>

#include "unitcodec/codec.hpp"
#include "unitcodec/features.hpp"
#include "unitcodec/pitch.hpp"
#include "unitcodec/probing.hpp"
#include "unitcodec/quantizer.hpp"
#include "unitcodec/streams.hpp"
#include "unitcodec/unit_lm.hpp"
#include "unitcodec/vocoder.hpp"

namespace unitcodec {

enum class NormalizationMode { kNone, kPerSpeaker, kPrefix };

NormalizationMode normalization_from_string(const std::string& name);

struct PipelineConfig {
  FeatureConfig features = feature_preset_50hz();
  PitchConfig pitch;
  NormalizationMode normalization = NormalizationMode::kNone;
  double prefix_seconds = 1.0;
  CodingMode coding = CodingMode::kFixed;
  double smoothing_k = 0.5;
  unsigned workers = 1;
  std::uint64_t seed = 0;
  std::string codebook_path;
};

// Reads a JSON config file; unknown keys are errors, missing keys keep the
// defaults above. CLI flags override the file.
PipelineConfig load_pipeline_config(const std::string& path);

struct ManifestRecord {
  std::string audio_path;
  double duration_seconds = 0.0;
  std::optional<std::string> speaker_id;
  std::map<std::string, std::string> outputs;  // artifact name -> path
  std::string status = "ok";                   // "ok" | "failed"
  std::string reason;                          // set when failed
};

struct Manifest {
  std::vector<ManifestRecord> records;

  bool all_ok() const;
  std::size_t n_failed() const;
};

void write_manifest(const Manifest& m, const std::string& path);
Manifest read_manifest(const std::string& path);

// Recursive *.wav listing, lexicographically sorted for determinism.
std::vector<std::string> list_wav_files(const std::string& dir);

// Speaker id is the first path component under the corpus root, when the
// file sits in a subdirectory.
std::optional<std::string> speaker_from_path(const std::string& root,
                                             const std::string& path);

// Pools frames across the inputs (subsampled to frame_cap, seeded), trains
// k-means, writes a TLCB file.
Codebook cmd_train_kmeans(const std::vector<std::string>& wav_paths,
                          const FeatureConfig& cfg, std::size_t k,
                          std::size_t frame_cap, std::uint64_t seed,
                          unsigned workers, const std::string& out_path);

// Per-file encode -> pitch -> dedup -> bitstream over a worker pool.
// Failures are isolated per record; outputs do not depend on worker count.
Manifest cmd_preprocess(const std::string& audio_dir,
                        const PipelineConfig& cfg,
                        const std::string& out_dir);

// The unigram model travels next to entropy-coded corpora as JSON.
void save_unigram_json(const UnigramModel& m, const std::string& path);
UnigramModel load_unigram_json(const std::string& path);

struct EncodeResult {
  EncodedUtterance utterance;
  Bitstream bitstream;
  double duration_seconds = 0.0;
};

// Single-file version of the preprocess pipeline (no speaker stats; prefix
// or no normalization only).
EncodeResult encode_file(const std::string& wav_path, const Codebook& cb,
                         const PipelineConfig& cfg,
                         const UnigramModel* model = nullptr);

}  // namespace unitcodec
