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

#include "unitcodec/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"
#include "unitcodec/error.hpp"
#include "unitcodec/parallel.hpp"

namespace fs = std::filesystem;

namespace unitcodec {

NormalizationMode normalization_from_string(const std::string& name) {
  if (name == "none") return NormalizationMode::kNone;
  if (name == "per-speaker") return NormalizationMode::kPerSpeaker;
  if (name == "prefix") return NormalizationMode::kPrefix;
  throw Error(ErrorCode::InvalidArgument, "unknown normalization: " + name);
}

PipelineConfig load_pipeline_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument,
                path + ": bad JSON (" + e.what() + ")");
  }

  PipelineConfig cfg;
  for (const auto& [key, value] : j.items()) {
    if (key == "preset") {
      cfg.features = feature_preset(value.get<std::string>());
    } else if (key == "codebook") {
      cfg.codebook_path = value.get<std::string>();
    } else if (key == "pitch") {
      cfg.pitch.f_lo = value.value("f_lo", cfg.pitch.f_lo);
      cfg.pitch.f_hi = value.value("f_hi", cfg.pitch.f_hi);
      cfg.pitch.threshold = value.value("threshold", cfg.pitch.threshold);
    } else if (key == "normalization") {
      cfg.normalization = normalization_from_string(value.get<std::string>());
    } else if (key == "prefix_seconds") {
      cfg.prefix_seconds = value.get<double>();
    } else if (key == "coding") {
      const auto mode = value.get<std::string>();
      if (mode == "fixed") {
        cfg.coding = CodingMode::kFixed;
      } else if (mode == "entropy") {
        cfg.coding = CodingMode::kEntropy;
      } else {
        throw Error(ErrorCode::InvalidArgument, "unknown coding: " + mode);
      }
    } else if (key == "smoothing_k") {
      cfg.smoothing_k = value.get<double>();
    } else if (key == "workers") {
      cfg.workers = value.get<unsigned>();
      if (cfg.workers < 1) {
        throw Error(ErrorCode::InvalidArgument, "workers must be >= 1");
      }
    } else if (key == "seed") {
      cfg.seed = value.get<std::uint64_t>();
    } else {
      throw Error(ErrorCode::InvalidArgument, path + ": unknown key " + key);
    }
  }
  return cfg;
}

bool Manifest::all_ok() const { return n_failed() == 0; }

std::size_t Manifest::n_failed() const {
  std::size_t n = 0;
  for (const auto& r : records) {
    if (r.status != "ok") ++n;
  }
  return n;
}

void write_manifest(const Manifest& m, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot create " + path);
  for (const auto& r : m.records) {
    nlohmann::json j;
    j["audio_path"] = r.audio_path;
    j["duration_seconds"] = r.duration_seconds;
    if (r.speaker_id) j["speaker_id"] = *r.speaker_id;
    j["outputs"] = r.outputs;
    j["status"] = r.status;
    if (!r.reason.empty()) j["reason"] = r.reason;
    out << j.dump() << "\n";
  }
  if (!out) throw Error(ErrorCode::IoError, "write failure on " + path);
}

Manifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  Manifest m;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw Error(ErrorCode::InvalidArgument, path + ": bad manifest line");
    }
    ManifestRecord r;
    r.audio_path = j.value("audio_path", "");
    r.duration_seconds = j.value("duration_seconds", 0.0);
    if (j.contains("speaker_id")) r.speaker_id = j["speaker_id"].get<std::string>();
    if (j.contains("outputs")) {
      r.outputs = j["outputs"].get<std::map<std::string, std::string>>();
    }
    r.status = j.value("status", "ok");
    r.reason = j.value("reason", "");
    m.records.push_back(std::move(r));
  }
  return m;
}

std::vector<std::string> list_wav_files(const std::string& dir) {
  if (!fs::is_directory(dir)) {
    throw Error(ErrorCode::IoError, dir + " is not a directory");
  }
  std::vector<std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".wav") {
      files.push_back(entry.path().string());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::optional<std::string> speaker_from_path(const std::string& root,
                                             const std::string& path) {
  const auto rel = fs::relative(path, root);
  if (rel.empty() || !rel.has_parent_path() || rel.parent_path().empty() ||
      rel.parent_path() == ".") {
    return std::nullopt;
  }
  return rel.begin()->string();
}

namespace {

std::string sanitized_stem(const std::string& root, const std::string& path) {
  std::string rel = fs::relative(path, root).replace_extension("").string();
  for (auto& c : rel) {
    if (c == '/' || c == '\\') c = '_';
  }
  return rel;
}

Waveform load_for_config(const std::string& path, const FeatureConfig& cfg) {
  Waveform w = read_wav(path);
  if (w.sample_rate != cfg.sample_rate) w = resample(w, cfg.sample_rate);
  return w;
}

}  // namespace

Codebook cmd_train_kmeans(const std::vector<std::string>& wav_paths,
                          const FeatureConfig& cfg, std::size_t k,
                          std::size_t frame_cap, std::uint64_t seed,
                          unsigned workers, const std::string& out_path) {
  if (wav_paths.empty()) {
    throw Error(ErrorCode::EmptyCorpus, "no input audio files");
  }

  // Extract features per file in parallel, pool in input order.
  std::vector<FeatureSequence> features(wav_paths.size());
  parallel_chunks(wav_paths.size(), 1, workers,
                  [&](std::size_t, std::size_t begin, std::size_t end) {
                    for (std::size_t i = begin; i < end; ++i) {
                      features[i] = log_mel(load_for_config(wav_paths[i], cfg), cfg);
                    }
                  });

  const std::size_t dim = cfg.n_mels;
  std::vector<float> pool;
  for (const auto& f : features) {
    pool.insert(pool.end(), f.data.begin(), f.data.end());
  }
  std::size_t n = pool.size() / dim;

  if (frame_cap > 0 && n > frame_cap) {
    // Seeded subsample without replacement, order-preserving.
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> keep(n);
    std::iota(keep.begin(), keep.end(), std::size_t{0});
    for (std::size_t i = 0; i < frame_cap; ++i) {
      const std::size_t j =
          i + static_cast<std::size_t>((rng() >> 11) % (n - i));
      std::swap(keep[i], keep[j]);
    }
    keep.resize(frame_cap);
    std::sort(keep.begin(), keep.end());
    std::vector<float> sampled;
    sampled.reserve(frame_cap * dim);
    for (auto idx : keep) {
      sampled.insert(sampled.end(), pool.begin() + static_cast<std::ptrdiff_t>(idx * dim),
                     pool.begin() + static_cast<std::ptrdiff_t>((idx + 1) * dim));
    }
    pool = std::move(sampled);
    n = frame_cap;
  }

  KmeansOptions opts;
  opts.seed = seed;
  opts.n_threads = workers;
  opts.feature_fingerprint = feature_fingerprint(cfg);
  Codebook cb = kmeans_train(pool, dim, k, opts);
  if (!out_path.empty()) save_codebook(cb, out_path);
  return cb;
}

namespace {

struct FileWork {
  // phase 1 results
  Waveform audio;
  UnitSequence units;
  PitchTrack raw_pitch;
  double duration_seconds = 0.0;
  bool failed = false;
  std::string reason;
  // phase 2 results
  EncodedUtterance encoded;
  PitchTrack normalized_pitch;
  bool has_pitch = false;
};

}  // namespace

Manifest cmd_preprocess(const std::string& audio_dir, const PipelineConfig& cfg,
                        const std::string& out_dir) {
  if (cfg.codebook_path.empty()) {
    throw Error(ErrorCode::InvalidArgument, "preprocess needs a codebook");
  }
  const Codebook cb = load_codebook(cfg.codebook_path);
  const auto files = list_wav_files(audio_dir);

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (!fs::is_directory(out_dir)) {
    throw Error(ErrorCode::IoError, "cannot create output dir " + out_dir);
  }

  const bool want_pitch = cfg.normalization != NormalizationMode::kNone;
  std::vector<FileWork> work(files.size());

  // Phase 1: per-file analysis, failures recorded per record.
  parallel_chunks(files.size(), 1, cfg.workers,
                  [&](std::size_t, std::size_t begin, std::size_t end) {
                    for (std::size_t i = begin; i < end; ++i) {
                      FileWork& fw = work[i];
                      try {
                        fw.audio = load_for_config(files[i], cfg.features);
                        fw.duration_seconds = fw.audio.duration_seconds();
                        const auto feats = log_mel(fw.audio, cfg.features);
                        fw.units = quantize(feats, cb);
                        if (want_pitch) {
                          fw.raw_pitch = track_pitch(
                              fw.audio, cfg.features.frame_rate, cfg.pitch);
                        }
                        fw.audio = Waveform{};  // later phases need streams only
                      } catch (const std::exception& e) {
                        fw.failed = true;
                        fw.reason = e.what();
                      }
                    }
                  });

  // Phase 2: speaker statistics when per-speaker normalization is on.
  std::map<std::string, SpeakerStats> stats_by_speaker;
  if (cfg.normalization == NormalizationMode::kPerSpeaker) {
    std::map<std::string, std::vector<PitchTrack>> tracks;
    for (std::size_t i = 0; i < files.size(); ++i) {
      if (work[i].failed) continue;
      const auto speaker = speaker_from_path(audio_dir, files[i]);
      tracks[speaker.value_or("")].push_back(work[i].raw_pitch);
    }
    for (const auto& [speaker, speaker_tracks] : tracks) {
      try {
        stats_by_speaker.emplace(speaker, speaker_stats(speaker_tracks));
      } catch (const std::exception&) {
        // Recorded per file below: every utterance of this speaker fails.
      }
    }
  }

  // Phase 3: normalize, dedup.
  for (std::size_t i = 0; i < files.size(); ++i) {
    FileWork& fw = work[i];
    if (fw.failed) continue;
    try {
      std::optional<PitchTrack> normalized;
      if (cfg.normalization == NormalizationMode::kPerSpeaker) {
        const auto speaker =
            speaker_from_path(audio_dir, files[i]).value_or("");
        const auto it = stats_by_speaker.find(speaker);
        if (it == stats_by_speaker.end()) {
          throw Error(ErrorCode::InsufficientVoicedFrames,
                      "speaker '" + speaker + "' lacks voiced frames for stats");
        }
        normalized = normalize_per_speaker(fw.raw_pitch, it->second);
      } else if (cfg.normalization == NormalizationMode::kPrefix) {
        normalized = normalize_prefix(fw.raw_pitch, cfg.prefix_seconds);
      }
      if (normalized) {
        normalized = align_pitch(*normalized, fw.units.frame_rate,
                                 fw.units.units.size());
        fw.normalized_pitch = *normalized;
        fw.has_pitch = true;
      }
      fw.encoded = dedup(fw.units, normalized);
    } catch (const std::exception& e) {
      fw.failed = true;
      fw.reason = e.what();
    }
  }

  // Phase 4: unigram fit over the surviving corpus for entropy coding.
  UnigramModel model;
  const bool entropy = cfg.coding == CodingMode::kEntropy;
  if (entropy) {
    std::vector<EncodedUtterance> corpus;
    for (const auto& fw : work) {
      if (!fw.failed) corpus.push_back(fw.encoded);
    }
    if (corpus.empty()) {
      throw Error(ErrorCode::EmptyCorpus, "no utterance survived preprocessing");
    }
    model = fit_unigram(corpus, cfg.smoothing_k);
    save_unigram_json(model, (fs::path(out_dir) / "unigram.json").string());
  }

  // Phase 5: write artifacts (independent files, any worker count).
  parallel_chunks(
      files.size(), 1, cfg.workers,
      [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
          FileWork& fw = work[i];
          if (fw.failed) continue;
          try {
            const std::string stem = sanitized_stem(audio_dir, files[i]);
            const auto base = fs::path(out_dir) / stem;
            const Bitstream b = encode_bitstream(
                fw.encoded, entropy ? &model : nullptr, want_pitch);
            save_bitstream(b, base.string() + ".tluc");
            std::ofstream streams(base.string() + ".units", std::ios::trunc);
            write_streams_line(fw.encoded, streams);
            if (!streams) {
              throw Error(ErrorCode::IoError, "write failure on streams dump");
            }
            if (fw.has_pitch) {
              std::ofstream pitch_out(base.string() + ".f0.jsonl",
                                      std::ios::trunc);
              dump_pitch_jsonl(fw.normalized_pitch, pitch_out);
            }
          } catch (const std::exception& e) {
            fw.failed = true;
            fw.reason = e.what();
          }
        }
      });

  Manifest manifest;
  for (std::size_t i = 0; i < files.size(); ++i) {
    const FileWork& fw = work[i];
    ManifestRecord r;
    r.audio_path = files[i];
    r.duration_seconds = fw.duration_seconds;
    r.speaker_id = speaker_from_path(audio_dir, files[i]);
    if (fw.failed) {
      r.status = "failed";
      r.reason = fw.reason;
    } else {
      // Stored relative to the manifest so the output tree can move.
      const std::string stem = sanitized_stem(audio_dir, files[i]);
      r.outputs["bitstream"] = stem + ".tluc";
      r.outputs["streams"] = stem + ".units";
      if (fw.has_pitch) r.outputs["pitch"] = stem + ".f0.jsonl";
    }
    manifest.records.push_back(std::move(r));
  }
  write_manifest(manifest, (fs::path(out_dir) / "manifest.jsonl").string());
  return manifest;
}

void save_unigram_json(const UnigramModel& m, const std::string& path) {
  nlohmann::json j;
  j["vocab"] = m.vocab();
  j["total"] = m.total;
  j["smoothing_k"] = m.smoothing_k;
  j["support_count"] = m.support_count;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot create " + path);
  out << j.dump(2) << "\n";
  if (!out) throw Error(ErrorCode::IoError, "write failure on " + path);
}

UnigramModel load_unigram_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument,
                path + ": bad JSON (" + e.what() + ")");
  }

  UnigramModel m;
  m.total = j.at("total").get<std::uint64_t>();
  m.smoothing_k = j.at("smoothing_k").get<double>();
  m.support_count = j.at("support_count").get<std::vector<std::uint64_t>>();
  const auto vocab = j.at("vocab").get<std::size_t>();
  if (vocab != m.support_count.size()) {
    throw Error(ErrorCode::InvalidArgument, path + ": inconsistent vocab");
  }
  m.probs.resize(vocab);
  const double denom = static_cast<double>(m.total) + m.smoothing_k * vocab;
  if (!(denom > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, path + ": degenerate unigram model");
  }
  for (std::size_t u = 0; u < vocab; ++u) {
    m.probs[u] =
        (static_cast<double>(m.support_count[u]) + m.smoothing_k) / denom;
  }
  return m;
}

EncodeResult encode_file(const std::string& wav_path, const Codebook& cb,
                         const PipelineConfig& cfg, const UnigramModel* model) {
  if (cfg.normalization == NormalizationMode::kPerSpeaker) {
    throw Error(ErrorCode::InvalidArgument,
                "per-speaker normalization needs the batch pipeline");
  }
  const Waveform w = load_for_config(wav_path, cfg.features);
  const auto feats = log_mel(w, cfg.features);
  const UnitSequence units = quantize(feats, cb);

  std::optional<PitchTrack> normalized;
  if (cfg.normalization == NormalizationMode::kPrefix) {
    const auto raw = track_pitch(w, cfg.features.frame_rate, cfg.pitch);
    normalized = align_pitch(normalize_prefix(raw, cfg.prefix_seconds),
                             units.frame_rate, units.units.size());
  }

  EncodeResult result;
  result.utterance = dedup(units, normalized);
  result.duration_seconds = w.duration_seconds();
  result.bitstream = encode_bitstream(
      result.utterance, cfg.coding == CodingMode::kEntropy ? model : nullptr,
      normalized.has_value());
  return result;
}

}  // namespace unitcodec
