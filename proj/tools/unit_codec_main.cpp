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
//
// unit-codec: encode speech into discrete unit/duration/pitch streams,
// compress them, resynthesize audio, and run the bundled experiments.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "unitcodec/error.hpp"
#include "unitcodec/parallel.hpp"
#include "unitcodec/pipeline.hpp"
#include "unitcodec/synth.hpp"

namespace fs = std::filesystem;
using namespace unitcodec;

namespace {

// Every module error maps to its own exit code (10 + code); generic
// failures exit 1, per-record preprocess failures exit 2.
int exit_code_for(const Error& e) { return 10 + static_cast<int>(e.code()); }

struct CommonFlags {
  std::string config_path;
  std::string preset;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool json = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "pipeline config JSON file");
    cmd->add_option("--preset", preset, "feature preset: mel-50hz | mel-100hz");
    cmd->add_option("--seed", seed, "random seed")
        ->each([this](const std::string&) { seed_set = true; });
    cmd->add_flag("--json", json, "machine-readable output");
  }

  PipelineConfig make_config() const {
    PipelineConfig cfg;
    if (!config_path.empty()) cfg = load_pipeline_config(config_path);
    if (!preset.empty()) cfg.features = feature_preset(preset);
    if (seed_set) cfg.seed = seed;
    return cfg;
  }
};

void print_or_json(bool json, const nlohmann::json& j,
                   const std::string& text) {
  if (json) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << text;
  }
}

int run_train_kmeans(const CommonFlags& common, const std::string& audio_dir,
                     const std::vector<std::string>& feature_files,
                     std::size_t k, std::size_t frame_cap, unsigned workers,
                     const std::string& out_path) {
  PipelineConfig cfg = common.make_config();

  Codebook cb;
  if (!feature_files.empty()) {
    // Pre-computed features (TLFT) instead of audio.
    std::vector<float> pool;
    std::size_t dim = 0;
    for (const auto& path : feature_files) {
      const auto f = import_features(path);
      if (dim == 0) dim = f.dim;
      if (f.dim != dim) {
        throw Error(ErrorCode::DimensionMismatch, "mixed TLFT dimensions");
      }
      pool.insert(pool.end(), f.data.begin(), f.data.end());
    }
    KmeansOptions opts;
    opts.seed = cfg.seed;
    opts.n_threads = workers;
    Codebook trained = kmeans_train(pool, dim, k, opts);
    save_codebook(trained, out_path);
    cb = std::move(trained);
  } else {
    cb = cmd_train_kmeans(list_wav_files(audio_dir), cfg.features, k,
                          frame_cap, cfg.seed, workers, out_path);
  }

  nlohmann::json j = {{"out", out_path},
                      {"k", cb.k},
                      {"dim", cb.dim},
                      {"iters", cb.meta.iters_run},
                      {"final_distortion", cb.meta.final_distortion}};
  std::ostringstream text;
  text << "wrote " << out_path << " (K=" << cb.k << ", dim=" << cb.dim
       << ", iters=" << cb.meta.iters_run
       << ", distortion=" << cb.meta.final_distortion << ")\n";
  print_or_json(common.json, j, text.str());
  return 0;
}

int run_preprocess(const CommonFlags& common, const std::string& audio_dir,
                   const std::string& out_dir, const std::string& codebook,
                   const std::string& normalization, double prefix_seconds,
                   const std::string& coding, unsigned workers,
                   bool warn_only) {
  PipelineConfig cfg = common.make_config();
  if (!codebook.empty()) cfg.codebook_path = codebook;
  if (!normalization.empty()) {
    cfg.normalization = normalization_from_string(normalization);
  }
  if (prefix_seconds > 0) cfg.prefix_seconds = prefix_seconds;
  if (!coding.empty()) {
    cfg.coding = coding == "entropy" ? CodingMode::kEntropy : CodingMode::kFixed;
  }
  if (workers > 0) cfg.workers = workers;

  const Manifest manifest = cmd_preprocess(audio_dir, cfg, out_dir);

  nlohmann::json j = {{"records", manifest.records.size()},
                      {"failed", manifest.n_failed()},
                      {"manifest", (fs::path(out_dir) / "manifest.jsonl").string()}};
  std::ostringstream text;
  text << manifest.records.size() << " files, " << manifest.n_failed()
       << " failed; manifest at " << (fs::path(out_dir) / "manifest.jsonl").string()
       << "\n";
  for (const auto& r : manifest.records) {
    if (r.status != "ok") {
      text << "  failed: " << r.audio_path << " (" << r.reason << ")\n";
    }
  }
  print_or_json(common.json, j, text.str());
  if (!manifest.all_ok() && !warn_only) return 2;
  return 0;
}

int run_encode(const CommonFlags& common, const std::string& input,
               const std::string& codebook, const std::string& out,
               const std::string& streams_out, const std::string& model_path,
               const std::string& normalization, double prefix_seconds,
               const std::string& coding) {
  PipelineConfig cfg = common.make_config();
  if (!normalization.empty()) {
    cfg.normalization = normalization_from_string(normalization);
  }
  if (prefix_seconds > 0) cfg.prefix_seconds = prefix_seconds;
  if (!coding.empty()) {
    cfg.coding = coding == "entropy" ? CodingMode::kEntropy : CodingMode::kFixed;
  }

  const Codebook cb = load_codebook(codebook);
  UnigramModel model;
  const UnigramModel* model_ptr = nullptr;
  if (cfg.coding == CodingMode::kEntropy) {
    if (model_path.empty()) {
      throw Error(ErrorCode::ModelMismatch,
                  "entropy coding needs --model unigram.json");
    }
    model = load_unigram_json(model_path);
    model_ptr = &model;
  }

  const EncodeResult result = encode_file(input, cb, cfg, model_ptr);
  save_bitstream(result.bitstream, out);
  if (!streams_out.empty()) {
    std::ofstream s(streams_out, std::ios::trunc);
    write_streams_line(result.utterance, s);
  }

  nlohmann::json j = {{"out", out},
                      {"segments", result.utterance.n_segments()},
                      {"total_frames", result.utterance.total_frames()},
                      {"payload_bytes", result.bitstream.payload.size()},
                      {"duration_seconds", result.duration_seconds}};
  std::ostringstream text;
  text << "wrote " << out << " (" << result.utterance.n_segments()
       << " segments, " << result.bitstream.payload.size()
       << " payload bytes)\n";
  print_or_json(common.json, j, text.str());
  return 0;
}

int run_decode(const CommonFlags& common, const std::string& input,
               const std::string& model_path, const std::string& out) {
  const Bitstream b = load_bitstream(input);
  UnigramModel model;
  const UnigramModel* model_ptr = nullptr;
  if (b.mode == CodingMode::kEntropy) {
    if (model_path.empty()) {
      throw Error(ErrorCode::ModelMismatch,
                  "entropy-coded stream needs --model unigram.json");
    }
    model = load_unigram_json(model_path);
    model_ptr = &model;
  }
  const EncodedUtterance e = decode_bitstream(b, model_ptr);

  if (common.json) {
    nlohmann::json j = {{"vocab", e.vocab},
                        {"frame_rate", e.frame_rate},
                        {"units", e.units},
                        {"durations", e.durations},
                        {"pitch", e.pitch},
                        {"pitch_voiced", e.pitch_voiced}};
    std::cout << j.dump() << "\n";
  } else if (out.empty() || out == "-") {
    write_streams_line(e, std::cout);
  }
  if (!out.empty() && out != "-") {
    std::ofstream s(out, std::ios::trunc);
    write_streams_line(e, s);
    if (!s) throw Error(ErrorCode::IoError, "write failure on " + out);
  }
  return 0;
}

int run_resynth(const CommonFlags& common, const std::string& input,
                const std::string& codebook, const std::string& out,
                std::size_t gl_iters, const std::string& trace_path) {
  PipelineConfig cfg = common.make_config();
  const Codebook cb = load_codebook(codebook);

  Waveform w = read_wav(input);
  if (w.sample_rate != cfg.features.sample_rate) {
    w = resample(w, cfg.features.sample_rate);
  }

  SynthesisConfig synth;
  synth.phase_seed = cfg.seed;
  if (gl_iters > 0) synth.griffin_lim_iters = gl_iters;

  if (trace_path.empty()) {
    const Waveform audio = resynthesize(w, cb, cfg.features, synth);
    write_wav(audio, out);
  } else {
    // Expanded pipeline so the Griffin-Lim trace can be captured.
    const auto feats = log_mel(w, cfg.features);
    const auto encoded = dedup(quantize(feats, cb));
    const auto linear =
        mel_to_linear(units_to_features(encoded, cb), cfg.features,
                      synth.nnls_iters);
    GriffinLimResult gl = griffin_lim(linear, cfg.features, synth);
    gl.audio.samples.resize(feats.n_frames * cfg.features.hop(), 0.0f);
    write_wav(gl.audio, out);
    std::ofstream trace(trace_path, std::ios::trunc);
    write_convergence_csv(gl.convergence, trace);
  }

  nlohmann::json j = {{"out", out}};
  print_or_json(common.json, j, "wrote " + out + "\n");
  return 0;
}

int run_bitrate(const CommonFlags& common, const std::string& manifest_path,
                const std::string& coding, double smoothing_k) {
  const Manifest manifest = read_manifest(manifest_path);
  std::vector<EncodedUtterance> corpus;
  std::vector<double> seconds;
  std::size_t vocab = 0;
  double frame_rate = 0.0;
  bool has_pitch = false;

  const auto base_dir = fs::path(manifest_path).parent_path();
  for (const auto& r : manifest.records) {
    if (r.status != "ok") continue;
    const auto bit = r.outputs.find("bitstream");
    const auto streams = r.outputs.find("streams");
    if (bit == r.outputs.end() || streams == r.outputs.end()) continue;
    const Bitstream b = load_bitstream((base_dir / bit->second).string());
    if (vocab == 0) {
      vocab = b.vocab;
      frame_rate = b.frame_rate;
      has_pitch = b.has_pitch;
    }
    const std::string streams_path = (base_dir / streams->second).string();
    std::ifstream in(streams_path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + streams_path);
    std::string line;
    std::getline(in, line);
    corpus.push_back(parse_streams(line, vocab, frame_rate));
    seconds.push_back(r.duration_seconds);
  }
  if (corpus.empty()) {
    throw Error(ErrorCode::EmptyCorpus, "manifest holds no ok records");
  }

  const UnigramModel model = fit_unigram(corpus, smoothing_k);
  const CodingMode mode =
      coding == "fixed" ? CodingMode::kFixed : CodingMode::kEntropy;
  const BitrateReport report =
      bitrate_report(corpus, model, seconds, mode, has_pitch);

  nlohmann::json j = {
      {"n_tokens", report.n_tokens},
      {"audio_seconds", report.audio_seconds},
      {"vocab", report.vocab},
      {"fixed_bits_per_sec", report.fixed_bits_per_sec},
      {"entropy_bits_per_sec", report.entropy_bits_per_sec},
      {"actual_bits_per_sec", report.actual_bits_per_sec},
      {"unit_bits", report.breakdown.unit_bits},
      {"duration_bits", report.breakdown.duration_bits},
      {"pitch_bits", report.breakdown.pitch_bits}};
  std::ostringstream text;
  char line[160];
  std::snprintf(line, sizeof(line),
                "K=%zu  tokens=%llu  seconds=%.2f\n"
                "fixed    %.1f bit/s\n"
                "entropy  %.1f bit/s\n"
                "actual   %.1f bit/s (units %llu + durations %llu + pitch %llu bits)\n",
                report.vocab,
                static_cast<unsigned long long>(report.n_tokens),
                report.audio_seconds, report.fixed_bits_per_sec,
                report.entropy_bits_per_sec, report.actual_bits_per_sec,
                static_cast<unsigned long long>(report.breakdown.unit_bits),
                static_cast<unsigned long long>(report.breakdown.duration_bits),
                static_cast<unsigned long long>(report.breakdown.pitch_bits));
  text << line;
  print_or_json(common.json, j, text.str());
  return 0;
}

int run_probe(const CommonFlags& common, const std::string& audio_dir,
              const std::vector<std::string>& codebook_paths,
              std::size_t epochs, double lr, const std::string& csv_path,
              unsigned workers) {
  PipelineConfig cfg = common.make_config();
  const auto files = list_wav_files(audio_dir);
  if (files.empty()) throw Error(ErrorCode::EmptyCorpus, "no input audio");

  std::vector<LabeledUtterance> corpus(files.size());
  std::map<std::string, int> speaker_ids;
  for (const auto& f : files) {
    const auto speaker = speaker_from_path(audio_dir, f);
    if (!speaker) {
      throw Error(ErrorCode::InsufficientData,
                  "probe needs speaker subdirectories: " + f);
    }
    speaker_ids.emplace(*speaker, static_cast<int>(speaker_ids.size()));
  }
  parallel_chunks(files.size(), 1, workers,
                  [&](std::size_t, std::size_t begin, std::size_t end) {
                    for (std::size_t i = begin; i < end; ++i) {
                      Waveform w = read_wav(files[i]);
                      if (w.sample_rate != cfg.features.sample_rate) {
                        w = resample(w, cfg.features.sample_rate);
                      }
                      corpus[i].features = log_mel(w, cfg.features);
                      corpus[i].speaker = speaker_ids.at(
                          *speaker_from_path(audio_dir, files[i]));
                    }
                  });

  std::vector<Codebook> codebooks;
  codebooks.reserve(codebook_paths.size());
  for (const auto& p : codebook_paths) codebooks.push_back(load_codebook(p));
  std::vector<const Codebook*> cb_ptrs;
  for (const auto& cb : codebooks) cb_ptrs.push_back(&cb);

  ProbeTrainOptions opts = experiment_probe_options();
  if (epochs > 0) opts.epochs = epochs;
  if (lr > 0) opts.lr = lr;
  const auto rows = speaker_probe_experiment(corpus, cb_ptrs, cfg.seed, opts);

  if (!csv_path.empty()) {
    std::ofstream csv(csv_path, std::ios::trunc);
    csv << format_probe_csv(rows);
  }
  if (common.json) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : rows) {
      nlohmann::json row = {{"representation", r.representation},
                            {"accuracy", r.accuracy}};
      if (r.vocab) row["vocab"] = *r.vocab;
      j.push_back(row);
    }
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << format_probe_table(rows);
  }
  return 0;
}

int run_lm_train(const CommonFlags& common,
                 const std::vector<std::string>& stream_files,
                 const std::string& streams_dir, std::size_t vocab,
                 const std::string& codebook_path, std::size_t order,
                 double smoothing_k, const std::string& out_path) {
  std::vector<std::string> inputs = stream_files;
  if (!streams_dir.empty()) {
    for (const auto& entry : fs::recursive_directory_iterator(streams_dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".units") {
        inputs.push_back(entry.path().string());
      }
    }
    std::sort(inputs.begin(), inputs.end());
  }
  if (inputs.empty()) {
    throw Error(ErrorCode::EmptyCorpus, "no stream files given");
  }
  if (vocab == 0) {
    if (codebook_path.empty()) {
      throw Error(ErrorCode::InvalidArgument, "need --vocab or --codebook");
    }
    vocab = load_codebook(codebook_path).k;
  }

  std::vector<EncodedUtterance> corpus;
  std::vector<std::vector<std::uint32_t>> unit_streams;
  for (const auto& path : inputs) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      corpus.push_back(parse_streams(line, vocab, 0.0));
      unit_streams.push_back(corpus.back().units);
    }
  }

  const NGramModel model = train_ngram(unit_streams, order, vocab, smoothing_k);
  save_ngram(model, out_path);

  const auto durations = learn_unit_durations(corpus, vocab);
  nlohmann::json dj = durations;
  std::ofstream durs(out_path + ".durs.json", std::ios::trunc);
  durs << dj.dump() << "\n";
  if (!durs) throw Error(ErrorCode::IoError, "write failure on durations");

  double total_ppl = 0.0;
  for (const auto& s : unit_streams) total_ppl += perplexity(model, s);

  nlohmann::json j = {{"out", out_path},
                      {"order", model.order},
                      {"vocab", model.vocab},
                      {"streams", unit_streams.size()},
                      {"mean_train_perplexity",
                       total_ppl / static_cast<double>(unit_streams.size())}};
  std::ostringstream text;
  text << "wrote " << out_path << " (order=" << model.order
       << ", vocab=" << model.vocab << ", streams=" << unit_streams.size()
       << ", mean train ppl="
       << total_ppl / static_cast<double>(unit_streams.size()) << ")\n";
  print_or_json(common.json, j, text.str());
  return 0;
}

int run_continue(const CommonFlags& common, const std::string& input,
                 const std::string& codebook_path,
                 const std::string& model_path, std::string durations_path,
                 const std::string& out, double temperature,
                 std::size_t max_len, std::size_t gl_iters) {
  PipelineConfig cfg = common.make_config();
  const Codebook cb = load_codebook(codebook_path);
  const NGramModel model = load_ngram(model_path);

  if (durations_path.empty()) durations_path = model_path + ".durs.json";
  std::ifstream durs(durations_path);
  if (!durs) throw Error(ErrorCode::IoError, "cannot open " + durations_path);
  nlohmann::json dj;
  durs >> dj;
  const auto durations = dj.get<std::vector<std::uint32_t>>();

  Waveform w = read_wav(input);
  if (w.sample_rate != cfg.features.sample_rate) {
    w = resample(w, cfg.features.sample_rate);
  }

  SynthesisConfig synth;
  synth.phase_seed = cfg.seed;
  if (gl_iters > 0) synth.griffin_lim_iters = gl_iters;
  SamplingOptions sampling;
  sampling.seed = cfg.seed;
  sampling.temperature = temperature;
  sampling.max_len = max_len;

  const Waveform audio =
      continue_speech(w, cb, model, durations, cfg.features, synth, sampling);
  write_wav(audio, out);

  nlohmann::json j = {{"out", out},
                      {"prompt_seconds", w.duration_seconds()},
                      {"output_seconds", audio.duration_seconds()}};
  std::ostringstream text;
  text << "wrote " << out << " (" << w.duration_seconds() << " s prompt -> "
       << audio.duration_seconds() << " s)\n";
  print_or_json(common.json, j, text.str());
  return 0;
}

int run_demo_corpus(const CommonFlags& common, const std::string& out_dir,
                    std::size_t n_files, double seconds, std::size_t speakers) {
  const PipelineConfig cfg = common.make_config();
  fs::create_directories(out_dir);
  const double tilts[] = {-2.0, -0.5, 1.0, 2.5, -3.0, 2.0, 0.0, 3.5};
  const double f0s[] = {110.0, 135.0, 170.0, 215.0, 120.0, 150.0, 190.0, 240.0};

  for (std::size_t i = 0; i < n_files; ++i) {
    const std::size_t speaker = i % speakers;
    SynthVoice voice;
    voice.base_f0 = f0s[speaker % 8];
    voice.tilt = tilts[speaker % 8];
    const Waveform w = make_speech_like(16000, seconds, voice,
                                        cfg.seed * 7919 + i);
    const auto dir = fs::path(out_dir) / ("spk" + std::to_string(speaker));
    fs::create_directories(dir);
    char name[32];
    std::snprintf(name, sizeof(name), "utt%04zu.wav", i);
    write_wav(w, (dir / name).string());
  }

  nlohmann::json j = {{"out", out_dir},
                      {"files", n_files},
                      {"speakers", speakers},
                      {"seconds_per_file", seconds}};
  std::ostringstream text;
  text << "wrote " << n_files << " files (" << speakers << " speakers) under "
       << out_dir << "\n";
  print_or_json(common.json, j, text.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"unit-codec: discrete speech unit pipeline"};
  app.require_subcommand(1);

  // train-kmeans
  CommonFlags c_train;
  std::string tk_audio, tk_out;
  std::vector<std::string> tk_features;
  std::size_t tk_k = 100, tk_cap = 200000;
  unsigned tk_workers = 1;
  auto* train = app.add_subcommand("train-kmeans", "train a unit codebook");
  c_train.attach(train);
  train->add_option("--audio", tk_audio, "directory of WAV files");
  train->add_option("--features", tk_features, "TLFT feature files");
  train->add_option("--k", tk_k, "vocabulary size")->required();
  train->add_option("--out", tk_out, "output TLCB path")->required();
  train->add_option("--frame-cap", tk_cap, "max pooled frames (0 = all)");
  train->add_option("--workers", tk_workers, "worker threads");

  // preprocess
  CommonFlags c_pre;
  std::string pp_audio, pp_out, pp_codebook, pp_norm, pp_coding;
  double pp_prefix = 0.0;
  unsigned pp_workers = 0;
  bool pp_warn_only = false;
  auto* pre = app.add_subcommand("preprocess", "batch-encode a corpus");
  c_pre.attach(pre);
  pre->add_option("--audio", pp_audio, "directory of WAV files")->required();
  pre->add_option("--out", pp_out, "output directory")->required();
  pre->add_option("--codebook", pp_codebook, "TLCB codebook");
  pre->add_option("--normalization", pp_norm, "none | per-speaker | prefix");
  pre->add_option("--prefix-seconds", pp_prefix, "prefix window for stats");
  pre->add_option("--coding", pp_coding, "fixed | entropy");
  pre->add_option("--workers", pp_workers, "worker threads");
  pre->add_flag("--warn-only", pp_warn_only,
                "exit 0 even when some records fail");

  // encode
  CommonFlags c_enc;
  std::string en_input, en_codebook, en_out, en_streams, en_model, en_norm,
      en_coding;
  double en_prefix = 0.0;
  auto* enc = app.add_subcommand("encode", "encode one file to a bitstream");
  c_enc.attach(enc);
  enc->add_option("--input", en_input, "input WAV")->required();
  enc->add_option("--codebook", en_codebook, "TLCB codebook")->required();
  enc->add_option("--out", en_out, "output TLUC path")->required();
  enc->add_option("--streams-out", en_streams, "also dump the text streams");
  enc->add_option("--model", en_model, "unigram JSON for entropy coding");
  enc->add_option("--normalization", en_norm, "none | prefix");
  enc->add_option("--prefix-seconds", en_prefix, "prefix window for stats");
  enc->add_option("--coding", en_coding, "fixed | entropy");

  // decode
  CommonFlags c_dec;
  std::string de_input, de_model, de_out;
  auto* dec = app.add_subcommand("decode", "decode a bitstream to streams");
  c_dec.attach(dec);
  dec->add_option("--input", de_input, "input TLUC")->required();
  dec->add_option("--model", de_model, "unigram JSON for entropy streams");
  dec->add_option("--out", de_out, "output text path ('-' for stdout)");

  // resynth
  CommonFlags c_res;
  std::string re_input, re_codebook, re_out, re_trace;
  std::size_t re_iters = 0;
  auto* res = app.add_subcommand("resynth", "audio -> units -> audio");
  c_res.attach(res);
  res->add_option("--input", re_input, "input WAV")->required();
  res->add_option("--codebook", re_codebook, "TLCB codebook")->required();
  res->add_option("--out", re_out, "output WAV")->required();
  res->add_option("--gl-iters", re_iters, "Griffin-Lim iterations");
  res->add_option("--trace", re_trace, "write convergence trace CSV");

  // bitrate
  CommonFlags c_bit;
  std::string br_manifest, br_coding = "entropy";
  double br_smoothing = 0.5;
  auto* bit = app.add_subcommand("bitrate", "report corpus bitrates");
  c_bit.attach(bit);
  bit->add_option("--manifest", br_manifest, "preprocess manifest")->required();
  bit->add_option("--coding", br_coding, "fixed | entropy");
  bit->add_option("--smoothing-k", br_smoothing, "unigram add-k");

  // probe
  CommonFlags c_probe;
  std::string pr_audio, pr_csv;
  std::vector<std::string> pr_codebooks;
  std::size_t pr_epochs = 0;
  double pr_lr = 0.0;
  unsigned pr_workers = 1;
  auto* probe = app.add_subcommand("probe", "speaker probing experiment");
  c_probe.attach(probe);
  probe->add_option("--audio", pr_audio, "corpus with speaker subdirectories")
      ->required();
  probe->add_option("--codebook", pr_codebooks, "TLCB codebooks (repeatable)");
  probe->add_option("--epochs", pr_epochs, "probe training epochs");
  probe->add_option("--lr", pr_lr, "probe learning rate");
  probe->add_option("--csv", pr_csv, "also write rows as CSV");
  probe->add_option("--workers", pr_workers, "worker threads");

  // lm-train
  CommonFlags c_lm;
  std::vector<std::string> lm_streams;
  std::string lm_dir, lm_codebook, lm_out;
  std::size_t lm_vocab = 0, lm_order = 3;
  double lm_k = 0.1;
  auto* lm = app.add_subcommand("lm-train", "train a unit n-gram model");
  c_lm.attach(lm);
  lm->add_option("--streams", lm_streams, "stream dump files");
  lm->add_option("--streams-dir", lm_dir, "directory of .units dumps");
  lm->add_option("--vocab", lm_vocab, "vocabulary size");
  lm->add_option("--codebook", lm_codebook, "TLCB to take the vocab from");
  lm->add_option("--order", lm_order, "n-gram order");
  lm->add_option("--smoothing-k", lm_k, "add-k smoothing");
  lm->add_option("--out", lm_out, "output TLLM path")->required();

  // continue
  CommonFlags c_cont;
  std::string co_input, co_codebook, co_model, co_durations, co_out;
  double co_temperature = 1.0;
  std::size_t co_max_len = 100, co_iters = 0;
  auto* cont = app.add_subcommand("continue", "sampled speech continuation");
  c_cont.attach(cont);
  cont->add_option("--input", co_input, "prompt WAV")->required();
  cont->add_option("--codebook", co_codebook, "TLCB codebook")->required();
  cont->add_option("--model", co_model, "TLLM unit language model")->required();
  cont->add_option("--durations", co_durations,
                   "unit duration table JSON (default: <model>.durs.json)");
  cont->add_option("--out", co_out, "output WAV")->required();
  cont->add_option("--temperature", co_temperature, "sampling temperature");
  cont->add_option("--max-len", co_max_len, "max sampled units");
  cont->add_option("--gl-iters", co_iters, "Griffin-Lim iterations");

  // make-demo-corpus
  CommonFlags c_demo;
  std::string dm_out;
  std::size_t dm_files = 20, dm_speakers = 4;
  double dm_seconds = 1.5;
  auto* demo = app.add_subcommand("make-demo-corpus",
                                  "write a synthetic speech-like corpus");
  c_demo.attach(demo);
  demo->add_option("--out", dm_out, "output directory")->required();
  demo->add_option("--files", dm_files, "number of files");
  demo->add_option("--seconds", dm_seconds, "seconds per file");
  demo->add_option("--speakers", dm_speakers, "number of synthetic speakers");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      return run_train_kmeans(c_train, tk_audio, tk_features, tk_k, tk_cap,
                              tk_workers, tk_out);
    }
    if (pre->parsed()) {
      return run_preprocess(c_pre, pp_audio, pp_out, pp_codebook, pp_norm,
                            pp_prefix, pp_coding, pp_workers, pp_warn_only);
    }
    if (enc->parsed()) {
      return run_encode(c_enc, en_input, en_codebook, en_out, en_streams,
                        en_model, en_norm, en_prefix, en_coding);
    }
    if (dec->parsed()) return run_decode(c_dec, de_input, de_model, de_out);
    if (res->parsed()) {
      return run_resynth(c_res, re_input, re_codebook, re_out, re_iters,
                         re_trace);
    }
    if (bit->parsed()) {
      return run_bitrate(c_bit, br_manifest, br_coding, br_smoothing);
    }
    if (probe->parsed()) {
      return run_probe(c_probe, pr_audio, pr_codebooks, pr_epochs, pr_lr,
                       pr_csv, pr_workers);
    }
    if (lm->parsed()) {
      return run_lm_train(c_lm, lm_streams, lm_dir, lm_vocab, lm_codebook,
                          lm_order, lm_k, lm_out);
    }
    if (cont->parsed()) {
      return run_continue(c_cont, co_input, co_codebook, co_model,
                          co_durations, co_out, co_temperature, co_max_len,
                          co_iters);
    }
    if (demo->parsed()) {
      return run_demo_corpus(c_demo, dm_out, dm_files, dm_seconds, dm_speakers);
    }
  } catch (const Error& e) {
    std::cerr << "unit-codec: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "unit-codec: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
