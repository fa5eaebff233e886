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
#include <iosfwd>
#include <vector>

#include "unitcodec/audio_io.hpp"

namespace unitcodec {

// Per-frame F0 stream. Raw tracks store Hz in `values` (0 for unvoiced
// frames); normalized tracks store log-ratios, with the voicing carried by
// the mask alone.
struct PitchTrack {
  std::vector<float> values;
  std::vector<std::uint8_t> voiced;
  double frame_rate = 0.0;
  bool normalized = false;

  std::size_t size() const { return values.size(); }
};

struct PitchConfig {
  double f_lo = 60.0;   // Hz, search band low edge
  double f_hi = 400.0;  // Hz, search band high edge
  double threshold = 0.15;  // YIN cumulative-mean-difference voicing cutoff
};

struct SpeakerStats {
  double mean_log_f0 = 0.0;  // natural-log Hz over voiced frames
  double std_log_f0 = 0.0;
  std::size_t n_voiced_frames = 0;
};

// YIN-style tracker: per frame, cumulative-mean-normalized difference over
// lags [sr/f_hi, sr/f_lo]; a frame is voiced iff the minimum is below the
// threshold, with f0 from the parabolic-interpolated arg-min lag.
PitchTrack track_pitch(const Waveform& w, int frame_rate,
                       const PitchConfig& cfg = {});

// Mean/std of log(f0) over voiced frames only; needs >= 10 voiced frames.
SpeakerStats speaker_stats(const std::vector<PitchTrack>& tracks);

// Voiced frames become log(f0) - mean_log_f0; the voicing mask is preserved.
PitchTrack normalize_per_speaker(const PitchTrack& t, const SpeakerStats& s);

// As per-speaker normalization, with the mean estimated from the first
// prefix_seconds of the track (needs >= 5 voiced frames there).
PitchTrack normalize_prefix(const PitchTrack& t, double prefix_seconds);

// One JSON object per line: {"frame":i,"voiced":b,"value":v}.
void dump_pitch_jsonl(const PitchTrack& t, std::ostream& out);

}  // namespace unitcodec
