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

#include "unitcodec/pitch.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <ostream>

#include "unitcodec/error.hpp"

namespace unitcodec {

namespace {

// Pairwise summation keeps the statistics exact on constant inputs of
// power-of-two length and O(log n)-accurate otherwise.
double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

double pairwise_mean(const std::vector<double>& x) {
  return pairwise_sum(x.data(), x.size()) / static_cast<double>(x.size());
}

std::vector<double> voiced_log_values(const PitchTrack& t, std::size_t limit) {
  std::vector<double> logs;
  const std::size_t n = std::min(limit, t.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (t.voiced[i]) logs.push_back(std::log(static_cast<double>(t.values[i])));
  }
  return logs;
}

PitchTrack subtract_mean(const PitchTrack& t, double mean_log_f0) {
  if (t.normalized) {
    throw Error(ErrorCode::InvalidArgument, "track is already normalized");
  }
  PitchTrack out;
  out.frame_rate = t.frame_rate;
  out.normalized = true;
  out.voiced = t.voiced;
  out.values.resize(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    out.values[i] =
        t.voiced[i]
            ? static_cast<float>(std::log(static_cast<double>(t.values[i])) -
                                 mean_log_f0)
            : 0.0f;
  }
  return out;
}

}  // namespace

PitchTrack track_pitch(const Waveform& w, int frame_rate,
                       const PitchConfig& cfg) {
  if (frame_rate <= 0 || w.sample_rate <= 0 ||
      w.sample_rate % frame_rate != 0) {
    throw Error(ErrorCode::InvalidArgument,
                "frame_rate must divide sample_rate evenly");
  }
  if (cfg.f_lo < 40.0) {
    throw Error(ErrorCode::InvalidArgument, "f_lo must be >= 40 Hz");
  }
  if (cfg.f_hi > w.sample_rate / 4.0 || cfg.f_hi <= cfg.f_lo) {
    throw Error(ErrorCode::InvalidArgument,
                "need f_lo < f_hi <= sample_rate / 4");
  }

  const double sr = w.sample_rate;
  const auto tau_min =
      std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(sr / cfg.f_hi)));
  const auto tau_max = static_cast<std::size_t>(std::floor(sr / cfg.f_lo));
  const std::size_t integration = tau_max;   // difference-function window
  const std::size_t span = integration + tau_max;
  const std::size_t hop = static_cast<std::size_t>(w.sample_rate / frame_rate);

  if (w.samples.size() < span) {
    throw Error(ErrorCode::InputTooShort,
                "waveform shorter than one pitch analysis frame");
  }
  const std::size_t n_frames = 1 + (w.samples.size() - span) / hop;

  PitchTrack track;
  track.frame_rate = frame_rate;
  track.values.assign(n_frames, 0.0f);
  track.voiced.assign(n_frames, 0);

  std::vector<double> diff(tau_max + 1);
  std::vector<double> cmnd(tau_max + 1);

  for (std::size_t t = 0; t < n_frames; ++t) {
    const float* x = w.samples.data() + t * hop;

    // Squared difference of the frame against its lagged self.
    diff[0] = 0.0;
    for (std::size_t tau = 1; tau <= tau_max; ++tau) {
      double acc = 0.0;
      for (std::size_t j = 0; j < integration; ++j) {
        const double delta =
            static_cast<double>(x[j]) - static_cast<double>(x[j + tau]);
        acc += delta * delta;
      }
      diff[tau] = acc;
    }

    // Cumulative mean normalization.
    cmnd[0] = 1.0;
    double running = 0.0;
    for (std::size_t tau = 1; tau <= tau_max; ++tau) {
      running += diff[tau];
      cmnd[tau] = running > 0.0 ? diff[tau] * static_cast<double>(tau) / running
                                : 1.0;
    }

    // Voicing from the band minimum; ties go to the smaller lag.
    std::size_t best = tau_min;
    for (std::size_t tau = tau_min + 1; tau <= tau_max; ++tau) {
      if (cmnd[tau] < cmnd[best]) best = tau;
    }
    if (cmnd[best] >= cfg.threshold) continue;  // leave frame unvoiced

    // Lag selection guards against period multiples: take the first dip
    // below the threshold and walk down to its local minimum.
    for (std::size_t tau = tau_min; tau <= tau_max; ++tau) {
      if (cmnd[tau] < cfg.threshold) {
        while (tau + 1 <= tau_max && cmnd[tau + 1] < cmnd[tau]) ++tau;
        best = tau;
        break;
      }
    }

    // Parabolic interpolation around the minimum.
    double refined = static_cast<double>(best);
    if (best > 1 && best < tau_max) {
      const double s0 = cmnd[best - 1], s1 = cmnd[best], s2 = cmnd[best + 1];
      const double denom = 2.0 * (2.0 * s1 - s2 - s0);
      if (std::abs(denom) > 1e-12) refined += (s2 - s0) / denom;
    }
    refined = std::clamp(refined, static_cast<double>(tau_min),
                         static_cast<double>(tau_max));
    track.values[t] = static_cast<float>(sr / refined);
    track.voiced[t] = 1;
  }
  return track;
}

SpeakerStats speaker_stats(const std::vector<PitchTrack>& tracks) {
  std::vector<double> logs;
  for (const auto& t : tracks) {
    if (t.normalized) {
      throw Error(ErrorCode::InvalidArgument,
                  "speaker stats need raw (Hz) tracks");
    }
    const auto part = voiced_log_values(t, t.size());
    logs.insert(logs.end(), part.begin(), part.end());
  }
  if (logs.size() < 10) {
    throw Error(ErrorCode::InsufficientVoicedFrames,
                "need at least 10 voiced frames, got " +
                    std::to_string(logs.size()));
  }

  SpeakerStats s;
  s.n_voiced_frames = logs.size();
  s.mean_log_f0 = pairwise_mean(logs);
  std::vector<double> sq(logs.size());
  for (std::size_t i = 0; i < logs.size(); ++i) {
    const double d = logs[i] - s.mean_log_f0;
    sq[i] = d * d;
  }
  s.std_log_f0 = std::sqrt(pairwise_mean(sq));
  return s;
}

PitchTrack normalize_per_speaker(const PitchTrack& t, const SpeakerStats& s) {
  return subtract_mean(t, s.mean_log_f0);
}

PitchTrack normalize_prefix(const PitchTrack& t, double prefix_seconds) {
  const auto prefix_frames = static_cast<std::size_t>(
      std::floor(prefix_seconds * t.frame_rate));
  const auto logs = voiced_log_values(t, prefix_frames);
  if (logs.size() < 5) {
    throw Error(ErrorCode::InsufficientVoicedFrames,
                "prefix holds only " + std::to_string(logs.size()) +
                    " voiced frames (need 5)");
  }
  return subtract_mean(t, pairwise_mean(logs));
}

void dump_pitch_jsonl(const PitchTrack& t, std::ostream& out) {
  for (std::size_t i = 0; i < t.size(); ++i) {
    out << "{\"frame\":" << i
        << ",\"voiced\":" << (t.voiced[i] ? "true" : "false")
        << ",\"value\":" << t.values[i] << "}\n";
  }
}

}  // namespace unitcodec
