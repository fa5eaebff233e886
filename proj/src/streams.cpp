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

#include "unitcodec/streams.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "unitcodec/error.hpp"

namespace unitcodec {

namespace {

// Pads or trims the track by at most one frame so it matches the unit
// stream; anything larger is a caller bug.
PitchTrack reconcile_length(const PitchTrack& p, std::size_t target) {
  if (p.size() == target) return p;
  const auto diff = p.size() > target ? p.size() - target : target - p.size();
  if (diff > 1) {
    throw Error(ErrorCode::LengthMismatch,
                "pitch track length " + std::to_string(p.size()) +
                    " vs unit stream " + std::to_string(target));
  }
  PitchTrack out = p;
  if (p.size() > target) {
    out.values.resize(target);
    out.voiced.resize(target);
  } else if (target > 0) {
    const float v = p.size() ? p.values.back() : 0.0f;
    const std::uint8_t flag = p.size() ? p.voiced.back() : 0;
    out.values.push_back(v);
    out.voiced.push_back(flag);
  }
  return out;
}

}  // namespace

EncodedUtterance dedup(const UnitSequence& u,
                       const std::optional<PitchTrack>& p) {
  EncodedUtterance e;
  e.frame_rate = u.frame_rate;
  e.vocab = u.vocab;

  PitchTrack track;
  if (p) {
    if (std::abs(p->frame_rate - u.frame_rate) > 1e-9) {
      throw Error(ErrorCode::LengthMismatch,
                  "pitch frame rate differs from unit stream; align it first");
    }
    track = reconcile_length(*p, u.units.size());
  }

  std::size_t i = 0;
  while (i < u.units.size()) {
    std::size_t j = i + 1;
    while (j < u.units.size() && u.units[j] == u.units[i]) ++j;
    e.units.push_back(u.units[i]);
    e.durations.push_back(static_cast<std::uint32_t>(j - i));
    if (p) {
      double acc = 0.0;
      std::size_t voiced = 0;
      for (std::size_t f = i; f < j; ++f) {
        if (track.voiced[f]) {
          acc += track.values[f];
          ++voiced;
        }
      }
      if (voiced > 0) {
        e.pitch.push_back(static_cast<float>(acc / static_cast<double>(voiced)));
        e.pitch_voiced.push_back(1);
      } else {
        e.pitch.push_back(0.0f);
        e.pitch_voiced.push_back(0);
      }
    } else {
      e.pitch.push_back(0.0f);
      e.pitch_voiced.push_back(0);
    }
    i = j;
  }
  return e;
}

InflatedStreams inflate(const EncodedUtterance& e) {
  InflatedStreams out;
  out.units.frame_rate = e.frame_rate;
  out.units.vocab = e.vocab;
  out.pitch.frame_rate = e.frame_rate;
  out.pitch.normalized = true;

  for (std::size_t s = 0; s < e.n_segments(); ++s) {
    for (std::uint32_t r = 0; r < e.durations[s]; ++r) {
      out.units.units.push_back(e.units[s]);
      out.pitch.values.push_back(e.pitch[s]);
      out.pitch.voiced.push_back(e.pitch_voiced[s]);
    }
  }
  return out;
}

PitchTrack align_pitch(const PitchTrack& p, double target_frame_rate,
                       std::optional<std::size_t> target_len) {
  if (target_frame_rate <= 0.0) {
    throw Error(ErrorCode::InvalidArgument, "target frame rate must be positive");
  }

  PitchTrack out;
  if (std::abs(p.frame_rate - target_frame_rate) < 1e-9) {
    out = p;
  } else if (p.frame_rate > target_frame_rate) {
    const double factor = p.frame_rate / target_frame_rate;
    const auto m = static_cast<std::size_t>(std::llround(factor));
    if (m < 1 || std::abs(factor - static_cast<double>(m)) > 1e-9) {
      throw Error(ErrorCode::IncompatibleRates,
                  "downsampling supports integer rate factors only");
    }
    out.frame_rate = target_frame_rate;
    out.normalized = p.normalized;
    const std::size_t n_out = p.size() / m;
    for (std::size_t b = 0; b < n_out; ++b) {
      double acc = 0.0;
      std::size_t voiced = 0;
      for (std::size_t j = b * m; j < (b + 1) * m; ++j) {
        if (p.voiced[j]) {
          acc += p.values[j];
          ++voiced;
        }
      }
      out.values.push_back(
          voiced ? static_cast<float>(acc / static_cast<double>(voiced)) : 0.0f);
      out.voiced.push_back(voiced ? 1 : 0);
    }
  } else {
    // Upsampling: each input frame covers ratio^-1 output frames.
    const double ratio = p.frame_rate / target_frame_rate;
    out.frame_rate = target_frame_rate;
    out.normalized = p.normalized;
    const auto n_out = static_cast<std::size_t>(
        std::llround(p.size() * target_frame_rate / p.frame_rate));
    for (std::size_t j = 0; j < n_out; ++j) {
      auto src = static_cast<std::size_t>(std::floor(j * ratio));
      src = std::min(src, p.size() - 1);
      out.values.push_back(p.values[src]);
      out.voiced.push_back(p.voiced[src]);
    }
  }

  if (target_len) out = reconcile_length(out, *target_len);
  return out;
}

std::string format_streams(const EncodedUtterance& e) {
  std::string out;
  char buf[64];
  for (std::size_t s = 0; s < e.n_segments(); ++s) {
    if (s > 0) out.push_back(' ');
    if (e.pitch_voiced[s]) {
      std::snprintf(buf, sizeof(buf), "%u:%u:%.6g", e.units[s], e.durations[s],
                    static_cast<double>(e.pitch[s]));
    } else {
      std::snprintf(buf, sizeof(buf), "%u:%u:~", e.units[s], e.durations[s]);
    }
    out += buf;
  }
  return out;
}

void write_streams_line(const EncodedUtterance& e, std::ostream& out) {
  out << format_streams(e) << "\n";
}

EncodedUtterance parse_streams(const std::string& line, std::size_t vocab,
                               double frame_rate) {
  EncodedUtterance e;
  e.vocab = vocab;
  e.frame_rate = frame_rate;

  std::istringstream in(line);
  std::string triple;
  while (in >> triple) {
    const auto c1 = triple.find(':');
    const auto c2 = triple.find(':', c1 == std::string::npos ? 0 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
      throw Error(ErrorCode::InvalidArgument, "bad stream triple: " + triple);
    }
    const auto unit = static_cast<std::uint32_t>(
        std::stoul(triple.substr(0, c1)));
    const auto duration = static_cast<std::uint32_t>(
        std::stoul(triple.substr(c1 + 1, c2 - c1 - 1)));
    const std::string pitch = triple.substr(c2 + 1);
    if (vocab > 0 && unit >= vocab) {
      throw Error(ErrorCode::VocabMismatch,
                  "unit " + std::to_string(unit) + " >= vocab " +
                      std::to_string(vocab));
    }
    if (duration == 0) {
      throw Error(ErrorCode::InvalidArgument, "zero duration in: " + triple);
    }
    if (!e.units.empty() && e.units.back() == unit) {
      throw Error(ErrorCode::InvalidArgument,
                  "adjacent duplicate unit in stream line");
    }
    e.units.push_back(unit);
    e.durations.push_back(duration);
    if (pitch == "~") {
      e.pitch.push_back(0.0f);
      e.pitch_voiced.push_back(0);
    } else {
      e.pitch.push_back(std::stof(pitch));
      e.pitch_voiced.push_back(1);
    }
  }
  return e;
}

}  // namespace unitcodec
