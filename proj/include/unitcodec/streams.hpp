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
#include <optional>
#include <string>
#include <vector>

#include "unitcodec/pitch.hpp"
#include "unitcodec/quantizer.hpp"

namespace unitcodec {

// Three aligned streams over run-length segments: deduped units, durations
// in frames, and per-segment pitch (mean normalized log-F0 over the voiced
// frames of the run).
struct EncodedUtterance {
  std::vector<std::uint32_t> units;      // no two consecutive equal
  std::vector<std::uint32_t> durations;  // frames, all >= 1
  std::vector<float> pitch;
  std::vector<std::uint8_t> pitch_voiced;
  double frame_rate = 0.0;
  std::size_t vocab = 0;

  std::size_t n_segments() const { return units.size(); }
  std::uint64_t total_frames() const {
    std::uint64_t total = 0;
    for (auto d : durations) total += d;
    return total;
  }
};

// Collapses maximal runs. With a pitch track (same frame rate, length within
// one frame of the unit stream) each segment carries the mean of the voiced
// normalized values in its run, or an unvoiced flag when the run has none.
EncodedUtterance dedup(const UnitSequence& u,
                       const std::optional<PitchTrack>& p = std::nullopt);

struct InflatedStreams {
  UnitSequence units;
  PitchTrack pitch;  // segment values broadcast to every frame of the run
};

// Exact inverse of dedup on the unit stream; pitch comes back as per-run
// means (the only lossy channel).
InflatedStreams inflate(const EncodedUtterance& e);

// Rate conversion for pitch tracks: integer-factor downsampling averages the
// voiced frames of each block; upsampling replicates the nearest frame.
// target_len, when given, reconciles an off-by-one length difference by edge
// replication or truncation.
PitchTrack align_pitch(const PitchTrack& p, double target_frame_rate,
                       std::optional<std::size_t> target_len = std::nullopt);

// Textual dump: `unit:duration:pitch` triples space-separated, `~` for an
// unvoiced segment; one line per utterance.
std::string format_streams(const EncodedUtterance& e);
EncodedUtterance parse_streams(const std::string& line, std::size_t vocab,
                               double frame_rate);

void write_streams_line(const EncodedUtterance& e, std::ostream& out);

}  // namespace unitcodec
