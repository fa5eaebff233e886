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

#include <cstddef>
#include <string>
#include <vector>

namespace unitcodec {

// Canonical mono waveform. Samples are in [-1, 1]; everything downstream
// works on this representation.
struct Waveform {
  std::vector<float> samples;
  int sample_rate = 0;

  double duration_seconds() const {
    return sample_rate > 0
               ? static_cast<double>(samples.size()) / sample_rate
               : 0.0;
  }
};

struct ReadStats {
  std::size_t clamped_samples = 0;  // float inputs outside [-1, 1]
};

// Reads a RIFF/WAVE file holding PCM16, PCM32 or IEEE float32 data.
// Multi-channel input is mixed down by channel mean; integer PCM is scaled
// by the type's max magnitude. Out-of-range float samples are clamped and
// counted in `stats`.
Waveform read_wav(const std::string& path, ReadStats* stats = nullptr);

// Writes a canonical 44-byte-header PCM16 little-endian WAV file.
void write_wav(const Waveform& w, const std::string& path);

// Band-limited resampling with a Kaiser-windowed sinc kernel (32 taps).
// Output length is round(len * target / source); equal rates return the
// input unchanged.
Waveform resample(const Waveform& w, int target_rate);

}  // namespace unitcodec
