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

#include "unitcodec/audio_io.hpp"

namespace unitcodec {

// Parameters of a synthetic "voice": speakers differ by base F0 and by a
// mild spectral tilt applied on top of a shared phone inventory.
struct SynthVoice {
  double base_f0 = 120.0;  // Hz
  double tilt = 0.0;       // dB per octave relative to 500 Hz
};

// Speech-like test signal: a sequence of vowel-like harmonic segments,
// fricative-like noise bursts and short pauses, with 5 ms edge ramps.
// Deterministic given the seed. Used by the demo-corpus command and tests.
Waveform make_speech_like(int sample_rate, double seconds,
                          const SynthVoice& voice, std::uint64_t seed);

Waveform make_tone(int sample_rate, double seconds, double freq_hz,
                   double amplitude = 0.5);

Waveform make_noise(int sample_rate, double seconds, std::uint64_t seed,
                    double amplitude = 0.5);

}  // namespace unitcodec
