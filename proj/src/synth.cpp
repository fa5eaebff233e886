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

#include "unitcodec/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <vector>

namespace unitcodec {

namespace {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct Phone {
  double f1, f2, f3;  // formant centers, Hz
};

// A small shared inventory of vowel-like formant patterns.
constexpr std::array<Phone, 8> kPhones = {{
    {730, 1090, 2440},   // a
    {270, 2290, 3010},   // i
    {300, 870, 2240},    // u
    {530, 1840, 2480},   // e
    {570, 840, 2410},    // o
    {660, 1720, 2410},   // ae
    {490, 1350, 1690},   // er
    {640, 1190, 2390},   // uh
}};

double formant_gain(double freq, const Phone& phone) {
  auto peak = [&](double center, double bandwidth, double gain) {
    const double d = (freq - center) / bandwidth;
    return gain * std::exp(-0.5 * d * d);
  };
  return peak(phone.f1, 90.0, 1.0) + peak(phone.f2, 120.0, 0.6) +
         peak(phone.f3, 160.0, 0.25) + 0.02;
}

void apply_edge_ramp(std::vector<double>& segment, std::size_t ramp) {
  const std::size_t n = segment.size();
  for (std::size_t i = 0; i < std::min(ramp, n); ++i) {
    const double g = static_cast<double>(i) / static_cast<double>(ramp);
    segment[i] *= g;
    segment[n - 1 - i] *= g;
  }
}

}  // namespace

Waveform make_speech_like(int sample_rate, double seconds,
                          const SynthVoice& voice, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto total = static_cast<std::size_t>(seconds * sample_rate);
  Waveform w;
  w.sample_rate = sample_rate;
  w.samples.reserve(total);

  const std::size_t ramp = static_cast<std::size_t>(0.005 * sample_rate);

  // Segment types follow a fixed cycle and vowels draw from a shuffled
  // deck, so longer utterances cover the phone inventory evenly.
  const char kTypeCycle[] = {'v', 'v', 'f', 'v', 'v', 'v', 'f', 'p'};
  std::size_t type_index = 0;
  std::array<std::size_t, kPhones.size()> deck{};
  std::size_t deck_pos = deck.size();

  while (w.samples.size() < total) {
    const char type = kTypeCycle[type_index % sizeof(kTypeCycle)];
    ++type_index;
    const double seg_seconds = 0.10 + 0.06 * uniform01(rng);
    auto seg_len = static_cast<std::size_t>(seg_seconds * sample_rate);
    seg_len = std::min(seg_len, total - w.samples.size());
    if (seg_len == 0) break;
    std::vector<double> segment(seg_len, 0.0);

    if (type == 'v') {
      if (deck_pos == deck.size()) {
        for (std::size_t i = 0; i < deck.size(); ++i) deck[i] = i;
        for (std::size_t i = deck.size(); i > 1; --i) {
          std::swap(deck[i - 1], deck[rng() % i]);
        }
        deck_pos = 0;
      }
      const Phone& phone = kPhones[deck[deck_pos++]];
      const double f0 = voice.base_f0 * (0.98 + 0.04 * uniform01(rng));
      const int n_harmonics =
          static_cast<int>(std::floor(0.45 * sample_rate / f0));
      std::vector<double> amp, phase, omega;
      for (int h = 1; h <= n_harmonics; ++h) {
        const double freq = h * f0;
        const double tilt_gain =
            std::pow(10.0, voice.tilt / 20.0 * std::log2(freq / 500.0));
        amp.push_back(formant_gain(freq, phone) * tilt_gain / h);
        phase.push_back(2.0 * M_PI * uniform01(rng));
        omega.push_back(2.0 * M_PI * freq / sample_rate);
      }
      for (std::size_t i = 0; i < seg_len; ++i) {
        double sample = 0.0;
        for (std::size_t h = 0; h < amp.size(); ++h) {
          sample += amp[h] * std::sin(omega[h] * static_cast<double>(i) + phase[h]);
        }
        segment[i] = sample;
      }
    } else if (type == 'f') {
      // Fricative-like: first-difference noise (high-pass).
      double prev = 0.0;
      for (std::size_t i = 0; i < seg_len; ++i) {
        const double white = 2.0 * uniform01(rng) - 1.0;
        segment[i] = 0.4 * (white - prev);
        prev = white;
      }
    }
    // else: pause, leave zeros

    // Normalize segment loudness to a common level.
    double peak = 0.0;
    for (double v : segment) peak = std::max(peak, std::abs(v));
    if (peak > 0.0) {
      for (auto& v : segment) v *= 0.3 / peak;
    }
    apply_edge_ramp(segment, ramp);
    for (double v : segment) w.samples.push_back(static_cast<float>(v));
  }

  w.samples.resize(total, 0.0f);
  return w;
}

Waveform make_tone(int sample_rate, double seconds, double freq_hz,
                   double amplitude) {
  Waveform w;
  w.sample_rate = sample_rate;
  const auto n = static_cast<std::size_t>(seconds * sample_rate);
  w.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    w.samples[i] = static_cast<float>(
        amplitude * std::sin(2.0 * M_PI * freq_hz * i / sample_rate));
  }
  return w;
}

Waveform make_noise(int sample_rate, double seconds, std::uint64_t seed,
                    double amplitude) {
  std::mt19937_64 rng(seed);
  Waveform w;
  w.sample_rate = sample_rate;
  const auto n = static_cast<std::size_t>(seconds * sample_rate);
  w.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    w.samples[i] = static_cast<float>(amplitude * (2.0 * uniform01(rng) - 1.0));
  }
  return w;
}

}  // namespace unitcodec
