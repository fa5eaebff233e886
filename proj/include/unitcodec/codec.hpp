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
#include <string>
#include <vector>

#include "unitcodec/streams.hpp"

namespace unitcodec {

// Pitch channel quantization: 8-bit uniform over [-1.5, 1.5] log-ratio,
// code 255 reserved for unvoiced segments.
inline constexpr double kPitchLo = -1.5;
inline constexpr double kPitchHi = 1.5;
inline constexpr unsigned kPitchLevels = 255;  // value codes 0..254
inline constexpr unsigned kPitchUnvoicedCode = 255;
inline constexpr double kPitchStep = (kPitchHi - kPitchLo) / (kPitchLevels - 1);

struct UnigramModel {
  std::vector<double> probs;  // smoothed, strictly positive, sums to 1
  std::vector<std::uint64_t> support_count;
  std::uint64_t total = 0;
  double smoothing_k = 0.5;

  std::size_t vocab() const { return probs.size(); }
};

// Add-k estimate over the unit streams: P(u) = (count(u)+k) / (total+kK).
UnigramModel fit_unigram(const std::vector<EncodedUtterance>& corpus,
                         double smoothing_k = 0.5);

// Shannon entropy in bits per token.
double entropy_bits(const UnigramModel& m);

// (n/l) * ceil(log2 K) — fixed-width accounting.
double bitrate_fixed(std::uint64_t n_tokens, double seconds, std::size_t vocab);

// (n/l) * H(m) — unigram-entropy accounting.
double bitrate_entropy(std::uint64_t n_tokens, double seconds,
                       const UnigramModel& m);

std::uint64_t unigram_fingerprint(const UnigramModel& m);

// Canonical Huffman code over the model's vocabulary.
struct HuffmanCode {
  std::vector<std::uint8_t> lengths;
  std::vector<std::uint64_t> codes;  // canonical value, MSB-first

  double expected_length(const std::vector<double>& probs) const;
};

HuffmanCode build_huffman(const std::vector<double>& probs);

enum class CodingMode : std::uint8_t { kFixed = 0, kEntropy = 1 };

// Self-describing serialized utterance. Units are fixed-width or canonical
// Huffman, durations Elias-gamma, pitch 8-bit quantized; all MSB-first.
struct Bitstream {
  std::uint8_t version = 1;
  CodingMode mode = CodingMode::kFixed;
  bool has_pitch = true;
  std::uint16_t vocab = 0;
  float frame_rate = 0.0f;
  std::uint32_t n_segments = 0;
  std::uint64_t model_fingerprint = 0;  // zero in fixed mode
  std::vector<std::uint8_t> payload;

  // Encode-time measurements; not part of the wire format.
  struct Stats {
    std::uint64_t unit_bits = 0;
    std::uint64_t duration_bits = 0;
    std::uint64_t pitch_bits = 0;
    std::size_t pitch_clamped = 0;  // values outside [-1.5, 1.5]
  } stats;
};

Bitstream encode_bitstream(const EncodedUtterance& e,
                           const UnigramModel* m = nullptr,
                           bool include_pitch = true);

EncodedUtterance decode_bitstream(const Bitstream& b,
                                  const UnigramModel* m = nullptr);

// TLUC container: magic "TLUC", u8 version, u8 coding_mode, u8 flags,
// u16 K, f32 frame_rate, u32 n_segments, u64 model fingerprint, payload.
std::vector<std::uint8_t> serialize_bitstream(const Bitstream& b);
Bitstream parse_bitstream(const std::uint8_t* data, std::size_t size);

void save_bitstream(const Bitstream& b, const std::string& path);
Bitstream load_bitstream(const std::string& path);

struct BitrateReport {
  std::uint64_t n_tokens = 0;
  double audio_seconds = 0.0;
  std::size_t vocab = 0;
  double fixed_bits_per_sec = 0.0;
  double entropy_bits_per_sec = 0.0;
  double actual_bits_per_sec = 0.0;  // measured payload, headers excluded
  struct {
    std::uint64_t unit_bits = 0;
    std::uint64_t duration_bits = 0;
    std::uint64_t pitch_bits = 0;
  } breakdown;
};

BitrateReport bitrate_report(const std::vector<EncodedUtterance>& corpus,
                             const UnigramModel& m,
                             const std::vector<double>& audio_seconds,
                             CodingMode mode = CodingMode::kEntropy,
                             bool include_pitch = true);

}  // namespace unitcodec
