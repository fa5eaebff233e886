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

#include "unitcodec/codec.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "unitcodec/bitio.hpp"
#include "unitcodec/error.hpp"
#include "unitcodec/hash.hpp"

namespace unitcodec {

namespace {

unsigned ceil_log2(std::size_t k) {
  unsigned bits = 0;
  std::size_t v = 1;
  while (v < k) {
    v <<= 1;
    ++bits;
  }
  return bits;
}

unsigned quantize_pitch(float value, bool voiced, std::size_t* clamped) {
  if (!voiced) return kPitchUnvoicedCode;
  double v = value;
  if (v < kPitchLo || v > kPitchHi) {
    ++*clamped;
    v = std::clamp(v, kPitchLo, kPitchHi);
  }
  const auto q = static_cast<long>(std::lround((v - kPitchLo) / kPitchStep));
  return static_cast<unsigned>(std::clamp<long>(q, 0, kPitchLevels - 1));
}

float dequantize_pitch(unsigned code) {
  return static_cast<float>(kPitchLo + code * kPitchStep);
}

}  // namespace

UnigramModel fit_unigram(const std::vector<EncodedUtterance>& corpus,
                         double smoothing_k) {
  if (corpus.empty()) {
    throw Error(ErrorCode::EmptyCorpus, "unigram fit needs utterances");
  }
  if (smoothing_k < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "smoothing_k must be >= 0");
  }
  const std::size_t k = corpus.front().vocab;
  if (k < 2) throw Error(ErrorCode::InvalidArgument, "vocab must be >= 2");

  UnigramModel m;
  m.smoothing_k = smoothing_k;
  m.support_count.assign(k, 0);
  for (const auto& e : corpus) {
    if (e.vocab != k) {
      throw Error(ErrorCode::VocabMismatch, "mixed vocab sizes in corpus");
    }
    for (auto u : e.units) {
      if (u >= k) {
        throw Error(ErrorCode::VocabMismatch,
                    "unit " + std::to_string(u) + " out of vocabulary");
      }
      ++m.support_count[u];
      ++m.total;
    }
  }
  if (smoothing_k == 0.0) {
    for (auto c : m.support_count) {
      if (c == 0) {
        throw Error(ErrorCode::InvalidArgument,
                    "k=0 smoothing requires every unit to be observed");
      }
    }
  }

  m.probs.resize(k);
  const double denom = static_cast<double>(m.total) + smoothing_k * k;
  for (std::size_t u = 0; u < k; ++u) {
    m.probs[u] = (static_cast<double>(m.support_count[u]) + smoothing_k) / denom;
  }
  return m;
}

double entropy_bits(const UnigramModel& m) {
  double h = 0.0;
  for (double p : m.probs) {
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

double bitrate_fixed(std::uint64_t n_tokens, double seconds, std::size_t vocab) {
  if (seconds <= 0.0) {
    throw Error(ErrorCode::InvalidArgument, "duration must be positive");
  }
  return static_cast<double>(n_tokens) / seconds * ceil_log2(vocab);
}

double bitrate_entropy(std::uint64_t n_tokens, double seconds,
                       const UnigramModel& m) {
  if (seconds <= 0.0) {
    throw Error(ErrorCode::InvalidArgument, "duration must be positive");
  }
  return static_cast<double>(n_tokens) / seconds * entropy_bits(m);
}

std::uint64_t unigram_fingerprint(const UnigramModel& m) {
  std::uint64_t h = fnv1a64(m.support_count.data(),
                            m.support_count.size() * sizeof(std::uint64_t));
  h = fnv1a64(&m.total, sizeof(m.total), h);
  h = fnv1a64(&m.smoothing_k, sizeof(m.smoothing_k), h);
  const std::uint64_t k = m.vocab();
  return fnv1a64(&k, sizeof(k), h);
}

HuffmanCode build_huffman(const std::vector<double>& probs) {
  const std::size_t k = probs.size();
  if (k < 2) throw Error(ErrorCode::InvalidArgument, "huffman needs >= 2 symbols");

  struct Node {
    double weight;
    int left = -1, right = -1;
  };
  std::vector<Node> nodes;
  nodes.reserve(2 * k);

  // Two-queue construction over leaves sorted by (weight, symbol); merged
  // nodes are produced in non-decreasing weight order.
  std::vector<std::uint32_t> order(k);
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) {
                     if (probs[a] != probs[b]) return probs[a] < probs[b];
                     return a < b;
                   });

  for (std::size_t i = 0; i < k; ++i) {
    nodes.push_back({std::max(probs[order[i]], 1e-300)});
  }

  std::vector<int> q2;
  std::size_t head1 = 0, head2 = 0;
  auto pop_min = [&]() -> int {
    const bool has1 = head1 < k;
    const bool has2 = head2 < q2.size();
    if (has1 && (!has2 || nodes[static_cast<std::size_t>(head1)].weight <=
                              nodes[static_cast<std::size_t>(q2[head2])].weight)) {
      return static_cast<int>(head1++);
    }
    return q2[head2++];
  };
  for (std::size_t merges = 0; merges + 1 < k; ++merges) {
    const int a = pop_min();
    const int b = pop_min();
    Node parent{nodes[static_cast<std::size_t>(a)].weight +
                    nodes[static_cast<std::size_t>(b)].weight,
                a, b};
    q2.push_back(static_cast<int>(nodes.size()));
    nodes.push_back(parent);
  }

  // Depth-first walk for code lengths.
  HuffmanCode code;
  code.lengths.assign(k, 0);
  std::vector<std::pair<int, std::uint8_t>> stack{{static_cast<int>(nodes.size()) - 1, 0}};
  while (!stack.empty()) {
    const auto [idx, depth] = stack.back();
    stack.pop_back();
    const Node& node = nodes[static_cast<std::size_t>(idx)];
    if (node.left < 0) {
      // idx < k are leaves, in sorted order.
      code.lengths[order[static_cast<std::size_t>(idx)]] =
          std::max<std::uint8_t>(1, depth);
      continue;
    }
    if (depth >= 57) {
      throw Error(ErrorCode::InvalidArgument, "huffman code depth overflow");
    }
    stack.push_back({node.left, static_cast<std::uint8_t>(depth + 1)});
    stack.push_back({node.right, static_cast<std::uint8_t>(depth + 1)});
  }

  // Canonical assignment: symbols ordered by (length, symbol).
  std::vector<std::uint32_t> by_code(k);
  std::iota(by_code.begin(), by_code.end(), 0u);
  std::stable_sort(by_code.begin(), by_code.end(),
                   [&](std::uint32_t a, std::uint32_t b) {
                     if (code.lengths[a] != code.lengths[b]) {
                       return code.lengths[a] < code.lengths[b];
                     }
                     return a < b;
                   });
  code.codes.assign(k, 0);
  std::uint64_t next = 0;
  std::uint8_t prev_len = code.lengths[by_code[0]];
  for (std::size_t i = 0; i < k; ++i) {
    const std::uint32_t sym = by_code[i];
    next <<= (code.lengths[sym] - prev_len);
    code.codes[sym] = next;
    prev_len = code.lengths[sym];
    ++next;
  }
  return code;
}

double HuffmanCode::expected_length(const std::vector<double>& probs) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) acc += probs[i] * lengths[i];
  return acc;
}

namespace {

// Canonical decoding tables: first code value and symbol offset per length.
struct HuffmanDecoder {
  std::vector<std::uint64_t> first_code;   // per length
  std::vector<std::uint32_t> offset;       // per length
  std::vector<std::uint32_t> symbols;      // sorted by (length, symbol)
  std::uint8_t max_len = 0;

  explicit HuffmanDecoder(const HuffmanCode& code) {
    const std::size_t k = code.lengths.size();
    for (auto l : code.lengths) max_len = std::max(max_len, l);
    std::vector<std::uint32_t> count(max_len + 1, 0);
    for (auto l : code.lengths) ++count[l];

    symbols.resize(k);
    std::iota(symbols.begin(), symbols.end(), 0u);
    std::stable_sort(symbols.begin(), symbols.end(),
                     [&](std::uint32_t a, std::uint32_t b) {
                       if (code.lengths[a] != code.lengths[b]) {
                         return code.lengths[a] < code.lengths[b];
                       }
                       return a < b;
                     });

    first_code.assign(max_len + 1, 0);
    offset.assign(max_len + 1, 0);
    std::uint64_t c = 0;
    std::uint32_t off = 0;
    for (std::uint8_t len = 1; len <= max_len; ++len) {
      c <<= 1;
      first_code[len] = c;
      offset[len] = off;
      c += count[len];
      off += count[len];
    }
  }

  std::uint32_t decode(BitReader& reader) const {
    std::uint64_t value = 0;
    for (std::uint8_t len = 1; len <= max_len; ++len) {
      value = (value << 1) | reader.get_bit();
      const std::uint32_t count_len =
          (len == max_len
               ? static_cast<std::uint32_t>(symbols.size()) - offset[len]
               : offset[len + 1] - offset[len]);
      if (value >= first_code[len] && value - first_code[len] < count_len) {
        return symbols[offset[len] +
                       static_cast<std::uint32_t>(value - first_code[len])];
      }
    }
    throw Error(ErrorCode::TruncatedPayload, "invalid huffman code word");
  }
};

}  // namespace

Bitstream encode_bitstream(const EncodedUtterance& e, const UnigramModel* m,
                           bool include_pitch) {
  if (e.vocab < 2 || e.vocab > 0xffff) {
    throw Error(ErrorCode::InvalidArgument, "vocab must be in [2, 65535]");
  }
  const bool entropy = m != nullptr;
  if (entropy && m->vocab() != e.vocab) {
    throw Error(ErrorCode::ModelMismatch,
                "model vocab " + std::to_string(m->vocab()) +
                    " != utterance vocab " + std::to_string(e.vocab));
  }

  Bitstream b;
  b.mode = entropy ? CodingMode::kEntropy : CodingMode::kFixed;
  b.has_pitch = include_pitch;
  b.vocab = static_cast<std::uint16_t>(e.vocab);
  b.frame_rate = static_cast<float>(e.frame_rate);
  b.n_segments = static_cast<std::uint32_t>(e.n_segments());
  b.model_fingerprint = entropy ? unigram_fingerprint(*m) : 0;

  BitWriter w;
  if (entropy) {
    const HuffmanCode code = build_huffman(m->probs);
    for (auto u : e.units) {
      if (u >= e.vocab) {
        throw Error(ErrorCode::VocabMismatch, "unit out of vocabulary");
      }
      w.put(code.codes[u], code.lengths[u]);
    }
  } else {
    const unsigned width = ceil_log2(e.vocab);
    for (auto u : e.units) {
      if (u >= e.vocab) {
        throw Error(ErrorCode::VocabMismatch, "unit out of vocabulary");
      }
      w.put(u, width);
    }
  }
  b.stats.unit_bits = w.bit_count();

  for (auto d : e.durations) put_elias_gamma(w, d);
  b.stats.duration_bits = w.bit_count() - b.stats.unit_bits;

  if (include_pitch) {
    for (std::size_t s = 0; s < e.n_segments(); ++s) {
      w.put(quantize_pitch(e.pitch[s], e.pitch_voiced[s] != 0,
                           &b.stats.pitch_clamped),
            8);
    }
  }
  b.stats.pitch_bits = w.bit_count() - b.stats.unit_bits - b.stats.duration_bits;

  b.payload = w.take();
  return b;
}

EncodedUtterance decode_bitstream(const Bitstream& b, const UnigramModel* m) {
  if (b.version != 1) {
    throw Error(ErrorCode::VersionMismatch,
                "bitstream version " + std::to_string(b.version));
  }
  const bool entropy = b.mode == CodingMode::kEntropy;
  if (entropy) {
    if (m == nullptr) {
      throw Error(ErrorCode::ModelMismatch,
                  "entropy-coded stream needs the unigram model");
    }
    if (m->vocab() != b.vocab) {
      throw Error(ErrorCode::ModelMismatch, "model vocab differs from header");
    }
    if (unigram_fingerprint(*m) != b.model_fingerprint) {
      throw Error(ErrorCode::ModelFingerprintMismatch,
                  "unigram model is not the one used at encode time");
    }
  }

  EncodedUtterance e;
  e.vocab = b.vocab;
  e.frame_rate = b.frame_rate;
  BitReader r(b.payload.data(), b.payload.size());

  if (entropy) {
    const HuffmanCode code = build_huffman(m->probs);
    const HuffmanDecoder decoder(code);
    for (std::uint32_t i = 0; i < b.n_segments; ++i) {
      e.units.push_back(decoder.decode(r));
    }
  } else {
    const unsigned width = ceil_log2(b.vocab);
    for (std::uint32_t i = 0; i < b.n_segments; ++i) {
      const auto u = static_cast<std::uint32_t>(r.get(width));
      if (u >= b.vocab) {
        throw Error(ErrorCode::TruncatedPayload, "unit code out of range");
      }
      e.units.push_back(u);
    }
  }
  for (std::uint32_t i = 0; i < b.n_segments; ++i) {
    e.durations.push_back(static_cast<std::uint32_t>(get_elias_gamma(r)));
  }
  if (b.has_pitch) {
    for (std::uint32_t i = 0; i < b.n_segments; ++i) {
      const auto code = static_cast<unsigned>(r.get(8));
      if (code == kPitchUnvoicedCode) {
        e.pitch.push_back(0.0f);
        e.pitch_voiced.push_back(0);
      } else {
        e.pitch.push_back(dequantize_pitch(code));
        e.pitch_voiced.push_back(1);
      }
    }
  } else {
    e.pitch.assign(b.n_segments, 0.0f);
    e.pitch_voiced.assign(b.n_segments, 0);
  }
  return e;
}

std::vector<std::uint8_t> serialize_bitstream(const Bitstream& b) {
  std::vector<std::uint8_t> out;
  out.reserve(25 + b.payload.size());
  auto push_bytes = [&](const void* p, std::size_t n) {
    const auto* c = static_cast<const std::uint8_t*>(p);
    out.insert(out.end(), c, c + n);
  };
  push_bytes("TLUC", 4);
  out.push_back(b.version);
  out.push_back(static_cast<std::uint8_t>(b.mode));
  out.push_back(b.has_pitch ? 1 : 0);
  push_bytes(&b.vocab, 2);
  push_bytes(&b.frame_rate, 4);
  push_bytes(&b.n_segments, 4);
  push_bytes(&b.model_fingerprint, 8);
  push_bytes(b.payload.data(), b.payload.size());
  return out;
}

Bitstream parse_bitstream(const std::uint8_t* data, std::size_t size) {
  if (size < 4 || std::memcmp(data, "TLUC", 4) != 0) {
    throw Error(ErrorCode::BadMagic, "not a TLUC bitstream");
  }
  if (size < 25) {
    throw Error(ErrorCode::TruncatedPayload, "TLUC header truncated");
  }
  Bitstream b;
  b.version = data[4];
  b.mode = static_cast<CodingMode>(data[5]);
  b.has_pitch = data[6] != 0;
  std::memcpy(&b.vocab, data + 7, 2);
  std::memcpy(&b.frame_rate, data + 9, 4);
  std::memcpy(&b.n_segments, data + 13, 4);
  std::memcpy(&b.model_fingerprint, data + 17, 8);
  b.payload.assign(data + 25, data + size);
  return b;
}

void save_bitstream(const Bitstream& b, const std::string& path) {
  const auto bytes = serialize_bitstream(b);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot create " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "write failure on " + path);
}

Bitstream load_bitstream(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return parse_bitstream(bytes.data(), bytes.size());
}

BitrateReport bitrate_report(const std::vector<EncodedUtterance>& corpus,
                             const UnigramModel& m,
                             const std::vector<double>& audio_seconds,
                             CodingMode mode, bool include_pitch) {
  if (corpus.empty()) {
    throw Error(ErrorCode::EmptyCorpus, "bitrate report needs utterances");
  }
  if (corpus.size() != audio_seconds.size()) {
    throw Error(ErrorCode::LengthMismatch,
                "one duration per utterance required");
  }

  BitrateReport report;
  report.vocab = corpus.front().vocab;
  std::uint64_t payload_bits = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (audio_seconds[i] <= 0.0) {
      throw Error(ErrorCode::InvalidArgument, "non-positive audio duration");
    }
    report.n_tokens += corpus[i].n_segments();
    report.audio_seconds += audio_seconds[i];
    const Bitstream b = encode_bitstream(
        corpus[i], mode == CodingMode::kEntropy ? &m : nullptr, include_pitch);
    report.breakdown.unit_bits += b.stats.unit_bits;
    report.breakdown.duration_bits += b.stats.duration_bits;
    report.breakdown.pitch_bits += b.stats.pitch_bits;
    payload_bits += static_cast<std::uint64_t>(b.payload.size()) * 8;
  }

  report.fixed_bits_per_sec =
      bitrate_fixed(report.n_tokens, report.audio_seconds, report.vocab);
  report.entropy_bits_per_sec =
      bitrate_entropy(report.n_tokens, report.audio_seconds, m);
  report.actual_bits_per_sec =
      static_cast<double>(payload_bits) / report.audio_seconds;
  return report;
}

}  // namespace unitcodec
