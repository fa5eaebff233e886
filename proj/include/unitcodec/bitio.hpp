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
#include <vector>

#include "unitcodec/error.hpp"

namespace unitcodec {

// MSB-first bit packing; the final byte is zero-padded.
class BitWriter {
 public:
  void put(std::uint64_t value, unsigned n_bits) {
    for (unsigned i = n_bits; i > 0; --i) {
      put_bit((value >> (i - 1)) & 1);
    }
  }

  void put_bit(unsigned bit) {
    if (bit_pos_ == 0) bytes_.push_back(0);
    if (bit) bytes_.back() |= static_cast<std::uint8_t>(1u << (7 - bit_pos_));
    bit_pos_ = (bit_pos_ + 1) & 7;
    ++n_bits_;
  }

  std::uint64_t bit_count() const { return n_bits_; }
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
  unsigned bit_pos_ = 0;
  std::uint64_t n_bits_ = 0;
};

class BitReader {
 public:
  BitReader(const std::uint8_t* data, std::size_t n_bytes)
      : data_(data), n_bits_(static_cast<std::uint64_t>(n_bytes) * 8) {}

  unsigned get_bit() {
    if (pos_ >= n_bits_) {
      throw Error(ErrorCode::TruncatedPayload, "bitstream payload exhausted");
    }
    const unsigned bit = (data_[pos_ >> 3] >> (7 - (pos_ & 7))) & 1;
    ++pos_;
    return bit;
  }

  std::uint64_t get(unsigned n_bits) {
    std::uint64_t v = 0;
    for (unsigned i = 0; i < n_bits; ++i) v = (v << 1) | get_bit();
    return v;
  }

  std::uint64_t position() const { return pos_; }

 private:
  const std::uint8_t* data_;
  std::uint64_t n_bits_;
  std::uint64_t pos_ = 0;
};

// Elias gamma code for integers >= 1.
inline void put_elias_gamma(BitWriter& w, std::uint64_t value) {
  if (value == 0) {
    throw Error(ErrorCode::InvalidArgument, "gamma code needs value >= 1");
  }
  unsigned n_bits = 0;
  for (std::uint64_t v = value; v > 1; v >>= 1) ++n_bits;
  w.put(0, n_bits);
  w.put(value, n_bits + 1);
}

inline std::uint64_t get_elias_gamma(BitReader& r) {
  unsigned zeros = 0;
  while (r.get_bit() == 0) {
    if (++zeros > 63) {
      throw Error(ErrorCode::TruncatedPayload, "bad gamma code");
    }
  }
  std::uint64_t value = 1;
  for (unsigned i = 0; i < zeros; ++i) value = (value << 1) | r.get_bit();
  return value;
}

}  // namespace unitcodec
