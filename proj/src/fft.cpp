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

#include "unitcodec/fft.hpp"

#include <cmath>

#include "unitcodec/error.hpp"

namespace unitcodec {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void fft(std::vector<std::complex<double>>& buf, bool inverse) {
  const std::size_t n = buf.size();
  if (n == 0) return;
  if (!is_power_of_two(n)) {
    throw Error(ErrorCode::InvalidArgument, "fft size must be a power of two");
  }

  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(buf[i], buf[j]);
  }

  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = sign * 2.0 * M_PI / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(angle), std::sin(angle));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        const std::complex<double> u = buf[i + j];
        const std::complex<double> v = buf[i + j + len / 2] * w;
        buf[i + j] = u + v;
        buf[i + j + len / 2] = u - v;
        w *= wlen;
      }
    }
  }

  if (inverse) {
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& x : buf) x *= scale;
  }
}

std::vector<std::complex<double>> rfft(const std::vector<double>& input) {
  std::vector<std::complex<double>> buf(input.size());
  for (std::size_t i = 0; i < input.size(); ++i) buf[i] = input[i];
  fft(buf, false);
  buf.resize(input.size() / 2 + 1);
  return buf;
}

std::vector<double> irfft(const std::vector<std::complex<double>>& half,
                          std::size_t n) {
  if (half.size() != n / 2 + 1) {
    throw Error(ErrorCode::DimensionMismatch, "irfft: spectrum/size mismatch");
  }
  std::vector<std::complex<double>> buf(n);
  for (std::size_t i = 0; i < half.size(); ++i) buf[i] = half[i];
  for (std::size_t i = half.size(); i < n; ++i) buf[i] = std::conj(buf[n - i]);
  fft(buf, true);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = buf[i].real();
  return out;
}

}  // namespace unitcodec
