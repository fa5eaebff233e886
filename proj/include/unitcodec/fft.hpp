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

#include <complex>
#include <cstddef>
#include <vector>

namespace unitcodec {

bool is_power_of_two(std::size_t n);

// In-place radix-2 FFT; n must be a power of two. inverse=true applies the
// 1/n scale.
void fft(std::vector<std::complex<double>>& buf, bool inverse = false);

// DFT of a real signal, returned as the n/2+1 non-negative-frequency bins.
std::vector<std::complex<double>> rfft(const std::vector<double>& input);

// Inverse of rfft: expands conjugate symmetry and returns n real samples.
std::vector<double> irfft(const std::vector<std::complex<double>>& half,
                          std::size_t n);

}  // namespace unitcodec
