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

#include "unitcodec/audio_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "unitcodec/error.hpp"

namespace unitcodec {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatIeeeFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xfffe;

std::uint32_t read_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

std::uint16_t read_u16le(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | p[1] << 8);
}

void append_u32le(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void append_u16le(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

// Zeroth-order modified Bessel function, by power series.
double bessel_i0(double x) {
  double sum = 1.0, term = 1.0;
  const double half_x = x / 2.0;
  for (int k = 1; k < 64; ++k) {
    term *= (half_x / k) * (half_x / k);
    sum += term;
    if (term < sum * 1e-16) break;
  }
  return sum;
}

}  // namespace

Waveform read_wav(const std::string& path, ReadStats* stats) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);

  std::string contents((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::IoError, "read failure on " + path);
  const auto* bytes = reinterpret_cast<const unsigned char*>(contents.data());
  const std::size_t size = contents.size();

  if (size < 12 || std::memcmp(bytes, "RIFF", 4) != 0 ||
      std::memcmp(bytes + 8, "WAVE", 4) != 0) {
    throw Error(ErrorCode::CorruptHeader, path + " is not a RIFF/WAVE file");
  }

  // Scan chunks; only fmt and data matter, anything else is skipped.
  std::uint16_t format = 0, channels = 0, bits_per_sample = 0;
  std::uint32_t sample_rate = 0;
  bool have_fmt = false;
  std::size_t data_offset = 0, data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= size) {
    const std::uint32_t chunk_size = read_u32le(bytes + pos + 4);
    if (std::memcmp(bytes + pos, "fmt ", 4) == 0) {
      if (pos + 8 + chunk_size > size || chunk_size < 16) {
        throw Error(ErrorCode::CorruptHeader, "truncated fmt chunk in " + path);
      }
      format = read_u16le(bytes + pos + 8);
      channels = read_u16le(bytes + pos + 10);
      sample_rate = read_u32le(bytes + pos + 12);
      bits_per_sample = read_u16le(bytes + pos + 22);
      if (format == kFormatExtensible && chunk_size >= 40) {
        // Sub-format GUID starts with the effective format tag.
        format = read_u16le(bytes + pos + 8 + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(bytes + pos, "data", 4) == 0) {
      data_offset = pos + 8;
      data_size = std::min<std::size_t>(chunk_size, size - data_offset);
      break;
    }
    pos += 8 + chunk_size + (chunk_size & 1);  // chunks are word-aligned
  }

  if (!have_fmt || data_offset == 0) {
    throw Error(ErrorCode::CorruptHeader, "missing fmt/data chunk in " + path);
  }
  if (channels == 0 || sample_rate == 0) {
    throw Error(ErrorCode::CorruptHeader, "bad fmt fields in " + path);
  }

  const bool pcm16 = format == kFormatPcm && bits_per_sample == 16;
  const bool pcm32 = format == kFormatPcm && bits_per_sample == 32;
  const bool f32 = format == kFormatIeeeFloat && bits_per_sample == 32;
  if (!pcm16 && !pcm32 && !f32) {
    throw Error(ErrorCode::UnsupportedFormat,
                path + ": only PCM16, PCM32 and float32 WAV are supported");
  }

  const std::size_t bytes_per_sample = bits_per_sample / 8;
  const std::size_t frame_bytes = bytes_per_sample * channels;
  const std::size_t n_frames = data_size / frame_bytes;
  const unsigned char* data = bytes + data_offset;

  Waveform w;
  w.sample_rate = static_cast<int>(sample_rate);
  w.samples.resize(n_frames);
  std::size_t clamped = 0;

  for (std::size_t i = 0; i < n_frames; ++i) {
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      const unsigned char* p = data + i * frame_bytes + c * bytes_per_sample;
      if (pcm16) {
        std::int16_t v;
        std::memcpy(&v, p, 2);
        acc += v / 32768.0;
      } else if (pcm32) {
        std::int32_t v;
        std::memcpy(&v, p, 4);
        acc += v / 2147483648.0;
      } else {
        float v;
        std::memcpy(&v, p, 4);
        if (!std::isfinite(v)) v = 0.0f;
        if (v > 1.0f || v < -1.0f) {
          ++clamped;
          v = std::clamp(v, -1.0f, 1.0f);
        }
        acc += v;
      }
    }
    w.samples[i] = static_cast<float>(acc / channels);
  }

  if (stats) stats->clamped_samples = clamped;
  return w;
}

void write_wav(const Waveform& w, const std::string& path) {
  const std::uint32_t n = static_cast<std::uint32_t>(w.samples.size());
  const std::uint32_t data_bytes = n * 2;

  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  append_u32le(out, 36 + data_bytes);
  out += "WAVE";
  out += "fmt ";
  append_u32le(out, 16);
  append_u16le(out, kFormatPcm);
  append_u16le(out, 1);  // mono
  append_u32le(out, static_cast<std::uint32_t>(w.sample_rate));
  append_u32le(out, static_cast<std::uint32_t>(w.sample_rate) * 2);
  append_u16le(out, 2);   // block align
  append_u16le(out, 16);  // bits per sample
  out += "data";
  append_u32le(out, data_bytes);

  for (float s : w.samples) {
    const double scaled = std::round(static_cast<double>(s) * 32768.0);
    const auto v = static_cast<std::int16_t>(
        std::clamp(scaled, -32768.0, 32767.0));
    append_u16le(out, static_cast<std::uint16_t>(v));
  }

  std::ofstream of(path, std::ios::binary | std::ios::trunc);
  if (!of) throw Error(ErrorCode::IoError, "cannot create " + path);
  of.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!of) throw Error(ErrorCode::IoError, "write failure on " + path);
}

Waveform resample(const Waveform& w, int target_rate) {
  if (target_rate <= 0) {
    throw Error(ErrorCode::InvalidArgument, "target rate must be positive");
  }
  if (target_rate == w.sample_rate) return w;

  const double ratio = static_cast<double>(target_rate) / w.sample_rate;
  const std::size_t out_len =
      static_cast<std::size_t>(std::llround(w.samples.size() * ratio));

  Waveform out;
  out.sample_rate = target_rate;
  out.samples.resize(out_len);
  if (out_len == 0) return out;

  // Kaiser-windowed sinc, 32 taps. When downsampling the cutoff drops to the
  // output Nyquist.
  constexpr int kTaps = 32;
  constexpr double kBeta = 8.0;
  const double cutoff = std::min(1.0, ratio);
  const double i0_beta = bessel_i0(kBeta);
  const std::size_t in_len = w.samples.size();

  for (std::size_t j = 0; j < out_len; ++j) {
    const double center = static_cast<double>(j) / ratio;
    const auto left = static_cast<long long>(std::floor(center)) - kTaps / 2 + 1;
    double acc = 0.0, norm = 0.0;
    for (int t = 0; t < kTaps; ++t) {
      const long long n = left + t;
      const double x = center - static_cast<double>(n);
      const double u = x / (kTaps / 2);  // window support is [-1, 1]
      if (u < -1.0 || u > 1.0) continue;
      const double window = bessel_i0(kBeta * std::sqrt(1.0 - u * u)) / i0_beta;
      const double px = M_PI * cutoff * x;
      const double sinc = std::abs(px) < 1e-12 ? 1.0 : std::sin(px) / px;
      const double weight = cutoff * sinc * window;
      norm += weight;
      if (n >= 0 && n < static_cast<long long>(in_len)) {
        acc += weight * w.samples[static_cast<std::size_t>(n)];
      }
    }
    const double v = norm > 1e-12 ? acc / norm : 0.0;
    out.samples[j] = static_cast<float>(std::clamp(v, -1.0, 1.0));
  }
  return out;
}

}  // namespace unitcodec
