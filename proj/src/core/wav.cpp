/*
 * Copyright 2026 The qharma Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "qharma/wav.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include "qharma/error.hpp"

namespace qharma {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t ReadU32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t ReadU16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void PutU32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void PutU16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void PutTag(std::vector<std::uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

}  // namespace

SignalBuffer ReadWav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open '" + path + "'");
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    Fail(ErrorCode::kFormat, "'" + path + "' is not a RIFF/WAVE file");
  }

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const std::uint8_t* data = nullptr;
  std::size_t data_size = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::uint32_t size = ReadU32(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = std::min<std::size_t>(size, bytes.size() - body);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (avail < 16) Fail(ErrorCode::kFormat, "truncated fmt chunk");
      format = ReadU16(chunk + 8);
      channels = ReadU16(chunk + 10);
      rate = ReadU32(chunk + 12);
      bits = ReadU16(chunk + 22);
      if (format == kFormatExtensible) {
        if (avail < 26) Fail(ErrorCode::kFormat, "truncated extensible fmt chunk");
        // First two bytes of the subformat GUID carry the codec id.
        format = ReadU16(chunk + 8 + 24);
      }
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = chunk + 8;
      data_size = avail;
    }
    pos = body + size + (size & 1u);
  }
  if (format == 0 || data == nullptr) {
    Fail(ErrorCode::kFormat, "'" + path + "' lacks fmt or data chunk");
  }
  if (channels == 0 || rate == 0) {
    Fail(ErrorCode::kFormat, "invalid channel count or sample rate");
  }
  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool float32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !float32) {
    Fail(ErrorCode::kFormat, "unsupported codec (format " + std::to_string(format) +
                                 ", " + std::to_string(bits) + " bits)");
  }
  const std::size_t bytes_per_sample = bits / 8;
  const std::size_t frames = data_size / (bytes_per_sample * channels);
  if (frames == 0) Fail(ErrorCode::kFormat, "'" + path + "' has no audio");

  SignalBuffer out;
  out.sample_rate = static_cast<int>(rate);
  out.samples.resize(frames);
  for (std::size_t n = 0; n < frames; ++n) {
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      const std::uint8_t* p = data + (n * channels + c) * bytes_per_sample;
      if (pcm16) {
        acc += static_cast<std::int16_t>(ReadU16(p)) / 32768.0;
      } else {
        acc += std::bit_cast<float>(ReadU32(p));
      }
    }
    out.samples[n] = acc / channels;
  }
  return out;
}

WavWriteReport WriteWav(const SignalBuffer& buffer, const std::string& path,
                        const WavWriteOptions& options) {
  buffer.Validate();
  WavWriteReport report;
  const bool pcm16 = options.format == WavFormat::kPcm16;
  const std::uint16_t bits = pcm16 ? 16 : 32;
  const std::uint32_t data_bytes =
      static_cast<std::uint32_t>(buffer.size() * (bits / 8));

  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  PutTag(out, "RIFF");
  PutU32(out, 36 + data_bytes);
  PutTag(out, "WAVE");
  PutTag(out, "fmt ");
  PutU32(out, 16);
  PutU16(out, pcm16 ? kFormatPcm : kFormatFloat);
  PutU16(out, 1);
  PutU32(out, static_cast<std::uint32_t>(buffer.sample_rate));
  PutU32(out, static_cast<std::uint32_t>(buffer.sample_rate) * (bits / 8));
  PutU16(out, bits / 8);
  PutU16(out, bits);
  PutTag(out, "data");
  PutU32(out, data_bytes);

  for (std::size_t n = 0; n < buffer.size(); ++n) {
    double x = buffer.samples[n];
    if (x > 1.0 || x < -1.0) {
      if (options.clip == ClipPolicy::kError) {
        Fail(ErrorCode::kInvalidArgument,
             "sample " + std::to_string(n) + " is outside [-1, 1]");
      }
      x = std::clamp(x, -1.0, 1.0);
      ++report.clipped_samples;
    }
    if (pcm16) {
      const long q = std::lround(x * 32768.0);
      PutU16(out, static_cast<std::uint16_t>(
                      static_cast<std::int16_t>(std::clamp(q, -32768L, 32767L))));
    } else {
      PutU32(out, std::bit_cast<std::uint32_t>(static_cast<float>(x)));
    }
  }

  std::ofstream file(path, std::ios::binary);
  if (!file) Fail(ErrorCode::kIo, "cannot write '" + path + "'");
  file.write(reinterpret_cast<const char*>(out.data()),
             static_cast<std::streamsize>(out.size()));
  if (!file) Fail(ErrorCode::kIo, "short write to '" + path + "'");
  return report;
}

}  // namespace qharma
