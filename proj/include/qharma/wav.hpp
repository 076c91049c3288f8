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

#ifndef QHARMA_WAV_HPP_
#define QHARMA_WAV_HPP_

#include <cstddef>
#include <string>

#include "qharma/signal.hpp"

namespace qharma {

enum class WavFormat { kFloat32, kPcm16 };

enum class ClipPolicy {
  kClip,   // hard-clip to [-1, 1] and count the clipped samples
  kError,  // refuse to write out-of-range samples
};

struct WavWriteOptions {
  WavFormat format = WavFormat::kFloat32;
  ClipPolicy clip = ClipPolicy::kClip;
};

struct WavWriteReport {
  std::size_t clipped_samples = 0;
};

// Reads RIFF/WAVE PCM-16 or IEEE float-32 (plain or extensible headers).
// Multichannel input is averaged to mono. PCM-16 is scaled by 1/32768.
SignalBuffer ReadWav(const std::string& path);

WavWriteReport WriteWav(const SignalBuffer& buffer, const std::string& path,
                        const WavWriteOptions& options = {});

}  // namespace qharma

#endif  // QHARMA_WAV_HPP_
