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

#include "qharma/spectrogram.hpp"

#include <cmath>

#include "qharma/error.hpp"

namespace qharma {

Spectrogram PseudoStft(const FrameMatrix& frequencies, double sigma,
                       std::span<const double> bin_frequencies) {
  Require(sigma > 0.0, "pseudo-STFT sigma must be positive");
  Spectrogram out;
  out.bin_frequencies.assign(bin_frequencies.begin(), bin_frequencies.end());
  out.values = FrameMatrix(frequencies.frames(), bin_frequencies.size());
  const double half_s2 = 0.5 * sigma * sigma;
  for (std::size_t l = 0; l < frequencies.frames(); ++l) {
    const auto freqs = frequencies.row(l);
    for (std::size_t b = 0; b < bin_frequencies.size(); ++b) {
      const double w = bin_frequencies[b];
      double s = std::exp(-half_s2 * w * w);
      for (const double f : freqs) {
        if (f == 0.0) continue;
        const double c = kTwoPi * f;
        s += std::exp(-half_s2 * (w - c) * (w - c)) +
             std::exp(-half_s2 * (w + c) * (w + c));
      }
      out.values(l, b) = s;
    }
  }
  return out;
}

}  // namespace qharma
