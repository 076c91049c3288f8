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

#ifndef QHARMA_SPECTROGRAM_HPP_
#define QHARMA_SPECTROGRAM_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "qharma/signal.hpp"

namespace qharma {

struct Spectrogram {
  FrameMatrix values;                   // frames x bins
  std::vector<double> bin_frequencies;  // rad/s

  std::size_t frames() const { return values.frames(); }
  std::size_t bins() const { return values.components(); }
};

// Unit-amplitude Gaussian-lobe spectrogram of a harmonic frequency set:
//   S(t_l, w) = sum_{k=-K..K} exp(-sigma^2 (w - 2 pi f_k)^2 / 2)
// with f_0 = 0 and f_{-k} = -f_k. `frequencies` holds f_1..f_K (Hz) per
// frame; zero entries are treated as absent components. `sigma` is in
// seconds, bin frequencies in rad/s.
Spectrogram PseudoStft(const FrameMatrix& frequencies, double sigma,
                       std::span<const double> bin_frequencies);

}  // namespace qharma

#endif  // QHARMA_SPECTROGRAM_HPP_
