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

#ifndef QHARMA_PITCH_HPP_
#define QHARMA_PITCH_HPP_

#include <cstddef>
#include <vector>

#include "qharma/signal.hpp"

namespace qharma {

// Framewise fundamental frequency; 0 marks an unvoiced frame.
struct F0Track {
  std::vector<double> values;
  FrameGrid grid;

  std::size_t size() const { return values.size(); }
  bool voiced(std::size_t l) const { return values[l] > 0.0; }
  void Validate() const;
};

struct PitchOptions {
  double f0_min = 50.0;
  double f0_max = 500.0;
  double voicing_threshold = 0.45;
  // Frames whose mean square is below this are unvoiced without a search.
  double energy_floor = 1e-10;
};

// Normalized cross-correlation pitch tracker. For each frame the NCCF is
// evaluated over lags fs/f0_max .. fs/f0_min on a segment centered at the
// frame; the shortest lag whose local maximum reaches 90% of the global
// maximum wins, refined by parabolic interpolation.
F0Track DetectF0(const SignalBuffer& buffer, const FrameGrid& grid,
                 const PitchOptions& options = {});

}  // namespace qharma

#endif  // QHARMA_PITCH_HPP_
