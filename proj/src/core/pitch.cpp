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

#include "qharma/pitch.hpp"

#include <algorithm>
#include <cmath>

#include "qharma/error.hpp"

namespace qharma {

void F0Track::Validate() const {
  if (values.size() != grid.size()) {
    Fail(ErrorCode::kDimensionMismatch, "f0 track length differs from its grid");
  }
  for (double v : values) {
    Require(std::isfinite(v) && v >= 0.0, "f0 values must be finite and >= 0");
  }
}

F0Track DetectF0(const SignalBuffer& buffer, const FrameGrid& grid,
                 const PitchOptions& options) {
  if (buffer.empty()) Fail(ErrorCode::kInvalidArgument, "cannot track pitch of an empty buffer");
  buffer.Validate();
  const double fs = buffer.sample_rate;
  Require(options.f0_min > 0.0 && options.f0_max > options.f0_min &&
              options.f0_max < 0.25 * fs,
          "f0 range must satisfy 0 < min < max < Nyquist / 2");

  const long lag_min = std::max<long>(2, static_cast<long>(std::floor(fs / options.f0_max)));
  const long lag_max = static_cast<long>(std::ceil(fs / options.f0_min));
  const long width = std::max<long>(static_cast<long>(grid.WindowLength(buffer.sample_rate)), lag_max);
  const long span = width + lag_max + 1;
  const long n = static_cast<long>(buffer.size());
  const double* x = buffer.samples.data();

  F0Track track;
  track.grid = grid;
  track.values.assign(grid.size(), 0.0);
  std::vector<double> nccf(static_cast<std::size_t>(lag_max + 2), 0.0);

  for (std::size_t l = 0; l < grid.size(); ++l) {
    const long center = std::lround(grid.centers[l] * fs);
    long start = center - span / 2;
    start = std::clamp(start, 0L, std::max(0L, n - span));
    const long avail = std::min(span, n - start);
    const long w = std::min(width, avail - lag_min - 1);
    if (w < 2) continue;

    double e0 = 0.0;
    for (long i = 0; i < w; ++i) e0 += x[start + i] * x[start + i];
    if (e0 / static_cast<double>(w) < options.energy_floor) continue;

    // Sliding energy of the lagged segment.
    const long top = std::min(lag_max + 1, avail - w);
    double el = 0.0;
    for (long i = 0; i < w; ++i) el += x[start + lag_min + i] * x[start + lag_min + i];
    double best = -1.0;
    for (long tau = lag_min; tau <= top; ++tau) {
      if (tau > lag_min) {
        const double out = x[start + tau - 1];
        const double in = x[start + tau + w - 1];
        el += in * in - out * out;
      }
      double r = 0.0;
      const double* a = x + start;
      const double* b = x + start + tau;
      for (long i = 0; i < w; ++i) r += a[i] * b[i];
      const double den = std::sqrt(e0 * std::max(el, 0.0));
      nccf[static_cast<std::size_t>(tau)] = den > 0.0 ? r / den : 0.0;
      best = std::max(best, nccf[static_cast<std::size_t>(tau)]);
    }
    if (best < options.voicing_threshold) continue;

    long pick = -1;
    for (long tau = lag_min; tau <= top; ++tau) {
      const double v = nccf[static_cast<std::size_t>(tau)];
      if (v < 0.9 * best) continue;
      const bool left = tau == lag_min || v >= nccf[static_cast<std::size_t>(tau - 1)];
      const bool right = tau == top || v >= nccf[static_cast<std::size_t>(tau + 1)];
      if (left && right) {
        pick = tau;
        break;
      }
    }
    if (pick < 0) continue;
    double lag = static_cast<double>(pick);
    if (pick > lag_min && pick < top) {
      const double ym = nccf[static_cast<std::size_t>(pick - 1)];
      const double y0 = nccf[static_cast<std::size_t>(pick)];
      const double yp = nccf[static_cast<std::size_t>(pick + 1)];
      const double den = ym - 2.0 * y0 + yp;
      if (den < 0.0) lag += std::clamp(0.5 * (ym - yp) / den, -0.5, 0.5);
    }
    const double f0 = fs / lag;
    if (f0 >= options.f0_min && f0 <= options.f0_max) track.values[l] = f0;
  }
  return track;
}

}  // namespace qharma
