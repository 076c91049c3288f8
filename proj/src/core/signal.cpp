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

#include "qharma/signal.hpp"

#include <cmath>
#include <limits>

#include "qharma/error.hpp"

namespace qharma {

double SignalBuffer::duration() const {
  return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate
                         : 0.0;
}

void SignalBuffer::Validate() const {
  Require(sample_rate > 0, "sample rate must be positive");
  for (std::size_t n = 0; n < samples.size(); ++n) {
    if (!std::isfinite(samples[n])) {
      Fail(ErrorCode::kNumerical,
           "non-finite sample at index " + std::to_string(n));
    }
  }
}

const char* WindowKindName(WindowKind kind) {
  switch (kind) {
    case WindowKind::kHann: return "hann";
    case WindowKind::kHamming: return "hamming";
    case WindowKind::kGaussian: return "gaussian";
  }
  return "hann";
}

WindowKind ParseWindowKind(const std::string& name) {
  if (name == "hann") return WindowKind::kHann;
  if (name == "hamming") return WindowKind::kHamming;
  if (name == "gaussian") return WindowKind::kGaussian;
  Fail(ErrorCode::kInvalidArgument, "unknown window kind '" + name + "'");
}

std::vector<double> MakeWindow(WindowKind kind, std::size_t length,
                               double gaussian_sigma) {
  Require(length >= 3, "window length must be at least 3 samples");
  std::vector<double> w(length);
  const double denom = static_cast<double>(length - 1);
  const double half = 0.5 * denom;
  for (std::size_t n = 0; n < length; ++n) {
    const double x = static_cast<double>(n);
    switch (kind) {
      case WindowKind::kHann:
        w[n] = 0.5 - 0.5 * std::cos(kTwoPi * x / denom);
        break;
      case WindowKind::kHamming:
        w[n] = 0.54 - 0.46 * std::cos(kTwoPi * x / denom);
        break;
      case WindowKind::kGaussian: {
        Require(gaussian_sigma > 0.0, "gaussian sigma must be positive");
        const double u = (x - half) / (gaussian_sigma * half);
        w[n] = std::exp(-0.5 * u * u);
        break;
      }
    }
  }
  // Force exact symmetry; cos() is not bit-symmetric about the midpoint.
  for (std::size_t n = 0; n < length / 2; ++n) w[length - 1 - n] = w[n];
  return w;
}

std::size_t FrameGrid::WindowLength(int sample_rate) const {
  const auto half =
      static_cast<std::size_t>(std::llround(half_window * sample_rate));
  return 2 * half + 1;
}

void FrameGrid::Validate(int sample_rate) const {
  Require(sample_rate > 0, "sample rate must be positive");
  Require(frame_shift > 0.0, "frame shift must be positive");
  Require(2.0 * half_window * sample_rate >= 3.0,
          "analysis window must span at least 3 samples");
  const double period = 1.0 / sample_rate;
  for (std::size_t l = 1; l < centers.size(); ++l) {
    const double step = centers[l] - centers[l - 1];
    Require(step > 0.0, "frame centers must be strictly increasing");
    Require(std::abs(step - frame_shift) <= period,
            "frame centers must be spaced by the frame shift");
  }
}

FrameGrid FrameGrid::Uniform(std::size_t num_frames, double frame_shift,
                             double half_window, WindowSpec window) {
  FrameGrid grid;
  grid.frame_shift = frame_shift;
  grid.half_window = half_window;
  grid.window = window;
  grid.centers.resize(num_frames);
  for (std::size_t l = 0; l < num_frames; ++l) {
    grid.centers[l] = static_cast<double>(l) * frame_shift;
  }
  return grid;
}

FrameGrid FrameGrid::Covering(std::size_t num_samples, int sample_rate,
                              double frame_shift, double half_window,
                              WindowSpec window) {
  Require(sample_rate > 0, "sample rate must be positive");
  Require(frame_shift > 0.0, "frame shift must be positive");
  if (num_samples == 0) return Uniform(0, frame_shift, half_window, window);
  const double end = static_cast<double>(num_samples) / sample_rate;
  const auto frames =
      static_cast<std::size_t>(std::ceil(end / frame_shift - 1e-9)) + 1;
  return Uniform(frames, frame_shift, half_window, window);
}

bool SameGrid(const FrameGrid& a, const FrameGrid& b, double tolerance) {
  if (a.size() != b.size()) return false;
  for (std::size_t l = 0; l < a.size(); ++l) {
    if (std::abs(a.centers[l] - b.centers[l]) > tolerance) return false;
  }
  return true;
}

std::vector<double> FrameMatrix::column(std::size_t k) const {
  std::vector<double> out(frames_);
  for (std::size_t l = 0; l < frames_; ++l) out[l] = (*this)(l, k);
  return out;
}

double WrapPhase(double phase) {
  double w = std::remainder(phase, kTwoPi);
  if (w <= -kPi) w += kTwoPi;
  return w;
}

}  // namespace qharma
