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

#ifndef QHARMA_SIGNAL_HPP_
#define QHARMA_SIGNAL_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace qharma {

// Mono waveform. Samples are nominally in [-1, 1].
struct SignalBuffer {
  std::vector<double> samples;
  int sample_rate = 0;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double duration() const;
  double nyquist() const { return 0.5 * sample_rate; }

  // Throws if the rate is not positive or a sample is not finite.
  void Validate() const;
};

enum class WindowKind { kHann, kHamming, kGaussian };

const char* WindowKindName(WindowKind kind);
WindowKind ParseWindowKind(const std::string& name);

struct WindowSpec {
  WindowKind kind = WindowKind::kHann;
  // Gaussian standard deviation relative to the half length of the window.
  double gaussian_sigma = 0.4;
};

// Symmetric window of `length` (>= 3) samples: w[0] == w[length - 1].
std::vector<double> MakeWindow(WindowKind kind, std::size_t length,
                               double gaussian_sigma = 0.4);
inline std::vector<double> MakeWindow(const WindowSpec& spec,
                                      std::size_t length) {
  return MakeWindow(spec.kind, length, spec.gaussian_sigma);
}

// Frame centers t_l (seconds), evenly spaced by frame_shift, each owning an
// analysis window of 2 * half_window seconds.
struct FrameGrid {
  std::vector<double> centers;
  double frame_shift = 0.005;
  double half_window = 0.01;
  WindowSpec window;

  std::size_t size() const { return centers.size(); }
  bool empty() const { return centers.empty(); }

  // Odd sample count 2 * round(half_window * fs) + 1.
  std::size_t WindowLength(int sample_rate) const;

  void Validate(int sample_rate) const;

  // Centers at l * frame_shift for l = 0 .. num_frames - 1.
  static FrameGrid Uniform(std::size_t num_frames, double frame_shift,
                           double half_window, WindowSpec window = {});

  // Centers l * frame_shift up to the first one at or after num_samples /
  // sample_rate, so a synthesis over the grid spans the whole buffer.
  static FrameGrid Covering(std::size_t num_samples, int sample_rate,
                            double frame_shift, double half_window,
                            WindowSpec window = {});
};

bool SameGrid(const FrameGrid& a, const FrameGrid& b, double tolerance);

// Dense row-major frames x components table used for all framewise
// quantities (frequencies, amplitudes, phases).
class FrameMatrix {
 public:
  FrameMatrix() = default;
  FrameMatrix(std::size_t frames, std::size_t components, double fill = 0.0)
      : frames_(frames), components_(components),
        data_(frames * components, fill) {}

  std::size_t frames() const { return frames_; }
  std::size_t components() const { return components_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t l, std::size_t k) {
    return data_[l * components_ + k];
  }
  double operator()(std::size_t l, std::size_t k) const {
    return data_[l * components_ + k];
  }
  std::span<double> row(std::size_t l) {
    return {data_.data() + l * components_, components_};
  }
  std::span<const double> row(std::size_t l) const {
    return {data_.data() + l * components_, components_};
  }
  std::vector<double> column(std::size_t k) const;

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  bool operator==(const FrameMatrix&) const = default;

 private:
  std::size_t frames_ = 0;
  std::size_t components_ = 0;
  std::vector<double> data_;
};

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

// Wraps to (-pi, pi].
double WrapPhase(double phase);

}  // namespace qharma

#endif  // QHARMA_SIGNAL_HPP_
