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

#ifndef QHARMA_ARMA_HPP_
#define QHARMA_ARMA_HPP_

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qharma/signal.hpp"

namespace qharma {

// One mini-ARMA section
//   H(w) = (1 + sum_q ma[q-1] e^{-iwq}) / (1 + sum_p ar[p-1] e^{-iwp}).
struct ArmaSection {
  std::vector<double> ar;
  std::vector<double> ma;

  bool operator==(const ArmaSection&) const = default;
};

struct ArmaOrders {
  int p = 128;
  int q = 128;
  int r = 8;

  int ar_per_section() const { return r > 0 ? p / r : 0; }
  int ma_per_section() const { return r > 0 ? q / r : 0; }
  int num_params() const { return p + q + 1; }
  void Validate() const;
  bool operator==(const ArmaOrders&) const = default;
};

ArmaOrders ParseOrders(const std::string& text);  // "P,Q,r"

// Cascade parameters of one frame: gain times the product of sections.
struct ArmaFrame {
  double gain = 1.0;
  std::vector<ArmaSection> sections;

  bool operator==(const ArmaFrame&) const = default;
};

ArmaFrame IdentityFrame(const ArmaOrders& orders, double gain = 1.0);

enum CascadeFrameFlag : std::uint8_t {
  kFitNonFinite = 1,
  kFitDegenerate = 2,
  kFitUnderdetermined = 4,
  kFitStalled = 8,
};

struct ArmaCascade {
  ArmaOrders orders;
  FrameGrid grid;
  int sample_rate = 0;
  std::vector<ArmaFrame> frames;
  std::vector<std::uint8_t> flags;
  std::vector<double> losses;

  std::size_t num_frames() const { return frames.size(); }
  void Validate() const;
};

// omega in radians per sample.
std::complex<double> SectionResponse(const ArmaSection& section, double omega);
std::complex<double> CascadeResponse(const ArmaFrame& frame, double omega);

// |H| and the summed per-section phase angles at each frequency.
struct EnvelopeSample {
  std::vector<double> magnitude;
  std::vector<double> delay;
};

EnvelopeSample SampleHarmonics(const ArmaFrame& frame,
                               std::span<const double> freqs_hz,
                               int sample_rate);

// Sections in index order with zero initial state, then the gain.
std::vector<double> FilterTimeDomain(const ArmaFrame& frame,
                                     std::span<const double> input);

// Roots of z^n + c[0] z^{n-1} + ... + c[n-1].
std::vector<std::complex<double>> PolynomialRoots(std::span<const double> c);

// Largest root modulus of the section's AR polynomial (0 if empty).
double MaxPoleRadius(const ArmaSection& section);

// Moves AR roots whose modulus exceeds `max_radius` radially to
// `target_radius`. Returns true when the polynomial changed.
bool ProjectStable(std::vector<double>& ar, double max_radius = 1.0 - 1e-4,
                   double target_radius = 0.995);

struct CorrectionCapacity {
  std::vector<double> per_frame;   // Hz, first entry 0
  std::vector<double> cumulative;  // Hz
  double bound = 0.0;              // r / frame_shift
  bool within_bound = true;
};

// Frequency offsets implied by frame-to-frame changes of the phase delay at
// one component, given that component's frequency at every frame.
CorrectionCapacity ComputeCorrectionCapacity(const ArmaCascade& cascade,
                                             std::span<const double> freqs_hz);

}  // namespace qharma

#endif  // QHARMA_ARMA_HPP_
