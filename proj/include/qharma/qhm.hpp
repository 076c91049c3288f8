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

#ifndef QHARMA_QHM_HPP_
#define QHARMA_QHM_HPP_

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "qharma/signal.hpp"

namespace qharma {

// One windowed analysis frame. With FrameEdge::kZeroPad, samples outside the
// source signal carry zero weight; with kSlideInside the window is moved
// inside the signal and the times stay relative to the requested center.
struct AnalysisFrame {
  std::vector<double> samples;
  std::vector<double> weights;
  std::vector<double> times;  // t_n - t_l, seconds
  std::size_t origin = 0;     // index of the sample nearest the frame center
  int sample_rate = 0;

  std::size_t size() const { return samples.size(); }
};

enum class FrameEdge { kZeroPad, kSlideInside };

// kSlideInside falls back to zero padding when the signal is shorter than
// the window.
AnalysisFrame ExtractFrame(const SignalBuffer& buffer, double center_time,
                           std::span<const double> window,
                           FrameEdge edge = FrameEdge::kZeroPad);

// Frame whose center is the midpoint of `samples`.
AnalysisFrame MakeCenteredFrame(std::span<const double> samples,
                                std::span<const double> window,
                                int sample_rate);

struct LsOptions {
  // Estimated condition number of the column-equilibrated normal matrix
  // above which ridge regularization kicks in.
  double condition_limit = 1e10;
  // Ridge lambda relative to the trace of the equilibrated normal matrix.
  double ridge_scale = 1e-8;
};

// Per-frame solution of the quasi-harmonic model
//   x(t) = sum_k 2 Re[(a_k + t b_k) e^{i 2 pi f_k t}]
// (components at -f_k are the implied conjugates).
struct QhmFrameParams {
  std::size_t frame_index = 0;
  std::vector<double> f_hat;
  std::vector<std::complex<double>> a;
  std::vector<std::complex<double>> b;
  bool regularized = false;
  double condition_estimate = 0.0;
  double residual_energy = 0.0;  // sum w^2 (x - model)^2
  double signal_energy = 0.0;    // sum w^2 x^2

  std::size_t size() const { return a.size(); }
};

// Stationary QHM least squares. Requires frame.size() >= 4K, distinct
// frequencies in (0, Nyquist). Exactly harmonic frequency sets
// (f_k = k f_1) take a fast path that builds the normal equations from
// O(K N) trigonometric moments.
QhmFrameParams QhmLsFit(const AnalysisFrame& frame,
                        std::span<const double> f_hats,
                        std::size_t frame_index = 0,
                        const LsOptions& options = {});

// Reference implementation of QhmLsFit that always assembles the full
// design matrix. Used to cross-check the harmonic fast path.
QhmFrameParams QhmLsFitDirect(const AnalysisFrame& frame,
                              std::span<const double> f_hats,
                              std::size_t frame_index = 0,
                              const LsOptions& options = {});

// Nonstationary basis for the adaptive models: per component, the phase
// Phi_k(t_n) (Phi_k(0) = 0) and optionally an amplitude ratio
// A_k(t_l + t_n) / A_k(t_l). Empty `gain` means unit gain (aQHM).
struct AdaptiveBasis {
  std::vector<std::vector<double>> phase;
  std::vector<std::vector<double>> gain;
};

QhmFrameParams QhmLsFitAdaptive(const AnalysisFrame& frame,
                                const AdaptiveBasis& basis,
                                std::span<const double> center_freqs,
                                std::size_t frame_index = 0,
                                const LsOptions& options = {});

// Reconstruction of the frame from fitted parameters under the same basis.
std::vector<double> QhmModel(const AnalysisFrame& frame,
                             const QhmFrameParams& params,
                             const AdaptiveBasis* basis = nullptr);

constexpr double kAmplitudeFloor = 1e-7;

struct FrequencyCorrection {
  std::vector<double> eta;        // Hz
  std::vector<bool> undefined;    // |a_k| at or below the amplitude floor
};

// eta_k = (aR bI - aI bR) / (2 pi |a|^2).
FrequencyCorrection CorrectFrequencies(const QhmFrameParams& params,
                                       double amplitude_floor = kAmplitudeFloor);

struct AmpPhase {
  double amplitude = 0.0;
  double phase = 0.0;  // (-pi, pi], 0 when the amplitude is at the floor
};

AmpPhase FramewiseAmpPhase(std::complex<double> a,
                           double amplitude_floor = kAmplitudeFloor);

// phi(t_i) = origin_phase + cumulative trapezoid of 2 pi f from
// times[origin] to times[i] (forward and backward).
std::vector<double> IntegratePhase(std::span<const double> times,
                                   std::span<const double> freqs_hz,
                                   std::size_t origin, double origin_phase);

enum class SmoothingInterval {
  kCurrentFrame,   // sine argument spans [t_l, t_{l+1}]
  kPreviousFrame,  // sine argument spans [t_{l-1}, t_l]
};

struct SmoothedPhase {
  std::vector<double> phase;
  long wraps = 0;              // M
  double z = 0.0;
  double integrated_end = 0.0; // phi~(t_{l+1})
};

// Integrates the frequency track over [times.front(), times.back()] from
// start_phase and bends it with a half-sine frequency correction so that the
// end lands on target_phase + 2 pi M, M chosen as the nearest wrap count.
SmoothedPhase SmoothPhase(double start_phase, double target_phase,
                          std::span<const double> times,
                          std::span<const double> freqs_hz,
                          SmoothingInterval interval =
                              SmoothingInterval::kCurrentFrame,
                          double previous_center = 0.0);

}  // namespace qharma

#endif  // QHARMA_QHM_HPP_
