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

#ifndef QHARMA_ANALYSIS_HPP_
#define QHARMA_ANALYSIS_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "qharma/pitch.hpp"
#include "qharma/qhm.hpp"
#include "qharma/signal.hpp"

namespace qharma {

// Component count per frame: floor((Nyquist - guard) / f0), with unvoiced
// frames placed on a fixed grid of `unvoiced_f0`.
struct HarmonicRule {
  double guard_hz = 50.0;
  double unvoiced_f0 = 100.0;

  double Limit(int sample_rate) const { return 0.5 * sample_rate - guard_hz; }
  double EffectiveF0(double f0) const { return f0 > 0.0 ? f0 : unvoiced_f0; }
  std::size_t Count(double f0, int sample_rate) const;
};

// Per-frame flags stored alongside a HarmonicSet.
enum HarmonicFrameFlag : std::uint8_t {
  kFrameRegularized = 1,      // ridge fallback in the least-squares solve
  kFrameAdaptiveRejected = 2, // an adaptive iteration failed on this frame
  kFrameTruncated = 4,        // K reduced to honour the 4K sample minimum
};

// Framewise quasi-harmonic parameters. Columns beyond a frame's component
// count hold zero frequency and amplitude.
struct HarmonicSet {
  FrameGrid grid;
  int sample_rate = 0;
  FrameMatrix freqs;          // Hz
  FrameMatrix amps;           // linear
  FrameMatrix phases;         // unwrapped, radians
  FrameMatrix compensations;  // radians, [-pi, pi]
  std::vector<double> f0;     // Hz, 0 for unvoiced frames
  std::vector<std::uint8_t> flags;

  std::size_t num_frames() const { return grid.size(); }
  std::size_t num_components() const { return freqs.components(); }
  std::size_t ComponentCount(std::size_t l) const;
  F0Track Track() const { return {f0, grid}; }
  void Validate() const;
};

enum class AdaptiveMode { kNone, kAqhm, kEaqhm };

const char* AdaptiveModeName(AdaptiveMode mode);
AdaptiveMode ParseAdaptiveMode(const std::string& name);

struct AnalysisOptions {
  double frame_shift = 0.005;
  double half_window = 0.01;
  WindowSpec window;
  HarmonicRule rule;
  PitchOptions pitch;
  LsOptions ls;
  // Replace each voiced f0 by the amplitude-weighted mean of f_k / k over
  // the corrected component frequencies.
  bool refine_f0 = true;
  AdaptiveMode adaptive = AdaptiveMode::kNone;
  int adaptive_iterations = 3;
  double adaptive_tolerance = 1e-4;
  int threads = 1;
};

// QHM analysis on a given f0 track: per frame, least squares on the harmonic
// grid k * f0, frequency correction, amplitudes and phases at the frame
// center, then phase compensations against the trapezoidal excitation
// phase of the stored frequencies.
HarmonicSet AnalyzeWithTrack(const SignalBuffer& buffer, const F0Track& track,
                             const AnalysisOptions& options = {});

struct RefineReport;

// Grid covering the buffer, pitch tracking, then AnalyzeTrackAndRefine.
HarmonicSet Analyze(const SignalBuffer& buffer,
                    const AnalysisOptions& options = {},
                    RefineReport* report = nullptr);

// AnalyzeWithTrack followed by adaptive refinement when options.adaptive is
// not kNone.
HarmonicSet AnalyzeTrackAndRefine(const SignalBuffer& buffer,
                                  const F0Track& track,
                                  const AnalysisOptions& options = {},
                                  RefineReport* report = nullptr);

// Recomputes unwrapped phases and compensations so that the compensated
// excitation phase reproduces the measured phases modulo 2 pi.
// `measured` holds wrapped framewise phases.
void AssignPhases(HarmonicSet& set, const FrameMatrix& measured,
                  double guard_hz);

struct RefineReport {
  // SNR of the QHM resynthesis before refinement and after every accepted
  // iteration.
  std::vector<double> snr_history;
  int iterations = 0;
  std::size_t rejected_frames = 0;
};

// aQHM / eaQHM refinement. Each iteration rebuilds the nonstationary basis
// from the current frequencies (and amplitudes for eaQHM), re-solves every
// frame, keeps frames whose residual decreased, and stops once the
// resynthesis SNR stops improving by more than the relative tolerance.
HarmonicSet RefineAdaptive(const SignalBuffer& buffer,
                           const HarmonicSet& initial, AdaptiveMode mode,
                           int max_iters, const AnalysisOptions& options = {},
                           RefineReport* report = nullptr);

}  // namespace qharma

#endif  // QHARMA_ANALYSIS_HPP_
