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

#ifndef QHARMA_MODIFICATION_HPP_
#define QHARMA_MODIFICATION_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qharma/analysis.hpp"
#include "qharma/arma.hpp"
#include "qharma/pitch.hpp"
#include "qharma/signal.hpp"
#include "qharma/synthesis.hpp"

namespace qharma {

// Per-frame time-scale and pitch-scale factors with the voicing mask and the
// modified time axis.
struct ScaleSchedule {
  std::vector<double> beta;
  std::vector<double> rho;
  std::vector<std::uint8_t> voiced;
  std::vector<double> times;  // modified frame times, times[0] = 0

  std::size_t size() const { return beta.size(); }
  void Validate() const;

  static ScaleSchedule Identity(const F0Track& track);
  static ScaleSchedule Constant(const F0Track& track, double beta, double rho);
};

// t^_0 = 0, t^_l = t^_{l-1} + beta_l (t_l - t_{l-1}). Written as
// (t_l - t_0) + sum (beta_i - 1)(t_i - t_{i-1}) so unit factors give t_l - t_0
// exactly.
std::vector<double> ScaledTimes(std::span<const double> centers,
                                std::span<const double> betas);

// Breakpoints "time beta rho", linearly interpolated onto the frame centers
// with endpoint hold. Lines starting with '#' are comments.
struct ScheduleBreakpoint {
  double time = 0.0;
  double beta = 1.0;
  double rho = 1.0;
};

std::vector<ScheduleBreakpoint> ReadScheduleFile(const std::string& path);
std::vector<ScheduleBreakpoint> ParseSchedule(const std::string& text);
ScaleSchedule ScheduleFromBreakpoints(const F0Track& track,
                                      std::span<const ScheduleBreakpoint> points);

// One oscillator bank: frequencies (held through inactive knots) and a 0/1
// gate per knot.
struct Bank {
  FrameMatrix freqs;
  FrameMatrix gate;
};

struct BankPair {
  Bank voiced;    // rho_l * k * f0_l on voiced frames
  Bank unvoiced;  // k * unvoiced_f0 on unvoiced frames
  std::vector<std::size_t> k_orig;  // rule count of voiced frames
  std::vector<std::size_t> k_mod;   // live voiced components after scaling
  std::vector<double> gain_scale;   // sqrt(k_orig / k_mod), 0 if k_mod == 0
};

BankPair ScaledFreqs(const F0Track& track, const ScaleSchedule& schedule,
                     int sample_rate, const HarmonicRule& rule = {});

struct BankTables {
  FrameMatrix voiced;
  FrameMatrix unvoiced;
};

// Gate * |H| at the bank frequencies, with the voiced gain scaled by
// gain_scale.
BankTables ModifiedAmplitudes(const ArmaCascade& cascade,
                              const ScaleSchedule& schedule,
                              const BankPair& banks);

// Excitation phase with the beta factors plus the summed phase delay at the
// bank frequencies.
BankTables ModifiedPhases(const ArmaCascade& cascade,
                          const ScaleSchedule& schedule, const BankPair& banks);

struct ModifyReport {
  double duration = 0.0;           // seconds
  std::size_t silenced_frames = 0; // voiced frames with no harmonic left
};

// Voiced and unvoiced banks rendered on the modified time axis and summed.
SignalBuffer Modify(const ArmaCascade& cascade, const F0Track& track,
                    const ScaleSchedule& schedule,
                    const SynthesisOptions& options = {},
                    ModifyReport* report = nullptr);

}  // namespace qharma

#endif  // QHARMA_MODIFICATION_HPP_
