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

#ifndef QHARMA_SYNTHESIS_HPP_
#define QHARMA_SYNTHESIS_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "qharma/analysis.hpp"
#include "qharma/arma.hpp"
#include "qharma/pitch.hpp"
#include "qharma/signal.hpp"

namespace qharma {

struct SynthesisOptions {
  HarmonicRule rule;
  int threads = 1;
};

// Knots with gate 0 take the frequency of the previous live knot of the same
// component (the next one before the first live knot). Components that are
// never live are left untouched.
void HoldFrequencies(FrameMatrix& freqs, const FrameMatrix& gate);

// Mutes knots whose frequency is not in (0, limit] and holds their
// frequency for phase accumulation.
void MuteAndHold(FrameMatrix& freqs, FrameMatrix& amps, double limit);

// phi_u(t_0) = 0, phi_u(t_l) = phi_u(t_{l-1})
//   + pi beta_l (f_{l-1} + f_l)(t_l - t_{l-1}); beta defaults to 1.
FrameMatrix ExcitationPhase(const FrameMatrix& freqs,
                            std::span<const double> times,
                            std::span<const double> betas = {});

// Adds the running sum of compensations (|value| <= pi) to the excitation.
FrameMatrix CompensatedPhase(const FrameMatrix& excitation,
                             const FrameMatrix& compensations);

// Adds the summed section phase angles of each frame's cascade at `freqs`.
FrameMatrix DelayedPhase(const FrameMatrix& excitation,
                         const ArmaCascade& cascade, const FrameMatrix& freqs);

// Oscillator bank: monotone cubic phase and linear amplitude between knots,
// x(n) = sum_k 2 A_k cos(phi_k), accumulated in ascending k. Output covers
// samples 0 .. floor(knot_times.back() * fs). Columns whose amplitude is zero
// at every knot are skipped.
SignalBuffer Render(const FrameMatrix& amps, const FrameMatrix& phases,
                    std::span<const double> knot_times, int sample_rate,
                    int threads = 1);

// Excitation phase of the stored frequencies, cumulative compensations,
// render.
SignalBuffer SynthesizeQhm(const HarmonicSet& set,
                           const SynthesisOptions& options = {});

// Harmonic grid k * f0 (dense unvoiced grid on unvoiced frames) sampled
// through the cascade: amplitudes |H|, phases excitation + phase delay.
SignalBuffer SynthesizeArma(const ArmaCascade& cascade, const F0Track& track,
                            const SynthesisOptions& options = {});

}  // namespace qharma

#endif  // QHARMA_SYNTHESIS_HPP_
