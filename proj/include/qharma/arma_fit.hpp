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

#ifndef QHARMA_ARMA_FIT_HPP_
#define QHARMA_ARMA_FIT_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "qharma/analysis.hpp"
#include "qharma/arma.hpp"

namespace qharma {

enum class FitMethod { kLevenbergMarquardt, kGradientDescent };

const char* FitMethodName(FitMethod method);
FitMethod ParseFitMethod(const std::string& name);

struct FitOptions {
  FitMethod method = FitMethod::kLevenbergMarquardt;
  double epsilon = 1e-7;       // amplitude floor inside the logs
  double phase_weight = 0.1;   // lambda_phi
  int max_steps = 500;
  // Stop when an accepted step lowers the loss by less than this fraction.
  double tolerance = 1e-10;
  // Stop once the mean squared residual falls to this level.
  double target_loss = 1e-8;
  // Consecutive failed steps after which the optimizer gives up.
  int max_rejections = 10;
  double max_pole_radius = 1.0 - 1e-4;
  double projection_radius = 0.995;
  // Unless the all-zero start already meets target_loss, section j starts
  // from a pole pair of this radius at angle pi (j + 1/2) / r; 0 disables.
  double seed_radius = 0.5;
  // Fits whose mean squared residual stays above restart_loss are rerun
  // from rotated seed angles, up to max_restarts times; the best one wins.
  double restart_loss = 1e-3;
  int max_restarts = 4;
};

// Component frequencies (Hz), amplitudes, and the phases the cascade should
// impose on the excitation.
struct FitTarget {
  std::vector<double> freqs_hz;
  std::vector<double> amplitudes;
  std::vector<double> phases;
  int sample_rate = 0;

  std::size_t size() const { return freqs_hz.size(); }
  void Validate() const;
};

struct FitResult {
  ArmaFrame frame;
  double initial_loss = 0.0;
  double loss = 0.0;
  int steps = 0;
  std::uint8_t flags = 0;
  std::vector<double> loss_history;  // after each accepted step
};

// sum_k (ln(A_k + eps) - ln(|H_k| + eps))^2
//     + lambda_phi * wrap(phi_k - angle H_k)^2,
// the phase term dropped for components at or below eps.
double FitLoss(const ArmaFrame& frame, const FitTarget& target,
               const FitOptions& options = {});

// Parameters are ln G and the section coefficients, starting from zero
// coefficients and G = mean target amplitude, then from seeded poles. Every
// trial point is projected onto stable AR polynomials before its loss is
// evaluated, and only steps that lower the loss are taken.
FitResult FitFrame(const FitTarget& target, const ArmaOrders& orders,
                   const FitOptions& options = {});

// Targets of every frame of a harmonic set on the synthesis grid (k * f0, or
// the unvoiced grid): measured amplitudes and the measured phase minus the
// excitation phase of that grid.
std::vector<FitTarget> CascadeTargets(const HarmonicSet& set,
                                      const HarmonicRule& rule = {});

ArmaCascade FitCascade(const HarmonicSet& set, const ArmaOrders& orders,
                       const FitOptions& options = {},
                       const HarmonicRule& rule = {}, int threads = 1);

}  // namespace qharma

#endif  // QHARMA_ARMA_FIT_HPP_
