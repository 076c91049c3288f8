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

#ifndef QHARMA_INTERP_HPP_
#define QHARMA_INTERP_HPP_

#include <cstddef>
#include <span>
#include <vector>

namespace qharma {

// Piecewise-linear interpolation through (knot_times, knot_values); queries
// outside the knot range hold the endpoint values. Requires >= 1 knot and
// strictly increasing times.
std::vector<double> LinearInterp(std::span<const double> knot_times,
                                 std::span<const double> knot_values,
                                 std::span<const double> query_times);

// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson slopes).
// C1-continuous, exact at knots, reproduces affine data, and introduces no
// extrema that the knots do not have. Outside the knot range the endpoint
// values are held.
class MonotoneCubic {
 public:
  MonotoneCubic(std::span<const double> knot_times,
                std::span<const double> knot_values);

  double operator()(double t) const;
  double Derivative(double t) const;

  // Evaluates at non-decreasing query times in one pass.
  void EvaluateSorted(std::span<const double> query_times,
                      std::span<double> out) const;

  std::span<const double> slopes() const { return slopes_; }

 private:
  std::size_t Segment(double t) const;
  double EvalSegment(std::size_t i, double t) const;

  std::vector<double> times_;
  std::vector<double> values_;
  std::vector<double> slopes_;
};

std::vector<double> CubicInterp(std::span<const double> knot_times,
                                std::span<const double> knot_values,
                                std::span<const double> query_times);

}  // namespace qharma

#endif  // QHARMA_INTERP_HPP_
