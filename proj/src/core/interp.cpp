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

#include "qharma/interp.hpp"

#include <algorithm>
#include <cmath>

#include "qharma/error.hpp"

namespace qharma {
namespace {

void CheckKnots(std::span<const double> t, std::span<const double> v,
                std::size_t min_knots) {
  if (t.size() != v.size()) {
    Fail(ErrorCode::kDimensionMismatch, "knot times and values differ in size");
  }
  Require(t.size() >= min_knots, "too few interpolation knots");
  for (std::size_t i = 1; i < t.size(); ++i) {
    Require(t[i] > t[i - 1], "knot times must be strictly increasing");
  }
}

// Shape-preserving three-point endpoint slope.
double EndSlope(double h0, double h1, double d0, double d1) {
  double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
  if (std::signbit(m) != std::signbit(d0) || m == 0.0) {
    m = 0.0;
  } else if (std::signbit(d0) != std::signbit(d1) &&
             std::abs(m) > std::abs(3.0 * d0)) {
    m = 3.0 * d0;
  }
  return m;
}

}  // namespace

std::vector<double> LinearInterp(std::span<const double> knot_times,
                                 std::span<const double> knot_values,
                                 std::span<const double> query_times) {
  CheckKnots(knot_times, knot_values, 1);
  std::vector<double> out(query_times.size());
  const std::size_t n = knot_times.size();
  for (std::size_t q = 0; q < query_times.size(); ++q) {
    const double t = query_times[q];
    if (t <= knot_times.front()) {
      out[q] = knot_values.front();
    } else if (t >= knot_times.back()) {
      out[q] = knot_values.back();
    } else {
      const auto it =
          std::upper_bound(knot_times.begin(), knot_times.end(), t);
      const std::size_t i = static_cast<std::size_t>(it - knot_times.begin()) - 1;
      if (i + 1 >= n || t == knot_times[i]) {
        out[q] = knot_values[i];
      } else {
        const double u = (t - knot_times[i]) / (knot_times[i + 1] - knot_times[i]);
        out[q] = knot_values[i] + u * (knot_values[i + 1] - knot_values[i]);
      }
    }
  }
  return out;
}

MonotoneCubic::MonotoneCubic(std::span<const double> knot_times,
                             std::span<const double> knot_values)
    : times_(knot_times.begin(), knot_times.end()),
      values_(knot_values.begin(), knot_values.end()) {
  CheckKnots(knot_times, knot_values, 2);
  const std::size_t n = times_.size();
  std::vector<double> h(n - 1), delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = times_[i + 1] - times_[i];
    delta[i] = (values_[i + 1] - values_[i]) / h[i];
  }
  slopes_.assign(n, 0.0);
  if (n == 2) {
    slopes_[0] = slopes_[1] = delta[0];
    return;
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double d0 = delta[i - 1];
    const double d1 = delta[i];
    if (d0 == d1) {
      slopes_[i] = d0;
    } else if (d0 == 0.0 || d1 == 0.0 || std::signbit(d0) != std::signbit(d1)) {
      slopes_[i] = 0.0;
    } else {
      const double w1 = 2.0 * h[i] + h[i - 1];
      const double w2 = h[i] + 2.0 * h[i - 1];
      slopes_[i] = (w1 + w2) / (w1 / d0 + w2 / d1);
    }
  }
  slopes_[0] = delta[0] == delta[1] ? delta[0]
                                    : EndSlope(h[0], h[1], delta[0], delta[1]);
  slopes_[n - 1] = delta[n - 2] == delta[n - 3]
                       ? delta[n - 2]
                       : EndSlope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
}

std::size_t MonotoneCubic::Segment(double t) const {
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const auto i = static_cast<std::size_t>(it - times_.begin());
  return std::min(i == 0 ? 0 : i - 1, times_.size() - 2);
}

double MonotoneCubic::EvalSegment(std::size_t i, double t) const {
  const double h = times_[i + 1] - times_[i];
  const double s = (t - times_[i]) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
  const double h10 = s3 - 2.0 * s2 + s;
  const double h01 = -2.0 * s3 + 3.0 * s2;
  const double h11 = s3 - s2;
  return h00 * values_[i] + h10 * h * slopes_[i] + h01 * values_[i + 1] +
         h11 * h * slopes_[i + 1];
}

double MonotoneCubic::operator()(double t) const {
  if (t <= times_.front()) return values_.front();
  if (t >= times_.back()) return values_.back();
  const std::size_t i = Segment(t);
  if (t == times_[i]) return values_[i];
  return EvalSegment(i, t);
}

double MonotoneCubic::Derivative(double t) const {
  if (t < times_.front() || t > times_.back()) return 0.0;
  const std::size_t i = Segment(t);
  const double h = times_[i + 1] - times_[i];
  const double s = (t - times_[i]) / h;
  const double s2 = s * s;
  const double dh00 = (6.0 * s2 - 6.0 * s) / h;
  const double dh10 = 3.0 * s2 - 4.0 * s + 1.0;
  const double dh01 = (-6.0 * s2 + 6.0 * s) / h;
  const double dh11 = 3.0 * s2 - 2.0 * s;
  return dh00 * values_[i] + dh10 * slopes_[i] + dh01 * values_[i + 1] +
         dh11 * slopes_[i + 1];
}

void MonotoneCubic::EvaluateSorted(std::span<const double> query_times,
                                   std::span<double> out) const {
  if (out.size() != query_times.size()) {
    Fail(ErrorCode::kDimensionMismatch, "output span has the wrong size");
  }
  std::size_t i = 0;
  const std::size_t last = times_.size() - 2;
  for (std::size_t q = 0; q < query_times.size(); ++q) {
    const double t = query_times[q];
    if (t <= times_.front()) {
      out[q] = values_.front();
      continue;
    }
    if (t >= times_.back()) {
      out[q] = values_.back();
      continue;
    }
    while (i < last && t >= times_[i + 1]) ++i;
    out[q] = t == times_[i] ? values_[i] : EvalSegment(i, t);
  }
}

std::vector<double> CubicInterp(std::span<const double> knot_times,
                                std::span<const double> knot_values,
                                std::span<const double> query_times) {
  const MonotoneCubic cubic(knot_times, knot_values);
  std::vector<double> out(query_times.size());
  for (std::size_t q = 0; q < query_times.size(); ++q) {
    out[q] = cubic(query_times[q]);
  }
  return out;
}

}  // namespace qharma
