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

#include "qharma/arma.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "qharma/error.hpp"

namespace qharma {
namespace {

// 1 + sum c[j] z^{-(j+1)} at z^{-1} = e^{-i omega}, by Horner.
std::complex<double> EvalMonic(const std::vector<double>& c,
                               std::complex<double> zinv) {
  std::complex<double> acc = 0.0;
  for (std::size_t j = c.size(); j-- > 0;) acc = (acc + c[j]) * zinv;
  return 1.0 + acc;
}

}  // namespace

void ArmaOrders::Validate() const {
  Require(p >= 0 && q >= 0, "ARMA orders must be non-negative");
  Require(r >= 1, "section count r must be at least 1");
  Require(p % r == 0 && q % r == 0, "r must divide both P and Q");
}

ArmaOrders ParseOrders(const std::string& text) {
  ArmaOrders orders;
  std::istringstream in(text);
  char c1 = 0, c2 = 0;
  if (!(in >> orders.p >> c1 >> orders.q >> c2 >> orders.r) || c1 != ',' ||
      c2 != ',' || !(in >> std::ws).eof()) {
    Fail(ErrorCode::kInvalidArgument, "orders must look like P,Q,r: " + text);
  }
  orders.Validate();
  return orders;
}

ArmaFrame IdentityFrame(const ArmaOrders& orders, double gain) {
  orders.Validate();
  ArmaFrame frame;
  frame.gain = gain;
  frame.sections.assign(static_cast<std::size_t>(orders.r),
                        ArmaSection{std::vector<double>(orders.ar_per_section(), 0.0),
                                    std::vector<double>(orders.ma_per_section(), 0.0)});
  return frame;
}

void ArmaCascade::Validate() const {
  orders.Validate();
  Require(sample_rate > 0, "cascade has no sample rate");
  if (frames.size() != grid.size()) {
    Fail(ErrorCode::kDimensionMismatch, "cascade frame count differs from its grid");
  }
  if ((!flags.empty() && flags.size() != frames.size()) ||
      (!losses.empty() && losses.size() != frames.size())) {
    Fail(ErrorCode::kDimensionMismatch, "cascade diagnostics do not match frames");
  }
  for (const ArmaFrame& f : frames) {
    Require(std::isfinite(f.gain) && f.gain > 0.0, "cascade gain must be positive and finite");
    if (f.sections.size() != static_cast<std::size_t>(orders.r)) {
      Fail(ErrorCode::kDimensionMismatch, "frame section count differs from r");
    }
    for (const ArmaSection& s : f.sections) {
      if (s.ar.size() != static_cast<std::size_t>(orders.ar_per_section()) ||
          s.ma.size() != static_cast<std::size_t>(orders.ma_per_section())) {
        Fail(ErrorCode::kDimensionMismatch, "section order differs from P/r, Q/r");
      }
      for (double v : s.ar) Require(std::isfinite(v), "AR coefficient is not finite");
      for (double v : s.ma) Require(std::isfinite(v), "MA coefficient is not finite");
    }
  }
}

std::complex<double> SectionResponse(const ArmaSection& section, double omega) {
  const std::complex<double> zinv = std::polar(1.0, -omega);
  const std::complex<double> num = EvalMonic(section.ma, zinv);
  const std::complex<double> den = EvalMonic(section.ar, zinv);
  if (std::abs(den) < 1e-12) {
    Fail(ErrorCode::kNumerical, "singular section response (AR polynomial vanishes)");
  }
  return num / den;
}

std::complex<double> CascadeResponse(const ArmaFrame& frame, double omega) {
  std::complex<double> h = frame.gain;
  for (const ArmaSection& s : frame.sections) h *= SectionResponse(s, omega);
  return h;
}

EnvelopeSample SampleHarmonics(const ArmaFrame& frame,
                               std::span<const double> freqs_hz,
                               int sample_rate) {
  Require(sample_rate > 0, "sample rate must be positive");
  EnvelopeSample out;
  out.magnitude.resize(freqs_hz.size());
  out.delay.resize(freqs_hz.size());
  const double nyquist = 0.5 * sample_rate;
  for (std::size_t k = 0; k < freqs_hz.size(); ++k) {
    Require(freqs_hz[k] <= nyquist, "sampled frequency exceeds Nyquist");
    const double omega = kTwoPi * freqs_hz[k] / sample_rate;
    double mag = std::abs(frame.gain);
    double delay = 0.0;
    for (const ArmaSection& s : frame.sections) {
      const std::complex<double> h = SectionResponse(s, omega);
      mag *= std::abs(h);
      delay += std::arg(h);
    }
    out.magnitude[k] = mag;
    out.delay[k] = delay;
  }
  return out;
}

std::vector<double> FilterTimeDomain(const ArmaFrame& frame,
                                     std::span<const double> input) {
  std::vector<double> y(input.begin(), input.end());
  for (double v : y) Require(std::isfinite(v), "filter input must be finite");
  std::vector<double> x;
  for (const ArmaSection& s : frame.sections) {
    x = y;
    const std::size_t np = s.ar.size();
    const std::size_t nq = s.ma.size();
    for (std::size_t n = 0; n < y.size(); ++n) {
      double acc = x[n];
      for (std::size_t q = 1; q <= nq && q <= n; ++q) acc += s.ma[q - 1] * x[n - q];
      for (std::size_t p = 1; p <= np && p <= n; ++p) acc -= s.ar[p - 1] * y[n - p];
      y[n] = acc;
    }
  }
  for (double& v : y) v *= frame.gain;
  return y;
}

std::vector<std::complex<double>> PolynomialRoots(std::span<const double> c) {
  const auto n = static_cast<Eigen::Index>(c.size());
  if (n == 0) return {};
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) companion(0, j) = -c[static_cast<std::size_t>(j)];
  for (Eigen::Index i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  if (solver.info() != Eigen::Success) {
    Fail(ErrorCode::kNumerical, "polynomial root finding did not converge");
  }
  std::vector<std::complex<double>> roots(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) roots[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
  return roots;
}

double MaxPoleRadius(const ArmaSection& section) {
  double r = 0.0;
  for (const auto& z : PolynomialRoots(section.ar)) r = std::max(r, std::abs(z));
  return r;
}

bool ProjectStable(std::vector<double>& ar, double max_radius,
                   double target_radius) {
  if (ar.empty()) return false;
  std::vector<std::complex<double>> roots = PolynomialRoots(ar);
  bool changed = false;
  for (auto& z : roots) {
    const double m = std::abs(z);
    if (m > max_radius) {
      z = m > 0.0 ? z * (target_radius / m) : std::complex<double>(target_radius, 0.0);
      changed = true;
    }
  }
  if (!changed) return false;
  std::vector<std::complex<double>> poly{1.0};
  for (const auto& z : roots) {
    poly.push_back(0.0);
    for (std::size_t j = poly.size() - 1; j > 0; --j) poly[j] -= z * poly[j - 1];
  }
  for (std::size_t j = 0; j < ar.size(); ++j) ar[j] = poly[j + 1].real();
  return true;
}

CorrectionCapacity ComputeCorrectionCapacity(const ArmaCascade& cascade,
                                             std::span<const double> freqs_hz) {
  Require(cascade.frames.size() >= 2, "correction capacity needs at least two frames");
  if (freqs_hz.size() != cascade.frames.size()) {
    Fail(ErrorCode::kDimensionMismatch, "one frequency per frame is required");
  }
  const double dt = cascade.grid.frame_shift;
  Require(dt > 0.0, "frame shift must be positive");
  CorrectionCapacity out;
  out.bound = cascade.orders.r / dt;
  std::vector<double> delay(freqs_hz.size());
  for (std::size_t l = 0; l < freqs_hz.size(); ++l) {
    const double f = freqs_hz[l];
    delay[l] = SampleHarmonics(cascade.frames[l], std::span<const double>(&f, 1),
                               cascade.sample_rate).delay[0];
  }
  out.per_frame.assign(delay.size(), 0.0);
  out.cumulative.assign(delay.size(), 0.0);
  for (std::size_t l = 1; l < delay.size(); ++l) {
    out.per_frame[l] = (delay[l] - delay[l - 1]) / (kTwoPi * dt);
    out.cumulative[l] = out.cumulative[l - 1] + out.per_frame[l];
    if (std::abs(out.cumulative[l]) > out.bound * (1.0 + 1e-12)) out.within_bound = false;
  }
  return out;
}

}  // namespace qharma
