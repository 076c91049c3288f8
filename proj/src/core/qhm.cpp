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

#include "qharma/qhm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "qharma/error.hpp"

namespace qharma {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct NormalSolution {
  VectorXd x;
  bool regularized = false;
  double condition = 0.0;
};

// Solves G x = r for symmetric positive semi-definite G after Jacobi
// equilibration; falls back to ridge when the estimated condition number is
// too large or the Cholesky factorization fails.
NormalSolution SolveNormal(MatrixXd& gram, const VectorXd& rhs,
                           const LsOptions& options) {
  const Eigen::Index n = gram.rows();
  VectorXd scale(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = gram(i, i);
    scale(i) = d > 0.0 ? 1.0 / std::sqrt(d) : 1.0;
  }
  MatrixXd full = gram.selfadjointView<Eigen::Lower>();
  gram = scale.asDiagonal() * full * scale.asDiagonal();
  const VectorXd scaled_rhs = scale.cwiseProduct(rhs);

  NormalSolution out;
  Eigen::LLT<MatrixXd> llt(gram);
  double rcond = llt.info() == Eigen::Success ? llt.rcond() : 0.0;
  out.condition = rcond > 0.0 ? 1.0 / rcond : INFINITY;
  if (!(out.condition <= options.condition_limit)) {
    const double lambda = options.ridge_scale * gram.trace();
    gram.diagonal().array() += lambda;
    llt.compute(gram);
    if (llt.info() != Eigen::Success) {
      Fail(ErrorCode::kNumerical, "normal equations are singular");
    }
    out.regularized = true;
  }
  out.x = scale.cwiseProduct(llt.solve(scaled_rhs));
  return out;
}

void CheckFrequencies(const AnalysisFrame& frame,
                      std::span<const double> f_hats, bool distinct = true) {
  Require(frame.sample_rate > 0, "frame has no sample rate");
  Require(!f_hats.empty(), "at least one component frequency is required");
  if (frame.size() < 4 * f_hats.size()) {
    Fail(ErrorCode::kInvalidArgument,
         "window of " + std::to_string(frame.size()) + " samples is shorter than 4K = " +
             std::to_string(4 * f_hats.size()));
  }
  const double nyquist = 0.5 * frame.sample_rate;
  std::vector<double> sorted(f_hats.begin(), f_hats.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    Require(sorted[k] > 0.0 && sorted[k] < nyquist,
            "component frequencies must lie in (0, Nyquist)");
    if (distinct && k > 0) {
      Require(sorted[k] > sorted[k - 1], "component frequencies must be distinct");
    }
  }
}

bool IsHarmonic(std::span<const double> f_hats) {
  const double f1 = f_hats[0];
  for (std::size_t k = 1; k < f_hats.size(); ++k) {
    if (std::abs(f_hats[k] - static_cast<double>(k + 1) * f1) > 1e-12 * f_hats[k]) {
      return false;
    }
  }
  return true;
}

double WeightedEnergy(const AnalysisFrame& frame) {
  double e = 0.0;
  for (std::size_t n = 0; n < frame.size(); ++n) {
    const double wx = frame.weights[n] * frame.samples[n];
    e += wx * wx;
  }
  return e;
}

void Unpack(const VectorXd& x, QhmFrameParams& params) {
  const std::size_t K = params.f_hat.size();
  params.a.resize(K);
  params.b.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    params.a[k] = {x(4 * k), x(4 * k + 1)};
    params.b[k] = {x(4 * k + 2), x(4 * k + 3)};
  }
}

void FinishResidual(const AnalysisFrame& frame, QhmFrameParams& params,
                    const AdaptiveBasis* basis) {
  const std::vector<double> model = QhmModel(frame, params, basis);
  double e = 0.0;
  for (std::size_t n = 0; n < frame.size(); ++n) {
    const double r = frame.weights[n] * (frame.samples[n] - model[n]);
    e += r * r;
  }
  params.residual_energy = e;
  params.signal_energy = WeightedEnergy(frame);
}

// Design matrix columns per component: 2 cos, -2 sin, 2t cos, -2t sin of the
// component phase (times the optional gain), rows scaled by the window.
QhmFrameParams FitWithDesign(const AnalysisFrame& frame,
                             std::span<const double> f_hats,
                             const AdaptiveBasis* basis,
                             std::size_t frame_index,
                             const LsOptions& options) {
  const std::size_t N = frame.size();
  const std::size_t K = f_hats.size();
  MatrixXd design(N, 4 * K);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t n = 0; n < N; ++n) {
      const double t = frame.times[n];
      const double theta =
          basis ? basis->phase[k][n] : kTwoPi * f_hats[k] * t;
      const double g = (basis && !basis->gain.empty()) ? basis->gain[k][n] : 1.0;
      const double w = frame.weights[n] * g;
      const double c = 2.0 * w * std::cos(theta);
      const double s = -2.0 * w * std::sin(theta);
      design(n, 4 * k) = c;
      design(n, 4 * k + 1) = s;
      design(n, 4 * k + 2) = t * c;
      design(n, 4 * k + 3) = t * s;
    }
  }
  VectorXd wx(N);
  for (std::size_t n = 0; n < N; ++n) wx(n) = frame.weights[n] * frame.samples[n];

  MatrixXd gram = MatrixXd::Zero(4 * K, 4 * K);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(design.transpose());
  const VectorXd rhs = design.transpose() * wx;

  QhmFrameParams params;
  params.frame_index = frame_index;
  params.f_hat.assign(f_hats.begin(), f_hats.end());
  NormalSolution sol = SolveNormal(gram, rhs, options);
  params.regularized = sol.regularized;
  params.condition_estimate = sol.condition;
  Unpack(sol.x, params);
  FinishResidual(frame, params, basis);
  return params;
}

QhmFrameParams FitHarmonic(const AnalysisFrame& frame,
                           std::span<const double> f_hats,
                           std::size_t frame_index, const LsOptions& options) {
  const std::size_t N = frame.size();
  const std::size_t K = f_hats.size();
  const std::size_t D = 2 * K + 1;
  const double f1 = f_hats[0];

  // Moments C_m[d] = sum w^2 t^m cos(2 pi d f1 t), S_m[d] likewise with sin,
  // and R_m[k] = sum w^2 x t^m e^{i 2 pi k f1 t}.
  std::vector<double> wt0(N), wt1(N), wt2(N), x0(N), x1(N);
  std::vector<double> zr(N), zi(N), pr(N, 1.0), pi(N, 0.0);
  for (std::size_t n = 0; n < N; ++n) {
    const double t = frame.times[n];
    const double w2 = frame.weights[n] * frame.weights[n];
    wt0[n] = w2;
    wt1[n] = w2 * t;
    wt2[n] = w2 * t * t;
    x0[n] = w2 * frame.samples[n];
    x1[n] = x0[n] * t;
    zr[n] = std::cos(kTwoPi * f1 * t);
    zi[n] = std::sin(kTwoPi * f1 * t);
  }
  std::vector<double> C[3], S[3];
  for (int m = 0; m < 3; ++m) {
    C[m].assign(D, 0.0);
    S[m].assign(D, 0.0);
  }
  std::vector<std::complex<double>> R0(K + 1), R1(K + 1);
  for (std::size_t d = 0; d < D; ++d) {
    double c0 = 0, c1 = 0, c2 = 0, s0 = 0, s1 = 0, s2 = 0;
    double r0r = 0, r0i = 0, r1r = 0, r1i = 0;
    for (std::size_t n = 0; n < N; ++n) {
      c0 += wt0[n] * pr[n];
      c1 += wt1[n] * pr[n];
      c2 += wt2[n] * pr[n];
      s0 += wt0[n] * pi[n];
      s1 += wt1[n] * pi[n];
      s2 += wt2[n] * pi[n];
      r0r += x0[n] * pr[n];
      r0i += x0[n] * pi[n];
      r1r += x1[n] * pr[n];
      r1i += x1[n] * pi[n];
    }
    C[0][d] = c0; C[1][d] = c1; C[2][d] = c2;
    S[0][d] = s0; S[1][d] = s1; S[2][d] = s2;
    if (d <= K) {
      R0[d] = {r0r, r0i};
      R1[d] = {r1r, r1i};
    }
    for (std::size_t n = 0; n < N; ++n) {
      const double re = pr[n] * zr[n] - pi[n] * zi[n];
      const double im = pr[n] * zi[n] + pi[n] * zr[n];
      pr[n] = re;
      pi[n] = im;
    }
  }
  auto cmom = [&](int m, long d) { return C[m][static_cast<std::size_t>(d < 0 ? -d : d)]; };
  auto smom = [&](int m, long d) {
    return d < 0 ? -S[m][static_cast<std::size_t>(-d)] : S[m][static_cast<std::size_t>(d)];
  };

  MatrixXd gram(4 * K, 4 * K);
  VectorXd rhs(4 * K);
  for (std::size_t jj = 0; jj < K; ++jj) {
    const long j = static_cast<long>(jj) + 1;
    for (std::size_t kk = 0; kk <= jj; ++kk) {
      const long k = static_cast<long>(kk) + 1;
      for (int p = 0; p < 4; ++p) {
        for (int q = 0; q < 4; ++q) {
          const int m = (p >= 2) + (q >= 2);
          const bool pc = (p % 2) == 0;
          const bool qc = (q % 2) == 0;
          double v;
          if (pc && qc) {
            v = 2.0 * (cmom(m, j - k) + cmom(m, j + k));
          } else if (!pc && !qc) {
            v = 2.0 * (cmom(m, j - k) - cmom(m, j + k));
          } else if (pc && !qc) {
            v = -2.0 * (smom(m, j + k) - smom(m, j - k));
          } else {
            v = -2.0 * (smom(m, j + k) + smom(m, j - k));
          }
          gram(static_cast<Eigen::Index>(4 * jj + p),
               static_cast<Eigen::Index>(4 * kk + q)) = v;
        }
      }
    }
    rhs(static_cast<Eigen::Index>(4 * jj)) = 2.0 * R0[jj + 1].real();
    rhs(static_cast<Eigen::Index>(4 * jj + 1)) = -2.0 * R0[jj + 1].imag();
    rhs(static_cast<Eigen::Index>(4 * jj + 2)) = 2.0 * R1[jj + 1].real();
    rhs(static_cast<Eigen::Index>(4 * jj + 3)) = -2.0 * R1[jj + 1].imag();
  }

  QhmFrameParams params;
  params.frame_index = frame_index;
  params.f_hat.assign(f_hats.begin(), f_hats.end());
  NormalSolution sol = SolveNormal(gram, rhs, options);
  params.regularized = sol.regularized;
  params.condition_estimate = sol.condition;
  Unpack(sol.x, params);
  FinishResidual(frame, params, nullptr);
  return params;
}

}  // namespace

AnalysisFrame ExtractFrame(const SignalBuffer& buffer, double center_time,
                           std::span<const double> window, FrameEdge edge) {
  Require(buffer.sample_rate > 0, "buffer has no sample rate");
  Require(window.size() % 2 == 1, "analysis window length must be odd");
  const long half = static_cast<long>(window.size() / 2);
  const long length = static_cast<long>(window.size());
  const double fs = buffer.sample_rate;
  const long nearest = std::lround(center_time * fs);
  const long size = static_cast<long>(buffer.size());
  long start = nearest - half;
  if (edge == FrameEdge::kSlideInside && size >= length) {
    start = std::clamp(start, 0L, size - length);
  }
  AnalysisFrame frame;
  frame.sample_rate = buffer.sample_rate;
  frame.samples.resize(window.size());
  frame.weights.resize(window.size());
  frame.times.resize(window.size());
  frame.origin = static_cast<std::size_t>(std::clamp(nearest - start, 0L, length - 1));
  for (long i = 0; i < length; ++i) {
    const long n = start + i;
    const auto u = static_cast<std::size_t>(i);
    frame.times[u] = static_cast<double>(n) / fs - center_time;
    if (n >= 0 && n < size) {
      frame.samples[u] = buffer.samples[static_cast<std::size_t>(n)];
      frame.weights[u] = window[u];
    } else {
      frame.samples[u] = 0.0;
      frame.weights[u] = 0.0;
    }
  }
  return frame;
}

AnalysisFrame MakeCenteredFrame(std::span<const double> samples,
                                std::span<const double> window,
                                int sample_rate) {
  if (samples.size() != window.size()) {
    Fail(ErrorCode::kDimensionMismatch, "frame and window lengths differ");
  }
  Require(sample_rate > 0, "sample rate must be positive");
  AnalysisFrame frame;
  frame.sample_rate = sample_rate;
  frame.samples.assign(samples.begin(), samples.end());
  frame.weights.assign(window.begin(), window.end());
  frame.times.resize(samples.size());
  const double center = 0.5 * static_cast<double>(samples.size() - 1);
  for (std::size_t n = 0; n < samples.size(); ++n) {
    frame.times[n] = (static_cast<double>(n) - center) / sample_rate;
  }
  frame.origin = samples.size() / 2;
  return frame;
}

QhmFrameParams QhmLsFit(const AnalysisFrame& frame,
                        std::span<const double> f_hats,
                        std::size_t frame_index, const LsOptions& options) {
  CheckFrequencies(frame, f_hats);
  if (IsHarmonic(f_hats)) return FitHarmonic(frame, f_hats, frame_index, options);
  return FitWithDesign(frame, f_hats, nullptr, frame_index, options);
}

QhmFrameParams QhmLsFitDirect(const AnalysisFrame& frame,
                              std::span<const double> f_hats,
                              std::size_t frame_index,
                              const LsOptions& options) {
  CheckFrequencies(frame, f_hats);
  return FitWithDesign(frame, f_hats, nullptr, frame_index, options);
}

QhmFrameParams QhmLsFitAdaptive(const AnalysisFrame& frame,
                                const AdaptiveBasis& basis,
                                std::span<const double> center_freqs,
                                std::size_t frame_index,
                                const LsOptions& options) {
  CheckFrequencies(frame, center_freqs, false);
  const std::size_t K = center_freqs.size();
  if (basis.phase.size() != K || (!basis.gain.empty() && basis.gain.size() != K)) {
    Fail(ErrorCode::kDimensionMismatch, "adaptive basis does not match component count");
  }
  for (std::size_t k = 0; k < K; ++k) {
    if (basis.phase[k].size() != frame.size() ||
        (!basis.gain.empty() && basis.gain[k].size() != frame.size())) {
      Fail(ErrorCode::kDimensionMismatch, "adaptive basis does not match frame length");
    }
  }
  return FitWithDesign(frame, center_freqs, &basis, frame_index, options);
}

std::vector<double> QhmModel(const AnalysisFrame& frame,
                             const QhmFrameParams& params,
                             const AdaptiveBasis* basis) {
  std::vector<double> model(frame.size(), 0.0);
  for (std::size_t k = 0; k < params.size(); ++k) {
    const std::complex<double> a = params.a[k];
    const std::complex<double> b = params.b[k];
    for (std::size_t n = 0; n < frame.size(); ++n) {
      const double t = frame.times[n];
      const double theta =
          basis ? basis->phase[k][n] : kTwoPi * params.f_hat[k] * t;
      const double g = (basis && !basis->gain.empty()) ? basis->gain[k][n] : 1.0;
      const std::complex<double> c = (a + t * b) * std::polar(1.0, theta);
      model[n] += 2.0 * g * c.real();
    }
  }
  return model;
}

FrequencyCorrection CorrectFrequencies(const QhmFrameParams& params,
                                       double amplitude_floor) {
  FrequencyCorrection out;
  out.eta.assign(params.size(), 0.0);
  out.undefined.assign(params.size(), false);
  for (std::size_t k = 0; k < params.size(); ++k) {
    const std::complex<double> a = params.a[k];
    const std::complex<double> b = params.b[k];
    const double mag2 = std::norm(a);
    if (std::sqrt(mag2) <= amplitude_floor) {
      out.undefined[k] = true;
      continue;
    }
    out.eta[k] = (a.real() * b.imag() - a.imag() * b.real()) / (kTwoPi * mag2);
  }
  return out;
}

AmpPhase FramewiseAmpPhase(std::complex<double> a, double amplitude_floor) {
  AmpPhase out;
  out.amplitude = std::abs(a);
  if (out.amplitude > amplitude_floor) {
    out.phase = std::arg(a);
    if (out.phase == -kPi) out.phase = kPi;
  }
  return out;
}

std::vector<double> IntegratePhase(std::span<const double> times,
                                   std::span<const double> freqs_hz,
                                   std::size_t origin, double origin_phase) {
  if (times.size() != freqs_hz.size()) {
    Fail(ErrorCode::kDimensionMismatch, "times and frequencies differ in size");
  }
  Require(origin < times.size(), "phase origin is outside the sample range");
  std::vector<double> phase(times.size());
  phase[origin] = origin_phase;
  for (std::size_t i = origin + 1; i < times.size(); ++i) {
    phase[i] = phase[i - 1] +
               kPi * (freqs_hz[i - 1] + freqs_hz[i]) * (times[i] - times[i - 1]);
  }
  for (std::size_t i = origin; i-- > 0;) {
    phase[i] = phase[i + 1] -
               kPi * (freqs_hz[i] + freqs_hz[i + 1]) * (times[i + 1] - times[i]);
  }
  return phase;
}

SmoothedPhase SmoothPhase(double start_phase, double target_phase,
                          std::span<const double> times,
                          std::span<const double> freqs_hz,
                          SmoothingInterval interval, double previous_center) {
  Require(times.size() >= 2, "phase smoothing needs at least two samples");
  Require(std::isfinite(target_phase) && std::isfinite(start_phase),
          "phase smoothing needs finite phases");
  SmoothedPhase out;
  out.phase = IntegratePhase(times, freqs_hz, 0, start_phase);
  const double t_start = times.front();
  const double t_end = times.back();
  const double span = t_end - t_start;
  Require(span > 0.0, "phase smoothing interval must have positive length");
  out.integrated_end = out.phase.back();
  out.wraps = std::lround((out.integrated_end - target_phase) / kTwoPi);
  const double mismatch =
      target_phase + kTwoPi * static_cast<double>(out.wraps) - out.integrated_end;
  out.z = kPi * mismatch / (2.0 * span);

  double anchor = t_start;
  double width = span;
  if (interval == SmoothingInterval::kPreviousFrame) {
    anchor = previous_center;
    width = t_start - previous_center;
    Require(width > 0.0, "previous frame center must precede the interval");
  }
  const double k = kPi / width;
  const double base = std::cos(k * (t_start - anchor));
  for (std::size_t i = 0; i < times.size(); ++i) {
    out.phase[i] += out.z / k * (base - std::cos(k * (times[i] - anchor)));
  }
  if (interval == SmoothingInterval::kCurrentFrame) {
    out.phase.back() = target_phase + kTwoPi * static_cast<double>(out.wraps);
  }
  return out;
}

}  // namespace qharma
