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

#include "qharma/synthesis.hpp"

#include <algorithm>
#include <cmath>

#include "qharma/error.hpp"
#include "qharma/interp.hpp"
#include "qharma/modification.hpp"
#include "qharma/parallel.hpp"

namespace qharma {
namespace {

constexpr std::size_t kRenderChunk = 4096;

void CheckShape(const FrameMatrix& a, const FrameMatrix& b, const char* what) {
  if (a.frames() != b.frames() || a.components() != b.components()) {
    Fail(ErrorCode::kDimensionMismatch, what);
  }
}

}  // namespace

void HoldFrequencies(FrameMatrix& freqs, const FrameMatrix& gate) {
  CheckShape(freqs, gate, "frequency and gate tables differ in shape");
  const std::size_t frames = freqs.frames();
  for (std::size_t k = 0; k < freqs.components(); ++k) {
    std::size_t first = frames;
    for (std::size_t l = 0; l < frames; ++l) {
      if (gate(l, k) != 0.0) {
        first = l;
        break;
      }
    }
    if (first == frames) continue;
    for (std::size_t l = 0; l < first; ++l) freqs(l, k) = freqs(first, k);
    double held = freqs(first, k);
    for (std::size_t l = first + 1; l < frames; ++l) {
      if (gate(l, k) != 0.0) {
        held = freqs(l, k);
      } else {
        freqs(l, k) = held;
      }
    }
  }
}

void MuteAndHold(FrameMatrix& freqs, FrameMatrix& amps, double limit) {
  CheckShape(freqs, amps, "frequency and amplitude tables differ in shape");
  FrameMatrix gate(freqs.frames(), freqs.components(), 0.0);
  for (std::size_t i = 0; i < freqs.data().size(); ++i) {
    const double f = freqs.data()[i];
    if (f > 0.0 && f <= limit) {
      gate.data()[i] = 1.0;
    } else {
      amps.data()[i] = 0.0;
    }
  }
  HoldFrequencies(freqs, gate);
}

FrameMatrix ExcitationPhase(const FrameMatrix& freqs,
                            std::span<const double> times,
                            std::span<const double> betas) {
  if (times.size() != freqs.frames() ||
      (!betas.empty() && betas.size() != freqs.frames())) {
    Fail(ErrorCode::kDimensionMismatch, "excitation phase inputs differ in length");
  }
  FrameMatrix phase(freqs.frames(), freqs.components(), 0.0);
  for (std::size_t l = 1; l < freqs.frames(); ++l) {
    const double dt = times[l] - times[l - 1];
    const double beta = betas.empty() ? 1.0 : betas[l];
    for (std::size_t k = 0; k < freqs.components(); ++k) {
      phase(l, k) = phase(l - 1, k) +
                    kPi * beta * (freqs(l - 1, k) + freqs(l, k)) * dt;
    }
  }
  for (double v : phase.data()) Require(std::isfinite(v), "excitation phase is not finite");
  return phase;
}

FrameMatrix CompensatedPhase(const FrameMatrix& excitation,
                             const FrameMatrix& compensations) {
  CheckShape(excitation, compensations, "excitation and compensation tables differ in shape");
  FrameMatrix out = excitation;
  for (std::size_t k = 0; k < excitation.components(); ++k) {
    double sum = 0.0;
    for (std::size_t l = 0; l < excitation.frames(); ++l) {
      const double c = compensations(l, k);
      if (!(std::abs(c) <= kPi)) {
        Fail(ErrorCode::kInvalidArgument, "phase compensation outside [-pi, pi] at frame " +
                                              std::to_string(l));
      }
      sum += c;
      out(l, k) = excitation(l, k) + sum;
    }
  }
  return out;
}

FrameMatrix DelayedPhase(const FrameMatrix& excitation,
                         const ArmaCascade& cascade, const FrameMatrix& freqs) {
  CheckShape(excitation, freqs, "excitation and frequency tables differ in shape");
  if (cascade.frames.size() != freqs.frames()) {
    Fail(ErrorCode::kDimensionMismatch, "cascade and frequency table differ in frame count");
  }
  FrameMatrix out = excitation;
  for (std::size_t l = 0; l < freqs.frames(); ++l) {
    const EnvelopeSample s =
        SampleHarmonics(cascade.frames[l], freqs.row(l), cascade.sample_rate);
    for (std::size_t k = 0; k < freqs.components(); ++k) out(l, k) += s.delay[k];
  }
  return out;
}

SignalBuffer Render(const FrameMatrix& amps, const FrameMatrix& phases,
                    std::span<const double> knot_times, int sample_rate,
                    int threads) {
  CheckShape(amps, phases, "amplitude and phase tables differ in shape");
  if (knot_times.size() != amps.frames()) {
    Fail(ErrorCode::kDimensionMismatch, "knot times differ from frame count");
  }
  Require(sample_rate > 0, "sample rate must be positive");
  SignalBuffer out;
  out.sample_rate = sample_rate;
  if (knot_times.empty()) return out;
  for (std::size_t i = 0; i < amps.data().size(); ++i) {
    Require(std::isfinite(amps.data()[i]) && amps.data()[i] >= 0.0,
            "amplitudes must be finite and non-negative");
    Require(std::isfinite(phases.data()[i]), "phases must be finite");
  }
  const double end = knot_times.back();
  // The last knot marks the end of the output: samples cover [0, end).
  const auto num_samples = std::max<std::size_t>(
      static_cast<std::size_t>(std::floor(end * sample_rate + 1e-9)), 1);
  out.samples.assign(num_samples, 0.0);

  const std::size_t frames = amps.frames();
  std::vector<std::size_t> active;
  for (std::size_t k = 0; k < amps.components(); ++k) {
    for (std::size_t l = 0; l < frames; ++l) {
      if (amps(l, k) > 0.0) {
        active.push_back(k);
        break;
      }
    }
  }
  if (frames == 1) {
    for (std::size_t k : active) out.samples[0] += 2.0 * amps(0, k) * std::cos(phases(0, k));
    return out;
  }
  std::vector<MonotoneCubic> cubics;
  std::vector<std::vector<double>> amp_columns;
  cubics.reserve(active.size());
  for (std::size_t k : active) {
    const std::vector<double> column = phases.column(k);
    cubics.emplace_back(knot_times, column);
    amp_columns.push_back(amps.column(k));
  }

  const std::size_t chunks = (num_samples + kRenderChunk - 1) / kRenderChunk;
  ParallelFor(chunks, threads, [&](std::size_t c) {
    const std::size_t begin = c * kRenderChunk;
    const std::size_t count = std::min(kRenderChunk, num_samples - begin);
    std::vector<double> t(count), phi(count), amp(count);
    for (std::size_t n = 0; n < count; ++n) {
      t[n] = static_cast<double>(begin + n) / sample_rate;
    }
    double* y = out.samples.data() + begin;
    for (std::size_t j = 0; j < active.size(); ++j) {
      const std::vector<double>& a = amp_columns[j];
      std::size_t seg = 0;
      bool any = false;
      for (std::size_t n = 0; n < count; ++n) {
        const double tn = t[n];
        double v;
        if (tn <= knot_times.front()) {
          v = a.front();
        } else if (tn >= knot_times.back()) {
          v = a.back();
        } else {
          while (seg + 2 < frames && tn >= knot_times[seg + 1]) ++seg;
          const double u = (tn - knot_times[seg]) / (knot_times[seg + 1] - knot_times[seg]);
          v = a[seg] + u * (a[seg + 1] - a[seg]);
        }
        amp[n] = v;
        any = any || v != 0.0;
      }
      if (!any) continue;
      cubics[j].EvaluateSorted(t, phi);
      for (std::size_t n = 0; n < count; ++n) {
        if (amp[n] != 0.0) y[n] += 2.0 * amp[n] * std::cos(phi[n]);
      }
    }
  });
  return out;
}

SignalBuffer SynthesizeQhm(const HarmonicSet& set,
                           const SynthesisOptions& options) {
  set.Validate();
  if (set.num_frames() == 0) return SignalBuffer{{}, set.sample_rate};
  FrameMatrix freqs = set.freqs;
  FrameMatrix amps = set.amps;
  MuteAndHold(freqs, amps, options.rule.Limit(set.sample_rate));
  const FrameMatrix excitation = ExcitationPhase(freqs, set.grid.centers);
  const FrameMatrix phases = CompensatedPhase(excitation, set.compensations);
  return Render(amps, phases, set.grid.centers, set.sample_rate, options.threads);
}

SignalBuffer SynthesizeArma(const ArmaCascade& cascade, const F0Track& track,
                            const SynthesisOptions& options) {
  return Modify(cascade, track, ScaleSchedule::Identity(track), options);
}

}  // namespace qharma
