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

#include "qharma/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "qharma/error.hpp"
#include "qharma/metrics.hpp"
#include "qharma/parallel.hpp"
#include "qharma/synthesis.hpp"

namespace qharma {
namespace {

struct FrameResult {
  std::vector<double> freqs;
  std::vector<double> amps;
  std::vector<double> phases;  // wrapped
  double residual = 0.0;
  double f0_estimate = 0.0;
  std::uint8_t flags = 0;
};

std::size_t NonzeroWeights(const AnalysisFrame& frame) {
  return static_cast<std::size_t>(
      std::count_if(frame.weights.begin(), frame.weights.end(),
                    [](double w) { return w != 0.0; }));
}

// Corrected frequency, or the seed when the correction is undefined or moves
// the component by more than half the component spacing.
double Corrected(double seed, double eta, bool undefined, double spacing,
                 double nyquist) {
  if (undefined || !(std::abs(eta) <= 0.5 * spacing)) return seed;
  const double f = seed + eta;
  return (f > 0.0 && f < nyquist) ? f : seed;
}

FrameResult AnalyzeFrame(const SignalBuffer& buffer, double center, double f0,
                         std::span<const double> window,
                         const AnalysisOptions& options, std::size_t index) {
  const int fs = buffer.sample_rate;
  const AnalysisFrame frame = ExtractFrame(buffer, center, window, FrameEdge::kSlideInside);
  const double spacing = options.rule.EffectiveF0(f0);
  std::size_t k_count = options.rule.Count(f0, fs);
  const std::size_t k_cap = NonzeroWeights(frame) / 4;
  FrameResult out;
  if (k_cap < k_count) {
    k_count = k_cap;
    out.flags |= kFrameTruncated;
  }
  if (k_count == 0) return out;
  std::vector<double> f_hats(k_count);
  for (std::size_t k = 0; k < k_count; ++k) f_hats[k] = static_cast<double>(k + 1) * spacing;
  const QhmFrameParams params = QhmLsFit(frame, f_hats, index, options.ls);
  if (params.regularized) out.flags |= kFrameRegularized;
  const FrequencyCorrection corr = CorrectFrequencies(params);
  out.freqs.resize(k_count);
  out.amps.resize(k_count);
  out.phases.resize(k_count);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < k_count; ++k) {
    out.freqs[k] = Corrected(f_hats[k], corr.eta[k], corr.undefined[k], spacing,
                             buffer.nyquist());
    const AmpPhase ap = FramewiseAmpPhase(params.a[k]);
    out.amps[k] = ap.amplitude;
    out.phases[k] = ap.phase;
    if (out.freqs[k] != f_hats[k]) {
      const double w = ap.amplitude * ap.amplitude;
      num += w * out.freqs[k] / static_cast<double>(k + 1);
      den += w;
    }
  }
  out.residual = params.residual_energy;
  out.f0_estimate = den > 0.0 ? num / den : 0.0;
  return out;
}

double ResynthesisSnr(const SignalBuffer& buffer, const HarmonicSet& set,
                      int threads) {
  SynthesisOptions synth;
  synth.threads = threads;
  const SignalBuffer gen = SynthesizeQhm(set, synth);
  SignalBuffer ref{std::vector<double>(buffer.samples.begin(),
                                       buffer.samples.begin() +
                                           static_cast<long>(std::min(gen.size(), buffer.size()))),
                   buffer.sample_rate};
  SignalBuffer cut{std::vector<double>(gen.samples.begin(),
                                       gen.samples.begin() + static_cast<long>(ref.size())),
                   gen.sample_rate};
  return Snr(cut, ref);
}

}  // namespace

std::size_t HarmonicRule::Count(double f0, int sample_rate) const {
  const double f = EffectiveF0(f0);
  const double limit = Limit(sample_rate);
  if (!(f > 0.0) || limit < f) return 0;
  auto k = static_cast<std::size_t>(std::floor(limit / f));
  while (static_cast<double>(k + 1) * f <= limit) ++k;
  while (k > 0 && static_cast<double>(k) * f > limit) --k;
  return k;
}

std::size_t HarmonicSet::ComponentCount(std::size_t l) const {
  std::size_t n = 0;
  for (double f : freqs.row(l)) n += f > 0.0 ? 1 : 0;
  return n;
}

void HarmonicSet::Validate() const {
  Require(sample_rate > 0, "harmonic set has no sample rate");
  const std::size_t frames = grid.size();
  const std::size_t k = freqs.components();
  for (const FrameMatrix* m : {&freqs, &amps, &phases, &compensations}) {
    if (m->frames() != frames || m->components() != k) {
      Fail(ErrorCode::kDimensionMismatch, "harmonic set tables differ in shape");
    }
  }
  if (f0.size() != frames || flags.size() != frames) {
    Fail(ErrorCode::kDimensionMismatch, "harmonic set per-frame vectors differ in length");
  }
  const double nyquist = 0.5 * sample_rate;
  for (std::size_t i = 0; i < freqs.data().size(); ++i) {
    const double f = freqs.data()[i];
    Require(std::isfinite(f) && f >= 0.0 && f < nyquist, "component frequency outside [0, Nyquist)");
    const double a = amps.data()[i];
    Require(std::isfinite(a) && a >= 0.0, "amplitudes must be finite and non-negative");
    Require(std::isfinite(phases.data()[i]), "phases must be finite");
    Require(std::abs(compensations.data()[i]) <= kPi, "compensation outside [-pi, pi]");
  }
  for (double v : f0) Require(std::isfinite(v) && v >= 0.0, "f0 values must be finite and >= 0");
}

const char* AdaptiveModeName(AdaptiveMode mode) {
  switch (mode) {
    case AdaptiveMode::kNone: return "none";
    case AdaptiveMode::kAqhm: return "aqhm";
    case AdaptiveMode::kEaqhm: return "eaqhm";
  }
  return "none";
}

AdaptiveMode ParseAdaptiveMode(const std::string& name) {
  if (name == "none") return AdaptiveMode::kNone;
  if (name == "aqhm") return AdaptiveMode::kAqhm;
  if (name == "eaqhm") return AdaptiveMode::kEaqhm;
  Fail(ErrorCode::kInvalidArgument, "unknown adaptive mode: " + name);
}

void AssignPhases(HarmonicSet& set, const FrameMatrix& measured,
                  double guard_hz) {
  if (measured.frames() != set.freqs.frames() ||
      measured.components() != set.freqs.components()) {
    Fail(ErrorCode::kDimensionMismatch, "measured phase table has the wrong shape");
  }
  FrameMatrix freqs = set.freqs;
  FrameMatrix amps = set.amps;
  MuteAndHold(freqs, amps, 0.5 * set.sample_rate - guard_hz);
  const FrameMatrix excitation = ExcitationPhase(freqs, set.grid.centers);
  set.phases = FrameMatrix(freqs.frames(), freqs.components(), 0.0);
  set.compensations = FrameMatrix(freqs.frames(), freqs.components(), 0.0);
  for (std::size_t k = 0; k < freqs.components(); ++k) {
    double sum = 0.0;
    for (std::size_t l = 0; l < freqs.frames(); ++l) {
      double delta = 0.0;
      if (amps(l, k) > kAmplitudeFloor) {
        delta = WrapPhase(measured(l, k) - excitation(l, k) - sum);
      }
      sum += delta;
      set.compensations(l, k) = delta;
      set.phases(l, k) = excitation(l, k) + sum;
    }
  }
}

HarmonicSet AnalyzeWithTrack(const SignalBuffer& buffer, const F0Track& track,
                             const AnalysisOptions& options) {
  buffer.Validate();
  track.Validate();
  const int fs = buffer.sample_rate;
  track.grid.Validate(fs);
  const std::vector<double> window =
      MakeWindow(track.grid.window, track.grid.WindowLength(fs));
  const std::size_t frames = track.size();

  std::vector<FrameResult> results(frames);
  ParallelFor(frames, options.threads, [&](std::size_t l) {
    results[l] = AnalyzeFrame(buffer, track.grid.centers[l], track.values[l], window,
                              options, l);
  });

  std::size_t k_max = 0;
  for (const auto& r : results) k_max = std::max(k_max, r.freqs.size());
  HarmonicSet set;
  set.grid = track.grid;
  set.sample_rate = fs;
  set.freqs = FrameMatrix(frames, k_max, 0.0);
  set.amps = FrameMatrix(frames, k_max, 0.0);
  set.f0 = track.values;
  set.flags.assign(frames, 0);
  FrameMatrix measured(frames, k_max, 0.0);
  for (std::size_t l = 0; l < frames; ++l) {
    const FrameResult& r = results[l];
    std::copy(r.freqs.begin(), r.freqs.end(), set.freqs.row(l).begin());
    std::copy(r.amps.begin(), r.amps.end(), set.amps.row(l).begin());
    std::copy(r.phases.begin(), r.phases.end(), measured.row(l).begin());
    set.flags[l] = r.flags;
    // The refined f0 must keep the component count used by the fit.
    const double f0 = track.values[l];
    const double refined = r.f0_estimate;
    if (options.refine_f0 && f0 > 0.0 && refined > 0.0 &&
        std::abs(refined - f0) <= 0.05 * f0 &&
        options.rule.Count(refined, fs) == options.rule.Count(f0, fs)) {
      set.f0[l] = refined;
    }
  }
  AssignPhases(set, measured, options.rule.guard_hz);
  return set;
}

HarmonicSet Analyze(const SignalBuffer& buffer, const AnalysisOptions& options,
                    RefineReport* report) {
  buffer.Validate();
  if (buffer.empty()) Fail(ErrorCode::kInvalidArgument, "cannot analyze an empty buffer");
  const FrameGrid grid = FrameGrid::Covering(buffer.size(), buffer.sample_rate,
                                             options.frame_shift, options.half_window,
                                             options.window);
  return AnalyzeTrackAndRefine(buffer, DetectF0(buffer, grid, options.pitch), options,
                               report);
}

HarmonicSet AnalyzeTrackAndRefine(const SignalBuffer& buffer, const F0Track& track,
                                  const AnalysisOptions& options, RefineReport* report) {
  HarmonicSet set = AnalyzeWithTrack(buffer, track, options);
  if (options.adaptive != AdaptiveMode::kNone) {
    set = RefineAdaptive(buffer, set, options.adaptive, options.adaptive_iterations,
                         options, report);
  }
  return set;
}

HarmonicSet RefineAdaptive(const SignalBuffer& buffer,
                           const HarmonicSet& initial, AdaptiveMode mode,
                           int max_iters, const AnalysisOptions& options,
                           RefineReport* report) {
  Require(max_iters >= 1, "adaptive refinement needs at least one iteration");
  Require(mode != AdaptiveMode::kNone, "adaptive mode must be aqhm or eaqhm");
  buffer.Validate();
  initial.Validate();
  if (buffer.sample_rate != initial.sample_rate) {
    Fail(ErrorCode::kDimensionMismatch, "buffer and harmonic set sample rates differ");
  }
  const int fs = buffer.sample_rate;
  const FrameGrid& grid = initial.grid;
  const std::size_t frames = initial.num_frames();
  const std::size_t k_max = initial.num_components();
  const std::vector<double> window = MakeWindow(grid.window, grid.WindowLength(fs));
  const double limit = options.rule.Limit(fs);

  RefineReport local;
  RefineReport& rep = report ? *report : local;
  rep = RefineReport{};
  HarmonicSet current = initial;
  double snr = ResynthesisSnr(buffer, current, options.threads);
  rep.snr_history.push_back(snr);
  if (frames == 0 || k_max == 0) return current;

  // Baseline: stationary fit on the seed grid of each frame.
  std::vector<double> baseline(frames, INFINITY);
  ParallelFor(frames, options.threads, [&](std::size_t l) {
    const std::size_t count = current.ComponentCount(l);
    if (count == 0) return;
    const AnalysisFrame frame = ExtractFrame(buffer, grid.centers[l], window, FrameEdge::kSlideInside);
    const double spacing = options.rule.EffectiveF0(current.f0[l]);
    std::vector<double> f_hats(count);
    for (std::size_t k = 0; k < count; ++k) f_hats[k] = static_cast<double>(k + 1) * spacing;
    try {
      baseline[l] = QhmLsFit(frame, f_hats, l, options.ls).residual_energy;
    } catch (const Error&) {
    }
  });

  for (int iter = 0; iter < max_iters; ++iter) {
    FrameMatrix held_f = current.freqs;
    FrameMatrix held_a = current.amps;
    MuteAndHold(held_f, held_a, limit);
    FrameMatrix measured(frames, k_max, 0.0);
    for (std::size_t i = 0; i < measured.data().size(); ++i) {
      measured.data()[i] = WrapPhase(current.phases.data()[i]);
    }
    HarmonicSet next = current;
    std::vector<double> next_residual = baseline;
    std::vector<std::uint8_t> rejected(frames, 0);

    ParallelFor(frames, options.threads, [&](std::size_t l) {
      std::vector<std::size_t> live;
      for (std::size_t k = 0; k < k_max; ++k) {
        const double f = current.freqs(l, k);
        if (f > 0.0 && f < 0.5 * fs) live.push_back(k);
      }
      if (live.empty()) return;
      const AnalysisFrame frame = ExtractFrame(buffer, grid.centers[l], window, FrameEdge::kSlideInside);
      const std::size_t n = frame.size();
      // Knot segment and weight of each sample's absolute time.
      std::vector<std::size_t> seg(n);
      std::vector<double> u(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double t = grid.centers[l] + frame.times[i];
        if (frames == 1 || t <= grid.centers.front()) {
          seg[i] = 0;
          u[i] = 0.0;
        } else if (t >= grid.centers.back()) {
          seg[i] = frames - 2;
          u[i] = 1.0;
        } else {
          const auto it = std::upper_bound(grid.centers.begin(), grid.centers.end(), t);
          seg[i] = static_cast<std::size_t>(it - grid.centers.begin()) - 1;
          u[i] = (t - grid.centers[seg[i]]) /
                 (grid.centers[seg[i] + 1] - grid.centers[seg[i]]);
        }
      }
      auto interp = [&](const FrameMatrix& m, std::size_t k, std::size_t i) {
        if (frames == 1) return m(0, k);
        return m(seg[i], k) + u[i] * (m(seg[i] + 1, k) - m(seg[i], k));
      };
      AdaptiveBasis basis;
      basis.phase.resize(live.size());
      if (mode == AdaptiveMode::kEaqhm) basis.gain.resize(live.size());
      std::vector<double> centers(live.size());
      std::vector<double> inst(n);
      for (std::size_t j = 0; j < live.size(); ++j) {
        const std::size_t k = live[j];
        for (std::size_t i = 0; i < n; ++i) inst[i] = interp(held_f, k, i);
        const double f_center = current.freqs(l, k);
        centers[j] = f_center;
        const double origin_phase =
            kPi * (f_center + inst[frame.origin]) * frame.times[frame.origin];
        basis.phase[j] = IntegratePhase(frame.times, inst, frame.origin, origin_phase);
        if (mode == AdaptiveMode::kEaqhm) {
          basis.gain[j].assign(n, 1.0);
          const double a0 = current.amps(l, k);
          if (a0 > kAmplitudeFloor) {
            for (std::size_t i = 0; i < n; ++i) basis.gain[j][i] = interp(held_a, k, i) / a0;
          }
        }
      }
      QhmFrameParams params;
      try {
        params = QhmLsFitAdaptive(frame, basis, centers, l, options.ls);
      } catch (const Error&) {
        rejected[l] = 1;
        return;
      }
      if (!(params.residual_energy < baseline[l])) return;
      next_residual[l] = params.residual_energy;
      const FrequencyCorrection corr = CorrectFrequencies(params);
      const double spacing = options.rule.EffectiveF0(current.f0[l]);
      for (std::size_t j = 0; j < live.size(); ++j) {
        const std::size_t k = live[j];
        next.freqs(l, k) = Corrected(centers[j], corr.eta[j], corr.undefined[j], spacing,
                                     buffer.nyquist());
        const AmpPhase ap = FramewiseAmpPhase(params.a[j]);
        next.amps(l, k) = ap.amplitude;
        measured(l, k) = ap.phase;
      }
    });
    for (std::size_t l = 0; l < frames; ++l) {
      if (rejected[l]) {
        next.flags[l] |= kFrameAdaptiveRejected;
        ++rep.rejected_frames;
      }
    }
    AssignPhases(next, measured, options.rule.guard_hz);
    const double next_snr = ResynthesisSnr(buffer, next, options.threads);
    if (!(next_snr >= snr)) break;
    const double gain = next_snr - snr;
    current = std::move(next);
    baseline = std::move(next_residual);
    rep.snr_history.push_back(next_snr);
    rep.iterations = iter + 1;
    const double previous = snr;
    snr = next_snr;
    if (gain < options.adaptive_tolerance * std::abs(previous)) break;
  }
  return current;
}

}  // namespace qharma
