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

#include "qharma/modification.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "qharma/error.hpp"
#include "qharma/interp.hpp"

namespace qharma {
namespace {

void CheckGrid(const ArmaCascade& cascade, const ScaleSchedule& schedule,
               const BankPair& banks) {
  if (cascade.frames.size() != schedule.size() ||
      banks.voiced.freqs.frames() != schedule.size() ||
      banks.unvoiced.freqs.frames() != schedule.size()) {
    Fail(ErrorCode::kDimensionMismatch, "cascade, schedule and banks differ in frame count");
  }
}

FrameMatrix GatedMagnitudes(const ArmaCascade& cascade, const Bank& bank,
                            std::span<const double> scale) {
  FrameMatrix amps(bank.freqs.frames(), bank.freqs.components(), 0.0);
  std::vector<double> freqs;
  std::vector<std::size_t> index;
  for (std::size_t l = 0; l < bank.freqs.frames(); ++l) {
    freqs.clear();
    index.clear();
    for (std::size_t k = 0; k < bank.freqs.components(); ++k) {
      if (bank.gate(l, k) != 0.0) {
        freqs.push_back(bank.freqs(l, k));
        index.push_back(k);
      }
    }
    if (freqs.empty() || scale[l] == 0.0) continue;
    ArmaFrame frame = cascade.frames[l];
    frame.gain *= scale[l];
    const EnvelopeSample s = SampleHarmonics(frame, freqs, cascade.sample_rate);
    for (std::size_t j = 0; j < index.size(); ++j) amps(l, index[j]) = s.magnitude[j];
  }
  return amps;
}

FrameMatrix BankPhases(const ArmaCascade& cascade, const ScaleSchedule& schedule,
                       const Bank& bank) {
  const FrameMatrix excitation =
      ExcitationPhase(bank.freqs, cascade.grid.centers, schedule.beta);
  FrameMatrix phases = excitation;
  std::vector<double> freqs;
  std::vector<std::size_t> index;
  for (std::size_t l = 0; l < bank.freqs.frames(); ++l) {
    freqs.clear();
    index.clear();
    for (std::size_t k = 0; k < bank.freqs.components(); ++k) {
      if (bank.freqs(l, k) > 0.0) {
        freqs.push_back(bank.freqs(l, k));
        index.push_back(k);
      }
    }
    if (freqs.empty()) continue;
    const EnvelopeSample s = SampleHarmonics(cascade.frames[l], freqs, cascade.sample_rate);
    for (std::size_t j = 0; j < index.size(); ++j) phases(l, index[j]) += s.delay[j];
  }
  return phases;
}

}  // namespace

void ScaleSchedule::Validate() const {
  const std::size_t n = beta.size();
  if (rho.size() != n || voiced.size() != n || times.size() != n) {
    Fail(ErrorCode::kDimensionMismatch, "schedule fields differ in length");
  }
  for (std::size_t l = 0; l < n; ++l) {
    Require(std::isfinite(beta[l]) && beta[l] > 0.0, "time-scale factors must be positive");
    Require(std::isfinite(rho[l]) && rho[l] > 0.0, "pitch-scale factors must be positive");
    if (l > 0) Require(times[l] > times[l - 1], "modified times must increase");
  }
  if (n > 0) Require(times[0] == 0.0, "modified time axis must start at 0");
}

std::vector<double> ScaledTimes(std::span<const double> centers,
                                std::span<const double> betas) {
  if (centers.size() != betas.size()) {
    Fail(ErrorCode::kDimensionMismatch, "one time-scale factor per frame is required");
  }
  std::vector<double> out(centers.size(), 0.0);
  double stretch = 0.0;
  for (std::size_t l = 0; l < centers.size(); ++l) {
    Require(std::isfinite(betas[l]) && betas[l] > 0.0, "time-scale factors must be positive");
    if (l > 0) stretch += (betas[l] - 1.0) * (centers[l] - centers[l - 1]);
    out[l] = (centers[l] - centers[0]) + stretch;
  }
  return out;
}

ScaleSchedule ScaleSchedule::Identity(const F0Track& track) {
  return Constant(track, 1.0, 1.0);
}

ScaleSchedule ScaleSchedule::Constant(const F0Track& track, double beta,
                                      double rho) {
  const std::size_t n = track.size();
  ScaleSchedule s;
  s.beta.assign(n, beta);
  s.rho.assign(n, rho);
  s.voiced.resize(n);
  for (std::size_t l = 0; l < n; ++l) s.voiced[l] = track.voiced(l) ? 1 : 0;
  s.times = ScaledTimes(track.grid.centers, s.beta);
  s.Validate();
  return s;
}

std::vector<ScheduleBreakpoint> ParseSchedule(const std::string& text) {
  std::vector<ScheduleBreakpoint> points;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    ScheduleBreakpoint p;
    if (!(fields >> p.time)) continue;
    if (!(fields >> p.beta >> p.rho) || !(fields >> std::ws).eof()) {
      Fail(ErrorCode::kFormat, "schedule line " + std::to_string(line_no) +
                                   ": expected 'time beta rho'");
    }
    if (!(std::isfinite(p.time) && p.beta > 0.0 && p.rho > 0.0 &&
          std::isfinite(p.beta) && std::isfinite(p.rho))) {
      Fail(ErrorCode::kFormat, "schedule line " + std::to_string(line_no) +
                                   ": factors must be positive and finite");
    }
    if (!points.empty() && p.time <= points.back().time) {
      Fail(ErrorCode::kFormat, "schedule line " + std::to_string(line_no) +
                                   ": times must increase");
    }
    points.push_back(p);
  }
  if (points.empty()) Fail(ErrorCode::kFormat, "schedule has no breakpoints");
  return points;
}

std::vector<ScheduleBreakpoint> ReadScheduleFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open schedule file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return ParseSchedule(text.str());
}

ScaleSchedule ScheduleFromBreakpoints(const F0Track& track,
                                      std::span<const ScheduleBreakpoint> points) {
  Require(!points.empty(), "schedule has no breakpoints");
  std::vector<double> t, b, r;
  for (const auto& p : points) {
    t.push_back(p.time);
    b.push_back(p.beta);
    r.push_back(p.rho);
  }
  ScaleSchedule s;
  s.beta = LinearInterp(t, b, track.grid.centers);
  s.rho = LinearInterp(t, r, track.grid.centers);
  s.voiced.resize(track.size());
  for (std::size_t l = 0; l < track.size(); ++l) s.voiced[l] = track.voiced(l) ? 1 : 0;
  s.times = ScaledTimes(track.grid.centers, s.beta);
  s.Validate();
  return s;
}

BankPair ScaledFreqs(const F0Track& track, const ScaleSchedule& schedule,
                     int sample_rate, const HarmonicRule& rule) {
  track.Validate();
  schedule.Validate();
  if (schedule.size() != track.size()) {
    Fail(ErrorCode::kDimensionMismatch, "schedule and f0 track differ in length");
  }
  Require(sample_rate > 0, "sample rate must be positive");
  const std::size_t frames = track.size();
  const double limit = rule.Limit(sample_rate);
  BankPair out;
  out.k_orig.assign(frames, 0);
  out.k_mod.assign(frames, 0);
  out.gain_scale.assign(frames, 1.0);

  std::size_t kv = 0;
  for (std::size_t l = 0; l < frames; ++l) {
    if (schedule.voiced[l] && track.values[l] > 0.0) {
      out.k_orig[l] = rule.Count(track.values[l], sample_rate);
      kv = std::max(kv, out.k_orig[l]);
    }
  }
  const std::size_t ku = rule.Count(0.0, sample_rate);
  out.voiced.freqs = FrameMatrix(frames, kv, 0.0);
  out.voiced.gate = FrameMatrix(frames, kv, 0.0);
  out.unvoiced.freqs = FrameMatrix(frames, ku, 0.0);
  out.unvoiced.gate = FrameMatrix(frames, ku, 0.0);

  for (std::size_t l = 0; l < frames; ++l) {
    const bool voiced = schedule.voiced[l] && track.values[l] > 0.0;
    if (voiced) {
      const double f0 = track.values[l];
      const double rho = schedule.rho[l];
      for (std::size_t k = 0; k < kv; ++k) {
        const double f = rho * static_cast<double>(k + 1) * f0;
        out.voiced.freqs(l, k) = f;
        if (k < out.k_orig[l] && f <= limit) {
          out.voiced.gate(l, k) = 1.0;
          ++out.k_mod[l];
        }
      }
      out.gain_scale[l] =
          out.k_mod[l] == 0
              ? 0.0
              : std::sqrt(static_cast<double>(out.k_orig[l]) / static_cast<double>(out.k_mod[l]));
    } else {
      for (std::size_t k = 0; k < ku; ++k) {
        out.unvoiced.freqs(l, k) = static_cast<double>(k + 1) * rule.unvoiced_f0;
        out.unvoiced.gate(l, k) = 1.0;
      }
    }
  }
  HoldFrequencies(out.voiced.freqs, out.voiced.gate);
  HoldFrequencies(out.unvoiced.freqs, out.unvoiced.gate);
  // Never-live columns keep zero frequency so that they are skipped.
  for (Bank* bank : {&out.voiced, &out.unvoiced}) {
    for (std::size_t k = 0; k < bank->freqs.components(); ++k) {
      bool live = false;
      for (std::size_t l = 0; l < frames && !live; ++l) live = bank->gate(l, k) != 0.0;
      if (!live) {
        for (std::size_t l = 0; l < frames; ++l) bank->freqs(l, k) = 0.0;
      }
    }
  }
  return out;
}

BankTables ModifiedAmplitudes(const ArmaCascade& cascade,
                              const ScaleSchedule& schedule,
                              const BankPair& banks) {
  CheckGrid(cascade, schedule, banks);
  const std::vector<double> unit(schedule.size(), 1.0);
  return {GatedMagnitudes(cascade, banks.voiced, banks.gain_scale),
          GatedMagnitudes(cascade, banks.unvoiced, unit)};
}

BankTables ModifiedPhases(const ArmaCascade& cascade,
                          const ScaleSchedule& schedule, const BankPair& banks) {
  CheckGrid(cascade, schedule, banks);
  return {BankPhases(cascade, schedule, banks.voiced),
          BankPhases(cascade, schedule, banks.unvoiced)};
}

SignalBuffer Modify(const ArmaCascade& cascade, const F0Track& track,
                    const ScaleSchedule& schedule,
                    const SynthesisOptions& options, ModifyReport* report) {
  cascade.Validate();
  if (!SameGrid(cascade.grid, track.grid, 0.5 / cascade.sample_rate)) {
    Fail(ErrorCode::kDimensionMismatch, "cascade and f0 track use different frame grids");
  }
  const BankPair banks = ScaledFreqs(track, schedule, cascade.sample_rate, options.rule);
  SignalBuffer out;
  out.sample_rate = cascade.sample_rate;
  if (schedule.size() > 0) {
    const BankTables amps = ModifiedAmplitudes(cascade, schedule, banks);
    const BankTables phases = ModifiedPhases(cascade, schedule, banks);
    SignalBuffer voiced = Render(amps.voiced, phases.voiced, schedule.times,
                                 cascade.sample_rate, options.threads);
    const SignalBuffer unvoiced = Render(amps.unvoiced, phases.unvoiced, schedule.times,
                                         cascade.sample_rate, options.threads);
    for (std::size_t n = 0; n < voiced.size(); ++n) voiced.samples[n] += unvoiced.samples[n];
    out = std::move(voiced);
  }
  if (report) {
    report->duration = schedule.size() > 0 ? schedule.times.back() : 0.0;
    report->silenced_frames = 0;
    for (std::size_t l = 0; l < schedule.size(); ++l) {
      if (banks.k_orig[l] > 0 && banks.k_mod[l] == 0) ++report->silenced_frames;
    }
  }
  return out;
}

}  // namespace qharma
