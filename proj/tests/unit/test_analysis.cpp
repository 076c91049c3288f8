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

#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "qharma/analysis.hpp"
#include "qharma/fixtures.hpp"
#include "qharma/metrics.hpp"
#include "qharma/pitch.hpp"
#include "qharma/synthesis.hpp"

using namespace qharma;

namespace {

FrameGrid GridFor(const SignalBuffer& b) {
  return FrameGrid::Covering(b.size(), b.sample_rate, 0.005, 0.01);
}

Fixture Make(FixtureKind kind, double duration, double f0 = 0.0) {
  FixtureParams p = FixtureParams::Defaults(kind);
  p.duration = duration;
  if (f0 > 0.0) p.f0 = f0;
  return GenerateFixture(p);
}

}  // namespace

TEST_CASE("pitch tracking") {
  SignalBuffer silence;
  silence.sample_rate = 24000;
  silence.samples.assign(12000, 0.0);
  const F0Track none = DetectF0(silence, GridFor(silence));
  for (double f : none.values) CHECK(f == 0.0);

  const Fixture tone = Make(FixtureKind::kTone, 0.5, 200.0);
  const F0Track t = DetectF0(tone.buffer, GridFor(tone.buffer));
  for (double f : t.values) CHECK(std::abs(f - 200.0) <= 2.0);

  const Fixture noise = Make(FixtureKind::kNoise, 1.0);
  const F0Track n = DetectF0(noise.buffer, GridFor(noise.buffer));
  const auto unvoiced = std::count(n.values.begin(), n.values.end(), 0.0);
  CHECK(static_cast<double>(unvoiced) >= 0.8 * static_cast<double>(n.size()));
}

TEST_CASE("harmonic count rule") {
  const HarmonicRule rule;
  CHECK(rule.Count(200.0, 24000) == 59);
  CHECK(rule.Count(0.0, 24000) == 119);
  CHECK(rule.EffectiveF0(0.0) == 100.0);
}

TEST_CASE("analysis of silence and a tone") {
  SignalBuffer silence;
  silence.sample_rate = 24000;
  silence.samples.assign(4800, 0.0);
  const HarmonicSet quiet = Analyze(silence);
  for (double f : quiet.f0) CHECK(f == 0.0);
  for (double a : quiet.amps.data()) CHECK(std::abs(a) <= 1e-12);

  const Fixture tone = Make(FixtureKind::kTone, 0.3, 200.0);
  const HarmonicSet set = Analyze(tone.buffer);
  const HarmonicRule rule;
  for (std::size_t l = 0; l < set.num_frames(); ++l) {
    CHECK(set.f0[l] == doctest::Approx(200.0).epsilon(1e-3));
    CHECK(set.ComponentCount(l) == rule.Count(set.f0[l], 24000));
    const auto row = set.amps.row(l);
    CHECK(std::max_element(row.begin(), row.end()) == row.begin());
    CHECK(row[0] == doctest::Approx(0.25).epsilon(1e-3));
  }
  set.Validate();
}

TEST_CASE("compensations keep the measured phases") {
  const Fixture ms = Make(FixtureKind::kMultisine, 0.3);
  const HarmonicSet set = Analyze(ms.buffer);
  for (double c : set.compensations.data()) {
    CHECK(c >= -kPi);
    CHECK(c <= kPi);
  }
  const FrameMatrix exc = ExcitationPhase(set.freqs, set.grid.centers);
  const FrameMatrix comp = CompensatedPhase(exc, set.compensations);
  for (std::size_t l = 0; l < set.num_frames(); ++l) {
    for (std::size_t k = 0; k < set.ComponentCount(l); ++k) {
      CHECK(std::abs(std::remainder(comp(l, k) - set.phases(l, k), kTwoPi)) <= 1e-9);
    }
  }
}

TEST_CASE("adaptive refinement") {
  const Fixture ms = Make(FixtureKind::kMultisine, 0.3);
  const HarmonicSet plain = Analyze(ms.buffer);
  const HarmonicSet adapted = RefineAdaptive(ms.buffer, plain, AdaptiveMode::kAqhm, 2);
  for (std::size_t i = 0; i < plain.amps.data().size(); ++i) {
    CHECK(std::abs(adapted.amps.data()[i] - plain.amps.data()[i]) <= 1e-8);
  }

  FixtureParams cp = FixtureParams::Defaults(FixtureKind::kChirp);
  cp.duration = 0.5;
  cp.f0 = 100.0;
  cp.f0_end = 140.0;
  const Fixture chirp = GenerateFixture(cp);
  RefineReport report;
  const HarmonicSet initial = Analyze(chirp.buffer);
  const HarmonicSet refined = RefineAdaptive(chirp.buffer, initial, AdaptiveMode::kAqhm, 3, {}, &report);
  REQUIRE(report.snr_history.size() >= 2);
  for (std::size_t i = 1; i < report.snr_history.size(); ++i) {
    CHECK(report.snr_history[i] >= report.snr_history[i - 1]);
  }
  CHECK(Snr(SynthesizeQhm(refined), chirp.buffer) == doctest::Approx(report.snr_history.back()));

  FixtureParams ap = FixtureParams::Defaults(FixtureKind::kAm);
  ap.duration = 0.5;
  ap.am_rate = 5.0;
  ap.am_depth = 0.5;
  const Fixture am = GenerateFixture(ap);
  const HarmonicSet am_initial = Analyze(am.buffer);
  RefineReport ra, re;
  const HarmonicSet a = RefineAdaptive(am.buffer, am_initial, AdaptiveMode::kAqhm, 2, {}, &ra);
  const HarmonicSet e = RefineAdaptive(am.buffer, am_initial, AdaptiveMode::kEaqhm, 2, {}, &re);
  CHECK(Snr(SynthesizeQhm(e), am.buffer) >= Snr(SynthesizeQhm(a), am.buffer) - 1e-9);
}
