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

#include <cmath>
#include <vector>

#include "doctest.h"
#include "qharma/arma.hpp"
#include "qharma/error.hpp"
#include "qharma/fixtures.hpp"
#include "qharma/modification.hpp"
#include "qharma/pitch.hpp"
#include "qharma/synthesis.hpp"

using namespace qharma;

namespace {

ArmaCascade ConstantCascade(const FrameGrid& grid, int fs, const ArmaFrame& frame,
                            const ArmaOrders& orders) {
  ArmaCascade c;
  c.orders = orders;
  c.grid = grid;
  c.sample_rate = fs;
  c.frames.assign(grid.size(), frame);
  c.flags.assign(grid.size(), 0);
  c.losses.assign(grid.size(), 0.0);
  return c;
}

ArmaCascade Flat(const FrameGrid& grid) {
  const ArmaOrders orders{8, 8, 2};
  return ConstantCascade(grid, 24000, IdentityFrame(orders), orders);
}

}  // namespace

TEST_CASE("scaled times") {
  const std::vector<double> t{0.0, 0.01, 0.02, 0.03};
  CHECK(ScaledTimes(t, std::vector<double>(4, 1.0)) == t);
  const std::vector<double> doubled = ScaledTimes(t, std::vector<double>(4, 2.0));
  for (std::size_t l = 0; l < 4; ++l) CHECK(doubled[l] == doctest::Approx(0.02 * l));
  const std::vector<double> mixed = ScaledTimes(std::vector<double>{0.0, 0.01, 0.02},
                                                std::vector<double>{1.0, 2.0, 1.0});
  CHECK(mixed[0] == 0.0);
  CHECK(mixed[1] == doctest::Approx(0.02));
  CHECK(mixed[2] == doctest::Approx(0.03));
}

TEST_CASE("scaled frequencies") {
  const FrameGrid grid = FrameGrid::Uniform(4, 0.005, 0.01);
  const F0Track track{{200.0, 200.0, 0.0, 200.0}, grid};
  const BankPair same = ScaledFreqs(track, ScaleSchedule::Identity(track), 24000);
  CHECK(same.k_orig[0] == 59);
  CHECK(same.k_mod[0] == 59);
  for (std::size_t k = 0; k < 59; ++k) CHECK(same.voiced.freqs(0, k) == (k + 1) * 200.0);

  const BankPair up = ScaledFreqs(track, ScaleSchedule::Constant(track, 1.0, 2.0), 24000);
  CHECK(up.k_mod[0] == 29);
  CHECK(up.gain_scale[0] == doctest::Approx(std::sqrt(59.0 / 29.0)));

  const double root2 = std::sqrt(2.0);
  const BankPair mid = ScaledFreqs(track, ScaleSchedule::Constant(track, 1.0, root2), 24000);
  CHECK(mid.voiced.freqs(1, 2) == doctest::Approx(3.0 * 200.0 * root2));
  for (std::size_t k = 0; k < mid.unvoiced.freqs.components(); ++k) {
    CHECK(mid.unvoiced.freqs(2, k) == same.unvoiced.freqs(2, k));
  }
  CHECK(mid.unvoiced.gate(2, 0) == 1.0);
  CHECK(mid.voiced.gate(2, 0) == 0.0);
}

TEST_CASE("modified amplitudes") {
  const FrameGrid grid = FrameGrid::Uniform(6, 0.005, 0.01);
  F0Track track{std::vector<double>(6, 200.0), grid};
  track.values[3] = 0.0;
  const ArmaOrders orders{10, 0, 5};
  const ArmaCascade env = ConstantCascade(grid, 24000, VowelEnvelope(24000, 0.3), orders);
  const ScaleSchedule id = ScaleSchedule::Identity(track);
  const BankPair banks = ScaledFreqs(track, id, 24000);
  const BankTables amps = ModifiedAmplitudes(env, id, banks);
  const EnvelopeSample s = SampleHarmonics(env.frames[0], banks.voiced.freqs.row(0), 24000);
  for (std::size_t k = 0; k < 59; ++k) CHECK(amps.voiced(0, k) == s.magnitude[k]);
  for (double a : amps.voiced.row(3)) CHECK(a == 0.0);
  CHECK(amps.unvoiced(3, 0) > 0.0);
  for (double a : amps.unvoiced.row(0)) CHECK(a == 0.0);

  const ArmaCascade flat = Flat(grid);
  const F0Track voiced{std::vector<double>(6, 200.0), grid};
  const ScaleSchedule up = ScaleSchedule::Constant(voiced, 1.0, 2.0);
  const BankTables scaled = ModifiedAmplitudes(flat, up, ScaledFreqs(voiced, up, 24000));
  double power = 0.0;
  for (double a : scaled.voiced.row(0)) power += 2.0 * a * a;
  CHECK(power == doctest::Approx(2.0 * 59.0).epsilon(0.01));
}

TEST_CASE("modified phases") {
  const FrameGrid grid = FrameGrid::Uniform(6, 0.005, 0.01);
  const F0Track track{std::vector<double>(6, 150.0), grid};
  const ArmaCascade flat = Flat(grid);
  const ScaleSchedule id = ScaleSchedule::Identity(track);
  const BankPair banks = ScaledFreqs(track, id, 24000);
  const BankTables phases = ModifiedPhases(flat, id, banks);
  CHECK(phases.voiced == ExcitationPhase(banks.voiced.freqs, grid.centers));

  const ScaleSchedule slow = ScaleSchedule::Constant(track, 2.0, 1.0);
  const BankTables stretched = ModifiedPhases(flat, slow, ScaledFreqs(track, slow, 24000));
  for (std::size_t l = 1; l < 6; ++l) {
    const double a = stretched.voiced(l, 0) - stretched.voiced(l - 1, 0);
    const double b = phases.voiced(l, 0) - phases.voiced(l - 1, 0);
    CHECK(a == doctest::Approx(2.0 * b));
  }
}

TEST_CASE("schedules") {
  const FrameGrid grid = FrameGrid::Uniform(5, 0.01, 0.01);
  const F0Track track{std::vector<double>(5, 120.0), grid};
  const std::vector<ScheduleBreakpoint> points =
      ParseSchedule("# time beta rho\n0.0 1.0 1.0\n0.04 2.0 1.5\n");
  REQUIRE(points.size() == 2);
  const ScaleSchedule s = ScheduleFromBreakpoints(track, points);
  CHECK(s.beta[2] == doctest::Approx(1.5));
  CHECK(s.rho[4] == doctest::Approx(1.5));
  CHECK_THROWS_AS(ParseSchedule("0.0 1.0\n"), Error);
  CHECK_THROWS_AS(ParseSchedule("0.0 -1.0 1.0\n"), Error);
}

TEST_CASE("modification on the oracle vowel envelope") {
  FixtureParams p = FixtureParams::Defaults(FixtureKind::kVowel);
  p.duration = 0.5;
  const Fixture fx = GenerateFixture(p);
  const FrameGrid grid = FrameGrid::Covering(fx.buffer.size(), 24000, 0.005, 0.01);
  const ArmaOrders orders{10, 0, 5};
  const ArmaCascade cascade = ConstantCascade(grid, 24000, fx.envelope, orders);
  const F0Track track{std::vector<double>(grid.size(), 150.0), grid};

  const SignalBuffer base = SynthesizeArma(cascade, track);
  const SignalBuffer same = Modify(cascade, track, ScaleSchedule::Identity(track));
  REQUIRE(same.size() == base.size());
  for (std::size_t n = 0; n < base.size(); ++n) CHECK(std::abs(same.samples[n] - base.samples[n]) <= 1e-9);

  const SignalBuffer up = Modify(cascade, track, ScaleSchedule::Constant(track, 1.0, 2.0));
  const F0Track detected = DetectF0(up, grid);
  for (double f : detected.values) CHECK(std::abs(f - 300.0) <= 0.02 * 300.0);

  ModifyReport report;
  const SignalBuffer slow = Modify(cascade, track, ScaleSchedule::Constant(track, 2.0, 1.0), {}, &report);
  CHECK(std::abs(slow.duration() - 2.0 * base.duration()) <= 0.005);
  CHECK(report.duration == doctest::Approx(slow.duration()).epsilon(1e-3));
  const FrameGrid slow_grid = FrameGrid::Covering(slow.size(), 24000, 0.005, 0.01);
  for (double f : DetectF0(slow, slow_grid).values) CHECK(std::abs(f - 150.0) <= 0.02 * 150.0);
}
