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
#include <complex>
#include <random>
#include <vector>

#include "doctest.h"
#include "qharma/analysis.hpp"
#include "qharma/arma.hpp"
#include "qharma/fixtures.hpp"
#include "qharma/interp.hpp"
#include "qharma/metrics.hpp"
#include "qharma/synthesis.hpp"
#include "test_support.hpp"

using namespace qharma;

namespace {

double DftMagnitude(const std::vector<double>& x, double freq, int fs) {
  std::complex<double> acc = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    acc += x[n] * std::polar(1.0, -kTwoPi * freq * static_cast<double>(n) / fs);
  }
  return std::abs(acc) / static_cast<double>(x.size());
}

ArmaCascade IdentityCascade(const FrameGrid& grid, int fs, double gain = 1.0) {
  ArmaCascade c;
  c.orders = ArmaOrders{8, 8, 2};
  c.grid = grid;
  c.sample_rate = fs;
  c.frames.assign(grid.size(), IdentityFrame(c.orders, gain));
  c.flags.assign(grid.size(), 0);
  c.losses.assign(grid.size(), 0.0);
  return c;
}

}  // namespace

TEST_CASE("excitation phase") {
  const std::vector<double> t{0.0, 0.01, 0.02};
  FrameMatrix f(3, 1, 100.0);
  FrameMatrix phi = ExcitationPhase(f, t);
  CHECK(phi(0, 0) == 0.0);
  CHECK(phi(1, 0) == doctest::Approx(kTwoPi));
  CHECK(phi(2, 0) == doctest::Approx(2.0 * kTwoPi));
  phi = ExcitationPhase(FrameMatrix(3, 2, 0.0), t);
  for (double v : phi.data()) CHECK(v == 0.0);
  FrameMatrix g(2, 1);
  g(0, 0) = 100.0;
  g(1, 0) = 120.0;
  phi = ExcitationPhase(g, std::vector<double>{0.0, 0.01});
  CHECK(phi(1, 0) == doctest::Approx(2.2 * kPi));
  const std::vector<double> beta{1.0, 2.0};
  CHECK(ExcitationPhase(g, std::vector<double>{0.0, 0.01}, beta)(1, 0) == doctest::Approx(4.4 * kPi));
}

TEST_CASE("compensated phase is a prefix sum") {
  const std::vector<double> t{0.0, 0.01, 0.02, 0.03};
  const FrameMatrix exc = ExcitationPhase(FrameMatrix(4, 2, 150.0), t);
  FrameMatrix zero(4, 2, 0.0);
  CHECK(CompensatedPhase(exc, zero) == exc);
  FrameMatrix step(4, 2, 0.0);
  step(0, 0) = kPi / 2.0;
  const FrameMatrix shifted = CompensatedPhase(exc, step);
  for (std::size_t l = 0; l < 4; ++l) CHECK(shifted(l, 0) == doctest::Approx(exc(l, 0) + kPi / 2.0));

  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  FrameMatrix random(4, 2);
  for (double& v : random.data()) v = u(rng);
  const FrameMatrix out = CompensatedPhase(exc, random);
  for (std::size_t k = 0; k < 2; ++k) {
    double sum = 0.0;
    for (std::size_t l = 0; l < 4; ++l) {
      sum += random(l, k);
      CHECK(out(l, k) == doctest::Approx(exc(l, k) + sum).epsilon(1e-12));
    }
  }
}

TEST_CASE("delayed phase adds the cascade delay") {
  const FrameGrid grid = FrameGrid::Uniform(5, 0.005, 0.01);
  FrameMatrix f(5, 3);
  for (std::size_t l = 0; l < 5; ++l) {
    for (std::size_t k = 0; k < 3; ++k) f(l, k) = (k + 1) * (180.0 + l);
  }
  const FrameMatrix exc = ExcitationPhase(f, grid.centers);
  const ArmaCascade id = IdentityCascade(grid, 24000);
  CHECK(DelayedPhase(exc, id, f) == exc);

  std::mt19937_64 rng(42);
  ArmaCascade c = id;
  for (ArmaFrame& frame : c.frames) frame = qharma::testing::RandomStableFrame(rng, c.orders, 0.9, 0.9);
  const FrameMatrix out = DelayedPhase(exc, c, f);
  for (std::size_t l = 0; l < 5; ++l) {
    const EnvelopeSample s = SampleHarmonics(c.frames[l], f.row(l), 24000);
    for (std::size_t k = 0; k < 3; ++k) CHECK(out(l, k) == doctest::Approx(exc(l, k) + s.delay[k]));
  }
}

TEST_CASE("render") {
  const int fs = 24000;
  const FrameGrid grid = FrameGrid::Uniform(101, 0.005, 0.01);
  FrameMatrix amps(101, 1, 0.5), freqs(101, 1, 100.0);
  const FrameMatrix phases = ExcitationPhase(freqs, grid.centers);
  const SignalBuffer out = Render(amps, phases, grid.centers, fs);
  REQUIRE(out.size() == 12000);
  double peak = 0.0;
  for (double x : out.samples) peak = std::max(peak, std::abs(x));
  CHECK(peak == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(DftMagnitude(out.samples, 100.0, fs) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(DftMagnitude(out.samples, 110.0, fs) < 1e-6);

  const SignalBuffer silent = Render(FrameMatrix(101, 1, 0.0), phases, grid.centers, fs);
  for (double x : silent.samples) CHECK(x == 0.0);

  // Knots at every sample: the rendering reduces to direct evaluation.
  const std::size_t n = 400;
  std::vector<double> t(n);
  FrameMatrix a2(n, 2), p2(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = static_cast<double>(i) / fs;
    a2(i, 0) = 0.3 + 0.1 * std::sin(t[i] * 50.0);
    a2(i, 1) = 0.2;
    p2(i, 0) = kTwoPi * 100.0 * t[i] + 0.4;
    p2(i, 1) = kTwoPi * 200.0 * t[i] - 1.1;
  }
  const SignalBuffer dense = Render(a2, p2, t, fs);
  REQUIRE(dense.size() == n - 1);
  for (std::size_t i = 0; i < dense.size(); ++i) {
    const double direct = 2.0 * a2(i, 0) * std::cos(p2(i, 0)) + 2.0 * a2(i, 1) * std::cos(p2(i, 1));
    CHECK(dense.samples[i] == doctest::Approx(direct).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("QHM resynthesis") {
  const Fixture fx = GenerateFixture(FixtureParams::Defaults(FixtureKind::kMultisine));
  const HarmonicSet set = Analyze(fx.buffer);
  CHECK(Snr(SynthesizeQhm(set), fx.buffer) >= 30.0);

  HarmonicSet empty;
  empty.sample_rate = 24000;
  CHECK(SynthesizeQhm(empty).empty());

  HarmonicSet raw = set;
  const FrameMatrix exact = ExcitationPhase(raw.freqs, raw.grid.centers);
  raw.phases = exact;
  raw.compensations = FrameMatrix(raw.num_frames(), raw.num_components(), 0.0);
  const SignalBuffer a = SynthesizeQhm(raw);
  const SignalBuffer b = Render(raw.amps, exact, raw.grid.centers, 24000);
  CHECK(a.samples == b.samples);
}

TEST_CASE("ARMA synthesis with a flat envelope") {
  const int fs = 24000;
  const FrameGrid grid = FrameGrid::Uniform(201, 0.005, 0.01);
  const ArmaCascade id = IdentityCascade(grid, fs);
  SynthesisOptions options;
  options.rule.guard_hz = 0.5 * fs - 650.0;
  const F0Track track{std::vector<double>(grid.size(), 200.0), grid};
  const SignalBuffer out = SynthesizeArma(id, track, options);
  const double m1 = DftMagnitude(out.samples, 200.0, fs);
  CHECK(DftMagnitude(out.samples, 400.0, fs) == doctest::Approx(m1).epsilon(0.01));
  CHECK(DftMagnitude(out.samples, 600.0, fs) == doctest::Approx(m1).epsilon(0.01));
  CHECK(DftMagnitude(out.samples, 800.0, fs) < 1e-6);

  const F0Track unvoiced{std::vector<double>(grid.size(), 0.0), grid};
  const SignalBuffer bed = SynthesizeArma(id, unvoiced);
  double power = 0.0;
  for (double x : bed.samples) power += x * x;
  power /= static_cast<double>(bed.size());
  const double expected = 2.0 * static_cast<double>(HarmonicRule{}.Count(0.0, fs));
  CHECK(power == doctest::Approx(expected).epsilon(0.05));
}
