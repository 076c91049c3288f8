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
#include "qharma/arma.hpp"
#include "qharma/arma_fit.hpp"
#include "qharma/error.hpp"
#include "test_support.hpp"

using namespace qharma;
using qharma::testing::DirectSection;
using qharma::testing::RandomStableFrame;

TEST_CASE("section response closed forms") {
  const ArmaSection empty;
  for (double w : {0.0, 0.3, 2.0}) CHECK(SectionResponse(empty, w) == std::complex<double>(1.0));
  CHECK(std::abs(SectionResponse({{-0.9}, {}}, 0.0) - 10.0) <= 1e-12);
  CHECK(std::abs(SectionResponse({{}, {-1.0}}, 0.0)) <= 1e-15);
}

TEST_CASE("cascade response closed forms") {
  ArmaFrame gain_only;
  gain_only.gain = 2.0;
  CHECK(CascadeResponse(gain_only, 1.1) == std::complex<double>(2.0));
  ArmaFrame two;
  two.sections = {{{-0.5}, {}}, {{-0.5}, {}}};
  CHECK(std::abs(CascadeResponse(two, 0.0) - 4.0) <= 1e-12);
}

TEST_CASE("sampled harmonics") {
  const ArmaFrame id = IdentityFrame(ArmaOrders{16, 16, 2}, 1.7);
  const std::vector<double> f{100.0, 1000.0, 5000.0};
  EnvelopeSample s = SampleHarmonics(id, f, 24000);
  for (std::size_t i = 0; i < f.size(); ++i) {
    CHECK(s.magnitude[i] == doctest::Approx(1.7));
    CHECK(s.delay[i] == 0.0);
  }
  ArmaFrame pole;
  pole.sections = {{{-0.7}, {}}};
  const double dc[] = {0.0};
  CHECK(SampleHarmonics(pole, dc, 24000).delay[0] == 0.0);

  std::mt19937_64 rng(31);
  const ArmaFrame frame = RandomStableFrame(rng, ArmaOrders{12, 8, 4}, 0.9, 1.2);
  s = SampleHarmonics(frame, f, 24000);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double w = kTwoPi * f[i] / 24000.0;
    std::complex<double> h = frame.gain;
    double delay = 0.0;
    for (const ArmaSection& sec : frame.sections) {
      h *= DirectSection(sec, w);
      delay += std::arg(DirectSection(sec, w));
    }
    CHECK(s.magnitude[i] == doctest::Approx(std::abs(h)).epsilon(1e-12));
    CHECK(s.delay[i] == doctest::Approx(delay).epsilon(1e-12));
  }
}

TEST_CASE("time-domain filtering") {
  std::mt19937_64 rng(32);
  std::normal_distribution<double> normal;
  std::vector<double> x(500);
  for (double& v : x) v = normal(rng);
  const std::vector<double> scaled = FilterTimeDomain(IdentityFrame(ArmaOrders{4, 4, 2}, 0.5), x);
  for (std::size_t n = 0; n < x.size(); ++n) CHECK(scaled[n] == 0.5 * x[n]);

  std::vector<double> impulse(60, 0.0);
  impulse[0] = 1.0;
  ArmaFrame pole;
  pole.sections = {{{-0.9}, {}}};
  const std::vector<double> h = FilterTimeDomain(pole, impulse);
  for (std::size_t n = 0; n < h.size(); ++n) {
    CHECK(h[n] == doctest::Approx(std::pow(0.9, static_cast<double>(n))).epsilon(1e-12));
  }

  const ArmaFrame frame = RandomStableFrame(rng, ArmaOrders{8, 6, 2}, 0.7, 1.0);
  std::vector<double> long_impulse(400, 0.0);
  long_impulse[0] = 1.0;
  const std::vector<double> ir = FilterTimeDomain(frame, long_impulse);
  const std::vector<double> y = FilterTimeDomain(frame, x);
  for (std::size_t n = 0; n < x.size(); ++n) {
    double conv = 0.0;
    for (std::size_t m = 0; m <= n && m < ir.size(); ++m) conv += ir[m] * x[n - m];
    CHECK(y[n] == doctest::Approx(conv).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("polynomial roots and stability projection") {
  const std::vector<double> c = qharma::testing::PolyFromRoots(
      std::vector<std::complex<double>>{std::polar(0.9, 1.0)}, std::vector<double>{-0.5});
  const auto roots = PolynomialRoots(c);
  REQUIRE(roots.size() == 3);
  double top = 0.0;
  for (const auto& z : roots) top = std::max(top, std::abs(z));
  CHECK(top == doctest::Approx(0.9).epsilon(1e-12));

  std::vector<double> unstable = qharma::testing::PolyFromRoots(
      std::vector<std::complex<double>>{std::polar(1.3, 0.4)}, std::vector<double>{0.2});
  CHECK(ProjectStable(unstable));
  CHECK(MaxPoleRadius({unstable, {}}) <= 0.995 + 1e-9);
  std::vector<double> fine = c;
  CHECK_FALSE(ProjectStable(fine));
  CHECK(fine == c);
}

TEST_CASE("orders") {
  const ArmaOrders o = ParseOrders("16,8,4");
  CHECK(o.ar_per_section() == 4);
  CHECK(o.ma_per_section() == 2);
  CHECK(o.num_params() == 25);
  CHECK_THROWS_AS(ParseOrders("16,8,3"), Error);
  CHECK_THROWS_AS(ParseOrders("16;8;4"), Error);
}

TEST_CASE("correction capacity") {
  ArmaCascade cascade;
  cascade.orders = ArmaOrders{2, 0, 1};
  cascade.sample_rate = 24000;
  cascade.grid = FrameGrid::Uniform(2, 0.005, 0.01);
  cascade.frames = {IdentityFrame(cascade.orders), IdentityFrame(cascade.orders)};
  cascade.frames[1].sections[0].ar = {1.0, 1.0};
  const std::vector<double> f{6000.0, 6000.0};
  const CorrectionCapacity cap = ComputeCorrectionCapacity(cascade, f);
  CHECK(cap.cumulative[1] == doctest::Approx(1.0 / (4.0 * 0.005)).epsilon(1e-12));

  std::mt19937_64 rng(33);
  ArmaCascade still;
  still.orders = ArmaOrders{8, 8, 2};
  still.sample_rate = 24000;
  still.grid = FrameGrid::Uniform(10, 0.005, 0.01);
  still.frames.assign(10, RandomStableFrame(rng, still.orders, 0.9, 0.9));
  const CorrectionCapacity flat = ComputeCorrectionCapacity(still, std::vector<double>(10, 450.0));
  for (double v : flat.per_frame) CHECK(v == 0.0);
  CHECK(flat.within_bound);
}

TEST_CASE("fit of flat targets stays at the identity") {
  FitTarget t;
  t.sample_rate = 24000;
  for (int k = 1; k <= 40; ++k) {
    t.freqs_hz.push_back(150.0 * k);
    t.amplitudes.push_back(0.3);
    t.phases.push_back(0.0);
  }
  const FitResult r = FitFrame(t, ArmaOrders{});
  CHECK(r.frame.gain == doctest::Approx(0.3).epsilon(1e-12));
  for (const ArmaSection& s : r.frame.sections) {
    for (double a : s.ar) CHECK(std::abs(a) <= 1e-9);
    for (double b : s.ma) CHECK(std::abs(b) <= 1e-9);
  }
  CHECK(r.loss <= 1e-6);
}

TEST_CASE("fit recovers a known response") {
  std::mt19937_64 rng(34);
  const ArmaFrame truth = RandomStableFrame(rng, ArmaOrders{4, 4, 2}, 0.85, 0.8);
  FitTarget t;
  t.sample_rate = 24000;
  for (int k = 1; k <= 20; ++k) t.freqs_hz.push_back(210.0 * k);
  const EnvelopeSample s = SampleHarmonics(truth, t.freqs_hz, 24000);
  t.amplitudes = s.magnitude;
  for (double d : s.delay) t.phases.push_back(WrapPhase(d));
  for (FitMethod method : {FitMethod::kLevenbergMarquardt}) {
    FitOptions options;
    options.method = method;
    const FitResult r = FitFrame(t, ArmaOrders{}, options);
    const EnvelopeSample g = SampleHarmonics(r.frame, t.freqs_hz, 24000);
    for (std::size_t k = 0; k < t.size(); ++k) {
      CHECK(std::abs(20.0 * std::log10(g.magnitude[k] / t.amplitudes[k])) <= 0.5);
    }
    CHECK(r.loss < r.initial_loss);
    CHECK((r.flags & kFitUnderdetermined) != 0);
    for (std::size_t i = 1; i < r.loss_history.size(); ++i) {
      CHECK(r.loss_history[i] < r.loss_history[i - 1]);
    }
    for (const ArmaSection& sec : r.frame.sections) CHECK(MaxPoleRadius(sec) < 1.0);
  }
}

TEST_CASE("gradient descent lowers the loss monotonically") {
  std::mt19937_64 rng(35);
  const ArmaFrame truth = RandomStableFrame(rng, ArmaOrders{4, 4, 2}, 0.85, 0.8);
  FitTarget t;
  t.sample_rate = 24000;
  for (int k = 1; k <= 20; ++k) t.freqs_hz.push_back(210.0 * k);
  const EnvelopeSample s = SampleHarmonics(truth, t.freqs_hz, 24000);
  t.amplitudes = s.magnitude;
  for (double d : s.delay) t.phases.push_back(WrapPhase(d));
  FitOptions options;
  options.method = FitMethod::kGradientDescent;
  options.max_steps = 100;
  options.max_restarts = 0;
  const FitResult r = FitFrame(t, ArmaOrders{8, 8, 2}, options);
  CHECK(r.loss < r.initial_loss);
  for (std::size_t i = 1; i < r.loss_history.size(); ++i) {
    CHECK(r.loss_history[i] <= r.loss_history[i - 1]);
  }
  CHECK(FitLoss(r.frame, t, options) == doctest::Approx(r.loss).epsilon(1e-9));
}

TEST_CASE("degenerate targets") {
  FitTarget t;
  t.sample_rate = 24000;
  t.freqs_hz = {100.0, 200.0};
  t.amplitudes = {0.0, 0.0};
  t.phases = {0.0, 0.0};
  const FitResult r = FitFrame(t, ArmaOrders{});
  CHECK(r.frame.gain == FitOptions{}.epsilon);
  CHECK((r.flags & kFitDegenerate) != 0);
  t.amplitudes = {0.1};
  CHECK_THROWS_AS(FitFrame(t, ArmaOrders{}), Error);
}
