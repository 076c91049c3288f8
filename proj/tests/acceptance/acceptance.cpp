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

// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. `--only N` runs a single criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstring>
#include <exception>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "qharma/analysis.hpp"
#include "qharma/arma.hpp"
#include "qharma/arma_fit.hpp"
#include "qharma/fixtures.hpp"
#include "qharma/metrics.hpp"
#include "qharma/modification.hpp"
#include "qharma/pitch.hpp"
#include "qharma/qhm.hpp"
#include "qharma/synthesis.hpp"
#include "test_support.hpp"

namespace {

using namespace qharma;
using qharma::testing::DirectSection;
using qharma::testing::Hasher;
using qharma::testing::RandomStableFrame;

struct Outcome {
  bool pass = true;
  std::string detail;

  void Check(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [failed]");
  }
};

std::string Fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

double Seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Cosine of the given frequency sampled on a frame centered mid-signal.
AnalysisFrame ToneFrame(double freq, double amplitude, double phase, int fs,
                        const std::vector<double>& window) {
  std::vector<double> x(window.size());
  const double center = static_cast<double>(window.size() / 2);
  for (std::size_t n = 0; n < x.size(); ++n) {
    x[n] = amplitude * std::cos(kTwoPi * freq * (static_cast<double>(n) - center) / fs + phase);
  }
  return MakeCenteredFrame(x, window, fs);
}

Outcome CorrectionCriterion() {
  Outcome out;
  const auto start = std::chrono::steady_clock::now();
  const int fs = 24000;
  const std::vector<double> window = MakeWindow(WindowKind::kHann, 481);
  const double guess[] = {100.0};

  const QhmFrameParams p = QhmLsFit(ToneFrame(101.0, 0.5, 0.3, fs, window), guess);
  const double corrected = 100.0 + CorrectFrequencies(p).eta[0];
  out.Check(std::abs(corrected - 101.0) <= 0.05, Fmt("101 Hz tone -> %.5f Hz", corrected));

  std::mt19937_64 rng(100);
  std::uniform_real_distribution<double> offset(-5.0, 5.0), phase(-kPi, kPi), amp(0.05, 1.0);
  int good = 0;
  double worst = 0.0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) {
    const double delta = offset(rng);
    const QhmFrameParams q = QhmLsFit(ToneFrame(100.0 + delta, amp(rng), phase(rng), fs, window), guess);
    const double rel = std::abs(CorrectFrequencies(q).eta[0] - delta) / std::abs(delta);
    worst = std::max(worst, rel);
    if (rel <= 0.05) ++good;
  }
  out.Check(good == trials, Fmt("random offsets within 5%%: %.0f/%.0f, worst %.4f", good, trials, worst));
  const double elapsed = Seconds(start);
  out.Check(elapsed < 1.0, Fmt("%.3f s", elapsed));
  return out;
}

Outcome QhmRoundTrip() {
  Outcome out;
  const auto start = std::chrono::steady_clock::now();
  const Fixture multi = GenerateFixture(FixtureParams::Defaults(FixtureKind::kMultisine));
  const HarmonicSet set = Analyze(multi.buffer);
  const double snr = Snr(SynthesizeQhm(set), multi.buffer);
  out.Check(snr >= 30.0, Fmt("multisine SNR %.2f dB", snr));

  const Fixture chirp = GenerateFixture(FixtureParams::Defaults(FixtureKind::kChirp));
  AnalysisOptions options;
  options.adaptive = AdaptiveMode::kAqhm;
  options.adaptive_iterations = 3;
  RefineReport report;
  const HarmonicSet refined = Analyze(chirp.buffer, options, &report);
  bool monotone = true;
  std::string history;
  for (std::size_t i = 0; i < report.snr_history.size(); ++i) {
    if (i > 0 && report.snr_history[i] < report.snr_history[i - 1]) monotone = false;
    history += (i ? " " : "") + Fmt("%.2f", report.snr_history[i]);
  }
  const double final_snr = Snr(SynthesizeQhm(refined), chirp.buffer);
  out.Check(monotone && report.iterations >= 1,
            "chirp aQHM SNR history [" + history + "] dB, " +
                std::to_string(report.iterations) + " iterations");
  out.Check(final_snr >= 20.0, Fmt("chirp final SNR %.2f dB", final_snr));
  const double elapsed = Seconds(start);
  out.Check(elapsed < 10.0, Fmt("%.3f s", elapsed));
  return out;
}

Outcome TimeFrequencyConsistency() {
  Outcome out;
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = 1024;
  std::vector<std::complex<double>> twiddle(n);
  for (std::size_t i = 0; i < n; ++i) {
    twiddle[i] = std::polar(1.0, -kTwoPi * static_cast<double>(i) / static_cast<double>(n));
  }
  std::vector<double> impulse(n, 0.0);
  impulse[0] = 1.0;
  std::mt19937_64 rng(300);
  const ArmaOrders orders{16, 16, 2};
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const ArmaFrame frame = RandomStableFrame(rng, orders, 0.8, 0.9);
    const std::vector<double> h = FilterTimeDomain(frame, impulse);
    for (std::size_t k = 0; k <= n / 2; ++k) {
      std::complex<double> dft = 0.0;
      for (std::size_t m = 0; m < n; ++m) dft += h[m] * twiddle[(k * m) % n];
      const double omega = kTwoPi * static_cast<double>(k) / static_cast<double>(n);
      const double mag = std::abs(CascadeResponse(frame, omega));
      worst = std::max(worst, std::abs(mag - std::abs(dft)) / mag);
    }
  }
  out.Check(worst <= 1e-6, Fmt("100 cascades (16,16,2), worst relative error %.3g", worst));
  const double elapsed = Seconds(start);
  out.Check(elapsed < 5.0, Fmt("%.3f s", elapsed));
  return out;
}

Outcome PhaseDelayRange() {
  Outcome out;
  const int fs = 24000;
  std::mt19937_64 rng(400);
  std::uniform_real_distribution<double> freq(1.0, 0.5 * fs - 1.0);
  const ArmaOrders orders{16, 16, 8};

  bool in_range = true, consistent = true;
  double widest = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const ArmaFrame frame = RandomStableFrame(rng, orders, 0.95, 1.5);
    std::vector<double> freqs(64);
    for (double& f : freqs) f = freq(rng);
    const EnvelopeSample s = SampleHarmonics(frame, freqs, fs);
    for (std::size_t i = 0; i < freqs.size(); ++i) {
      const double omega = kTwoPi * freqs[i] / fs;
      double oracle = 0.0;
      for (const ArmaSection& sec : frame.sections) oracle += std::arg(DirectSection(sec, omega));
      widest = std::max(widest, std::abs(s.delay[i]));
      if (std::abs(s.delay[i]) > 8.0 * kPi) in_range = false;
      if (std::abs(s.delay[i] - oracle) > 1e-9) consistent = false;
    }
  }
  out.Check(in_range, Fmt("random r = 8 delays within [-8pi, 8pi], widest %.3f rad", widest));
  out.Check(consistent, "delay equals the summed direct section angles");

  // Eight maximum-phase first-order sections, 1 + 1.5 z^-1, near Nyquist.
  ArmaFrame constructed;
  for (int j = 0; j < 8; ++j) constructed.sections.push_back({{0.0, 0.0}, {1.5, 0.0}});
  const double probe[] = {0.48 * fs};
  const double delay = SampleHarmonics(constructed, probe, fs).delay[0];
  out.Check(std::abs(delay) > kPi, Fmt("constructed cascade delay %.3f rad (|.| > pi)", delay));

  // Telescoping of the cumulative correction over random frame sequences.
  ArmaCascade cascade;
  cascade.orders = orders;
  cascade.sample_rate = fs;
  double worst = 0.0;
  for (int seq = 0; seq < 20; ++seq) {
    const std::size_t frames = 60;
    cascade.grid = FrameGrid::Uniform(frames, 0.005, 0.01);
    cascade.frames.clear();
    std::vector<double> freqs(frames);
    std::uniform_real_distribution<double> jitter(-20.0, 20.0);
    const double base = 200.0 + 40.0 * seq;
    for (std::size_t l = 0; l < frames; ++l) {
      cascade.frames.push_back(RandomStableFrame(rng, orders, 0.95, 1.5));
      freqs[l] = base + jitter(rng);
    }
    cascade.flags.assign(frames, 0);
    cascade.losses.assign(frames, 0.0);
    const CorrectionCapacity cap = ComputeCorrectionCapacity(cascade, freqs);
    auto direct = [&](std::size_t l) {
      double d = 0.0;
      for (const ArmaSection& sec : cascade.frames[l].sections) {
        d += std::arg(DirectSection(sec, kTwoPi * freqs[l] / fs));
      }
      return d;
    };
    const double d0 = direct(0);
    for (std::size_t l = 0; l < frames; ++l) {
      const double expected = (direct(l) - d0) / (kTwoPi * cascade.grid.frame_shift);
      worst = std::max(worst, std::abs(cap.cumulative[l] - expected));
    }
  }
  out.Check(worst <= 1e-9, Fmt("cumulative correction telescopes, worst %.3g Hz", worst));
  return out;
}

Outcome FitSelfConsistency() {
  Outcome out;
  const auto start = std::chrono::steady_clock::now();
  const int fs = 24000;
  std::mt19937_64 rng(500);
  std::uniform_real_distribution<double> f0_dist(80.0, 300.0);
  const ArmaOrders truth_orders{8, 8, 4};
  const ArmaOrders fit_orders;
  int good = 0;
  double worst_db = 0.0, worst_rad = 0.0;
  const int trials = 50;
  for (int trial = 0; trial < trials; ++trial) {
    const ArmaFrame truth = RandomStableFrame(rng, truth_orders, 0.9, 0.8);
    const double f0 = f0_dist(rng);
    FitTarget target;
    target.sample_rate = fs;
    for (int k = 1; k <= 30; ++k) target.freqs_hz.push_back(k * f0);
    const EnvelopeSample s = SampleHarmonics(truth, target.freqs_hz, fs);
    target.amplitudes = s.magnitude;
    for (double d : s.delay) target.phases.push_back(WrapPhase(d));

    const FitResult fit = FitFrame(target, fit_orders);
    const EnvelopeSample g = SampleHarmonics(fit.frame, target.freqs_hz, fs);
    double db = 0.0, rad = 0.0;
    for (std::size_t k = 0; k < target.size(); ++k) {
      db = std::max(db, std::abs(20.0 * std::log10(g.magnitude[k] / target.amplitudes[k])));
      rad = std::max(rad, std::abs(WrapPhase(g.delay[k] - target.phases[k])));
    }
    worst_db = std::max(worst_db, db);
    worst_rad = std::max(worst_rad, rad);
    if (db <= 0.5 && rad <= 0.2) ++good;
  }
  out.Check(good >= 48, Fmt("%.0f/%.0f trials within 0.5 dB and 0.2 rad", good, trials));
  out.detail += Fmt(" (worst %.3g dB, %.3g rad)", worst_db, worst_rad);
  const double elapsed = Seconds(start);
  out.Check(elapsed < 60.0, Fmt("%.3f s", elapsed));
  return out;
}

struct VowelPipeline {
  Fixture fixture;
  HarmonicSet set;
  ArmaCascade cascade;
  SignalBuffer synth;
};

const VowelPipeline& Vowel() {
  static const VowelPipeline pipeline = [] {
    VowelPipeline p;
    FixtureParams params = FixtureParams::Defaults(FixtureKind::kVowel);
    params.duration = 0.5;
    p.fixture = GenerateFixture(params);
    p.set = Analyze(p.fixture.buffer);
    p.cascade = FitCascade(p.set, ArmaOrders{});
    p.synth = SynthesizeArma(p.cascade, p.set.Track());
    return p;
  }();
  return pipeline;
}

Outcome EndToEnd() {
  Outcome out;
  const auto start = std::chrono::steady_clock::now();
  const VowelPipeline& v = Vowel();
  out.Check(v.synth.size() == v.fixture.buffer.size(), "synthesis length matches the input");
  const MetricReport report = Evaluate(v.synth, v.fixture.buffer);
  const double snr = report.snr.value_or(-kSnrCap);
  out.Check(snr >= 20.0, Fmt("vowel ARMA SNR %.2f dB", snr));
  out.Check(report.mcd <= 1.5, Fmt("MCD %.4f dB", report.mcd));
  out.detail += Fmt(" (%.1f s)", Seconds(start));
  return out;
}

Outcome ModificationLaws() {
  Outcome out;
  const VowelPipeline& v = Vowel();
  const F0Track track = v.set.Track();
  const int fs = v.cascade.sample_rate;

  std::vector<double> probes;
  for (double f = 50.0; f < 0.5 * fs; f += 97.0) probes.push_back(f);
  std::vector<double> before;
  for (const ArmaFrame& frame : v.cascade.frames) {
    const EnvelopeSample s = SampleHarmonics(frame, probes, fs);
    before.insert(before.end(), s.magnitude.begin(), s.magnitude.end());
  }

  const SignalBuffer identity = Modify(v.cascade, track, ScaleSchedule::Constant(track, 1.0, 1.0));
  double max_diff = identity.size() == v.synth.size() ? 0.0 : INFINITY;
  for (std::size_t n = 0; n < std::min(identity.size(), v.synth.size()); ++n) {
    max_diff = std::max(max_diff, std::abs(identity.samples[n] - v.synth.samples[n]));
  }
  out.Check(max_diff <= 1e-9, Fmt("identity schedule max deviation %.3g", max_diff));

  const ScaleSchedule up = ScaleSchedule::Constant(track, 1.0, 2.0);
  const SignalBuffer shifted = Modify(v.cascade, track, up);
  const FrameGrid grid = FrameGrid::Covering(shifted.size(), fs, track.grid.frame_shift,
                                             track.grid.half_window, track.grid.window);
  const F0Track ref = DetectF0(v.fixture.buffer, grid);
  const F0Track gen = DetectF0(shifted, grid);
  std::size_t both = 0, ref_voiced = 0, within = 0;
  double worst = 0.0;
  for (std::size_t l = 0; l < grid.size(); ++l) {
    if (ref.voiced(l)) ++ref_voiced;
    if (!ref.voiced(l) || !gen.voiced(l)) continue;
    ++both;
    const double rel = std::abs(gen.values[l] / (2.0 * ref.values[l]) - 1.0);
    worst = std::max(worst, rel);
    if (rel <= 0.02) ++within;
  }
  out.Check(both > 0 && within == both && both * 10 >= ref_voiced * 9,
            Fmt("rho = 2: %.0f/%.0f frames within 2%%, worst %.4f", within, both, worst));
  const std::vector<double> rho(grid.size(), 2.0);
  const std::optional<double> rmse = F0Rmse(gen, ref, rho);
  out.Check(rmse && *rmse <= 0.05, Fmt("f0 RMSE %.5f", rmse.value_or(INFINITY)));

  ModifyReport stretch_report;
  const SignalBuffer stretched =
      Modify(v.cascade, track, ScaleSchedule::Constant(track, 2.0, 1.0), {}, &stretch_report);
  const double expected = 2.0 * v.synth.duration();
  const double gap = std::abs(stretched.duration() - expected);
  out.Check(gap <= track.grid.frame_shift,
            Fmt("beta = 2 duration %.4f s vs %.4f s", stretched.duration(), expected));

  const BankPair banks = ScaledFreqs(track, up, fs);
  const BankTables amps = ModifiedAmplitudes(v.cascade, up, banks);
  double amp_err = 0.0;
  for (std::size_t l = 0; l < track.size(); ++l) {
    for (std::size_t k = 0; k < banks.voiced.freqs.components(); ++k) {
      if (banks.voiced.gate(l, k) == 0.0) continue;
      const double omega = kTwoPi * banks.voiced.freqs(l, k) / fs;
      std::complex<double> h = v.cascade.frames[l].gain * banks.gain_scale[l];
      for (const ArmaSection& s : v.cascade.frames[l].sections) h *= DirectSection(s, omega);
      amp_err = std::max(amp_err, std::abs(amps.voiced(l, k) - std::abs(h)) / std::abs(h));
    }
  }
  out.Check(amp_err <= 1e-9, Fmt("shifted amplitudes follow the envelope, rel err %.3g", amp_err));

  std::vector<double> after;
  for (const ArmaFrame& frame : v.cascade.frames) {
    const EnvelopeSample s = SampleHarmonics(frame, probes, fs);
    after.insert(after.end(), s.magnitude.begin(), s.magnitude.end());
  }
  out.Check(before.size() == after.size() &&
                std::memcmp(before.data(), after.data(), before.size() * sizeof(double)) == 0,
            "envelope magnitudes bit-identical after modification");
  return out;
}

Outcome MetricClosedForms() {
  Outcome out;
  FrameMatrix a(1, 24, 0.0), b(1, 24, 0.0);
  std::mt19937_64 rng(800);
  std::normal_distribution<double> normal;
  for (double& x : a.data()) x = normal(rng);
  b = a;
  const double delta = 0.37;
  b(0, 5) += delta;
  const double mcd = Mcd(b, a);
  const double closed = 10.0 * std::sqrt(2.0) / std::log(10.0) * std::abs((a(0, 5) + delta) - a(0, 5));
  out.Check(std::abs(mcd - closed) <= 1e-9, Fmt("MCD %.12f vs %.12f", mcd, closed));

  const FrameGrid grid = FrameGrid::Uniform(100, 0.005, 0.01);
  F0Track ref{std::vector<double>(100), grid}, gen = ref;
  std::vector<double> rho(100);
  std::uniform_real_distribution<double> f0(80.0, 400.0), scale(0.5, 2.0);
  for (std::size_t l = 0; l < 100; ++l) {
    ref.values[l] = l % 7 == 0 ? 0.0 : f0(rng);
    rho[l] = scale(rng);
    gen.values[l] = rho[l] * ref.values[l];
  }
  const std::optional<double> rmse = F0Rmse(gen, ref, rho);
  out.Check(rmse && *rmse <= 1e-12, Fmt("f0 RMSE rho-cancellation %.3g", rmse.value_or(INFINITY)));

  F0Track flipped = ref;
  for (std::size_t l = 0; l < 100; ++l) flipped.values[l] = ref.voiced(l) ? 0.0 : 120.0;
  const double vuv = VuvRate(flipped, ref);
  out.Check(vuv == 100.0, Fmt("V/UV rate on complementary masks %.3f%%", vuv));
  return out;
}

Outcome Performance() {
  Outcome out;
  FixtureParams params = FixtureParams::Defaults(FixtureKind::kVowel);
  params.duration = 5.0;
  const Fixture fx = GenerateFixture(params);
  const double seconds = fx.buffer.duration();

  HarmonicSet set;
  const double rtf_analysis = MeasureRtf([&] { set = Analyze(fx.buffer); }, seconds);

  std::mt19937_64 rng(900);
  ArmaCascade cascade;
  cascade.sample_rate = fx.buffer.sample_rate;
  cascade.grid = set.grid;
  for (std::size_t l = 0; l < set.num_frames(); ++l) {
    cascade.frames.push_back(RandomStableFrame(rng, cascade.orders, 0.9, 0.9));
  }
  cascade.flags.assign(set.num_frames(), 0);
  cascade.losses.assign(set.num_frames(), 0.0);
  const F0Track track = set.Track();
  const double rtf_synthesis = MeasureRtf([&] { SynthesizeArma(cascade, track); }, seconds);
  const double overall = rtf_analysis + rtf_synthesis;
  out.Check(rtf_synthesis < 1.0, Fmt("synthesis RTF %.4f", rtf_synthesis));
  out.Check(overall < 2.0, Fmt("analysis RTF %.4f, overall %.4f", rtf_analysis, overall));
  return out;
}

Outcome Determinism() {
  Outcome out;
  FixtureParams vp = FixtureParams::Defaults(FixtureKind::kVowel);
  vp.duration = 0.15;
  const Fixture vowel = GenerateFixture(vp);
  FixtureParams cp = FixtureParams::Defaults(FixtureKind::kChirp);
  cp.duration = 0.25;
  const Fixture chirp = GenerateFixture(cp);

  auto pipeline = [&](int threads) {
    Hasher h;
    AnalysisOptions ao;
    ao.threads = threads;
    const HarmonicSet set = Analyze(vowel.buffer, ao);
    h.Harmonics(set);
    const ArmaCascade cascade = FitCascade(set, ArmaOrders{}, {}, {}, threads);
    h.Cascade(cascade);
    SynthesisOptions so;
    so.threads = threads;
    h.Signal(SynthesizeQhm(set, so));
    h.Signal(SynthesizeArma(cascade, set.Track(), so));
    h.Signal(Modify(cascade, set.Track(), ScaleSchedule::Constant(set.Track(), 1.3, 1.5), so));
    h.Matrix(MelCepstrum(vowel.buffer, set.grid, {}, threads));
    AnalysisOptions eo = ao;
    eo.adaptive = AdaptiveMode::kEaqhm;
    eo.adaptive_iterations = 2;
    h.Harmonics(Analyze(chirp.buffer, eo));
    return h.value();
  };
  const std::uint64_t first = pipeline(1);
  const std::uint64_t again = pipeline(1);
  const std::uint64_t wide = pipeline(4);
  char buf[128];
  std::snprintf(buf, sizeof buf, "hash %016llx", static_cast<unsigned long long>(first));
  out.Check(first == again, std::string(buf) + " across runs");
  out.Check(first == wide, "threads 1 vs 4");
  return out;
}

struct Criterion {
  int id;
  const char* name;
  Outcome (*run)();
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::strcmp(argv[i], "--only") == 0) only = std::atoi(argv[i + 1]);
  }
  const Criterion criteria[] = {
      {1, "frequency correction", CorrectionCriterion},
      {2, "QHM round trip", QhmRoundTrip},
      {3, "ARMA time/frequency consistency", TimeFrequencyConsistency},
      {4, "cascade phase-delay range", PhaseDelayRange},
      {5, "envelope fit self-consistency", FitSelfConsistency},
      {6, "end-to-end vowel", EndToEnd},
      {7, "modification laws", ModificationLaws},
      {8, "metric closed forms", MetricClosedForms},
      {9, "real-time factor", Performance},
      {10, "determinism", Determinism},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    if (only != 0 && c.id != only) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) ++failures;
    std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
