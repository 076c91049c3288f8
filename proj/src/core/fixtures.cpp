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

#include "qharma/fixtures.hpp"

#include <cmath>
#include <random>

#include "json.hpp"
#include "qharma/error.hpp"

namespace qharma {
namespace {

using nlohmann::json;

double Clock(std::size_t n, int fs) { return static_cast<double>(n) / fs; }

std::size_t NumSamples(const FixtureParams& p) {
  return static_cast<std::size_t>(std::llround(p.duration * p.sample_rate));
}

void AddHarmonics(Fixture& fx, const FixtureParams& p) {
  auto& x = fx.buffer.samples;
  for (std::size_t k = 0; k < fx.freqs.size(); ++k) {
    const double w = kTwoPi * fx.freqs[k];
    for (std::size_t n = 0; n < x.size(); ++n) {
      x[n] += fx.amps[k] * std::cos(w * Clock(n, p.sample_rate) + fx.phases[k]);
    }
  }
}

json EnvelopeJson(const ArmaFrame& frame) {
  json sections = json::array();
  for (const ArmaSection& s : frame.sections) sections.push_back({{"ar", s.ar}, {"ma", s.ma}});
  return {{"gain", frame.gain}, {"sections", sections}};
}

}  // namespace

const char* FixtureKindName(FixtureKind kind) {
  switch (kind) {
    case FixtureKind::kTone: return "tone";
    case FixtureKind::kMultisine: return "multisine";
    case FixtureKind::kChirp: return "chirp";
    case FixtureKind::kAm: return "am";
    case FixtureKind::kVowel: return "vowel";
    case FixtureKind::kNoise: return "noise";
  }
  return "unknown";
}

FixtureKind ParseFixtureKind(const std::string& name) {
  for (FixtureKind k : {FixtureKind::kTone, FixtureKind::kMultisine, FixtureKind::kChirp,
                        FixtureKind::kAm, FixtureKind::kVowel, FixtureKind::kNoise}) {
    if (name == FixtureKindName(k)) return k;
  }
  Fail(ErrorCode::kInvalidArgument, "unknown fixture kind: " + name);
}

FixtureParams FixtureParams::Defaults(FixtureKind kind) {
  FixtureParams p;
  p.kind = kind;
  if (kind == FixtureKind::kVowel) p.f0 = 150.0;
  if (kind == FixtureKind::kNoise) p.amplitude = 0.1;
  return p;
}

void FixtureParams::Validate() const {
  Require(sample_rate > 0, "fixture sample rate must be positive");
  Require(duration > 0.0 && std::isfinite(duration), "fixture duration must be positive");
  Require(amplitude >= 0.0 && std::isfinite(amplitude), "fixture amplitude must be non-negative");
  if (kind == FixtureKind::kNoise) return;
  const double nyq = 0.5 * sample_rate;
  Require(f0 > 0.0 && f0 < nyq, "fixture f0 must lie in (0, Nyquist)");
  if (kind == FixtureKind::kMultisine || kind == FixtureKind::kChirp) {
    Require(num_harmonics >= 1, "fixture needs at least one harmonic");
    Require(num_harmonics * f0 < nyq, "highest harmonic must lie below Nyquist");
  }
  if (kind == FixtureKind::kChirp) {
    Require(f0_end > 0.0 && num_harmonics * f0_end < nyq,
            "chirp end harmonics must lie below Nyquist");
  }
  if (kind == FixtureKind::kAm) {
    Require(am_rate >= 0.0 && am_depth >= 0.0 && am_depth <= 1.0,
            "am depth must lie in [0, 1] and rate be non-negative");
  }
  if (kind == FixtureKind::kVowel) {
    Require(guard_hz >= 0.0 && f0 < nyq - guard_hz, "vowel f0 leaves no harmonics");
  }
}

const std::vector<FormantSpec>& VowelFormants() {
  static const std::vector<FormantSpec> formants = {
      {730.0, 90.0}, {1090.0, 110.0}, {2440.0, 160.0}, {3400.0, 250.0}, {4500.0, 300.0}};
  return formants;
}

ArmaFrame VowelEnvelope(int sample_rate, double gain) {
  Require(sample_rate > 0, "sample rate must be positive");
  ArmaFrame frame;
  frame.gain = gain;
  for (const FormantSpec& f : VowelFormants()) {
    if (f.freq_hz >= 0.5 * sample_rate) continue;
    const double radius = std::exp(-kPi * f.bandwidth_hz / sample_rate);
    const double theta = kTwoPi * f.freq_hz / sample_rate;
    frame.sections.push_back({{-2.0 * radius * std::cos(theta), radius * radius}, {}});
  }
  return frame;
}

Fixture GenerateFixture(const FixtureParams& p) {
  p.Validate();
  Fixture fx;
  fx.buffer.sample_rate = p.sample_rate;
  fx.buffer.samples.assign(NumSamples(p), 0.0);
  auto& x = fx.buffer.samples;
  json side = {{"kind", FixtureKindName(p.kind)},
               {"sample_rate", p.sample_rate},
               {"duration", p.duration},
               {"num_samples", x.size()},
               {"seed", p.seed}};
  std::mt19937_64 rng(p.seed);
  switch (p.kind) {
    case FixtureKind::kTone:
      fx.freqs = {p.f0};
      fx.amps = {p.amplitude};
      fx.phases = {0.0};
      AddHarmonics(fx, p);
      break;
    case FixtureKind::kMultisine: {
      std::uniform_real_distribution<double> phase(-kPi, kPi);
      for (int k = 1; k <= p.num_harmonics; ++k) {
        fx.freqs.push_back(k * p.f0);
        fx.amps.push_back(p.amplitude / k);
        fx.phases.push_back(phase(rng));
      }
      AddHarmonics(fx, p);
      break;
    }
    case FixtureKind::kChirp: {
      const double slope = (p.f0_end - p.f0) / p.duration;
      for (int k = 1; k <= p.num_harmonics; ++k) {
        fx.freqs.push_back(k * p.f0);
        fx.amps.push_back(p.amplitude / k);
        fx.phases.push_back(0.0);
        for (std::size_t n = 0; n < x.size(); ++n) {
          const double t = Clock(n, p.sample_rate);
          x[n] += p.amplitude / k * std::cos(kTwoPi * k * (p.f0 * t + 0.5 * slope * t * t));
        }
      }
      side["f0_end"] = p.f0_end;
      side["f0_law"] = "f0(t) = f0 + (f0_end - f0) * t / duration";
      break;
    }
    case FixtureKind::kAm:
      fx.freqs = {p.f0};
      fx.amps = {p.amplitude};
      fx.phases = {0.0};
      for (std::size_t n = 0; n < x.size(); ++n) {
        const double t = Clock(n, p.sample_rate);
        x[n] = p.amplitude * (1.0 + p.am_depth * std::sin(kTwoPi * p.am_rate * t)) *
               std::cos(kTwoPi * p.f0 * t);
      }
      side["am_rate"] = p.am_rate;
      side["am_depth"] = p.am_depth;
      side["amplitude_law"] = "A * (1 + depth * sin(2 pi rate t))";
      break;
    case FixtureKind::kVowel: {
      const ArmaFrame unit = VowelEnvelope(p.sample_rate);
      const double limit = 0.5 * p.sample_rate - p.guard_hz;
      std::vector<double> freqs;
      for (int k = 1; k * p.f0 <= limit; ++k) freqs.push_back(k * p.f0);
      const EnvelopeSample s = SampleHarmonics(unit, freqs, p.sample_rate);
      double sum = 0.0;
      for (double m : s.magnitude) sum += m;
      // Cosine amplitudes are gain * |H|, so the peak stays below 2 * amplitude.
      const double gain = sum > 0.0 ? 2.0 * p.amplitude / sum : 1.0;
      // Components are 2 |H| cos(...), hence half the cosine gain.
      fx.envelope = VowelEnvelope(p.sample_rate, 0.5 * gain);
      fx.freqs = freqs;
      for (std::size_t k = 0; k < freqs.size(); ++k) {
        fx.amps.push_back(gain * s.magnitude[k]);
        fx.phases.push_back(WrapPhase(s.delay[k]));
      }
      AddHarmonics(fx, p);
      double peak = 0.0;
      for (double v : x) peak = std::max(peak, std::abs(v));
      json formants = json::array();
      for (const FormantSpec& f : VowelFormants()) {
        formants.push_back({{"freq_hz", f.freq_hz}, {"bandwidth_hz", f.bandwidth_hz}});
      }
      side["formants"] = formants;
      side["envelope"] = EnvelopeJson(fx.envelope);
      side["signal_law"] = "sum_k 2 |H(k f0)| cos(2 pi k f0 t + arg H(k f0))";
      side["guard_hz"] = p.guard_hz;
      side["peak"] = peak;
      break;
    }
    case FixtureKind::kNoise: {
      std::normal_distribution<double> normal(0.0, 1.0);
      for (double& v : x) v = p.amplitude * normal(rng);
      side["distribution"] = "gaussian";
      side["stddev"] = p.amplitude;
      break;
    }
  }
  if (p.kind != FixtureKind::kNoise) {
    side["f0"] = p.f0;
    side["frequencies"] = fx.freqs;
    side["amplitudes"] = fx.amps;
    side["phases"] = fx.phases;
  }
  fx.sidecar_json = side.dump(1) + "\n";
  return fx;
}

}  // namespace qharma
