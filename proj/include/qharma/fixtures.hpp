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

#ifndef QHARMA_FIXTURES_HPP_
#define QHARMA_FIXTURES_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "qharma/arma.hpp"
#include "qharma/signal.hpp"

namespace qharma {

enum class FixtureKind { kTone, kMultisine, kChirp, kAm, kVowel, kNoise };

const char* FixtureKindName(FixtureKind kind);
FixtureKind ParseFixtureKind(const std::string& name);

struct FixtureParams {
  FixtureKind kind = FixtureKind::kTone;
  int sample_rate = 24000;
  double duration = 1.0;
  // Tone frequency, or the fundamental of the harmonic kinds (chirp start).
  double f0 = 200.0;
  double f0_end = 300.0;   // chirp
  int num_harmonics = 10;  // multisine and chirp
  double amplitude = 0.5;
  double am_rate = 4.0;
  double am_depth = 0.5;
  double guard_hz = 50.0;  // vowel harmonics stay below Nyquist - guard
  std::uint64_t seed = 0;

  // Kind-specific defaults (the vowel uses f0 = 150 Hz).
  static FixtureParams Defaults(FixtureKind kind);
  void Validate() const;
};

struct FormantSpec {
  double freq_hz;
  double bandwidth_hz;
};

const std::vector<FormantSpec>& VowelFormants();

// All-pole formant resonator cascade, one section per formant.
ArmaFrame VowelEnvelope(int sample_rate, double gain = 1.0);

struct Fixture {
  SignalBuffer buffer;
  // Stationary components (initial frequencies for the chirp).
  std::vector<double> freqs;
  std::vector<double> amps;
  std::vector<double> phases;
  ArmaFrame envelope;  // vowel only
  std::string sidecar_json;
};

Fixture GenerateFixture(const FixtureParams& params);

}  // namespace qharma

#endif  // QHARMA_FIXTURES_HPP_
