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

#ifndef QHARMA_CONFIG_HPP_
#define QHARMA_CONFIG_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "qharma/analysis.hpp"
#include "qharma/arma.hpp"
#include "qharma/arma_fit.hpp"
#include "qharma/serialization.hpp"
#include "qharma/synthesis.hpp"
#include "qharma/wav.hpp"

namespace qharma {

// Everything a pipeline command needs. Populated from defaults, then a
// key = value file, then command-line overrides.
struct PipelineConfig {
  int sample_rate = 24000;  // generators only; analysis uses the file rate
  double frame_shift = 0.005;
  double window_length = 0.02;
  WindowSpec window;
  HarmonicRule rule;
  ArmaOrders orders;
  FitOptions fit;
  PitchOptions pitch;
  bool refine_f0 = true;
  AdaptiveMode adaptive = AdaptiveMode::kNone;
  int adaptive_iterations = 3;
  double adaptive_tolerance = 1e-4;
  int threads = 1;
  std::uint64_t seed = 0;
  SerialFormat format = SerialFormat::kJson;
  WavFormat wav_format = WavFormat::kFloat32;
  ClipPolicy clip = ClipPolicy::kClip;

  AnalysisOptions Analysis() const;
  SynthesisOptions Synthesis() const;
  void Validate() const;
};

// Sets one key; unknown keys and unparsable values are rejected.
void SetConfigValue(PipelineConfig& config, const std::string& key,
                    const std::string& value);
std::string GetConfigValue(const PipelineConfig& config, const std::string& key);
const std::vector<std::string>& ConfigKeys();

// Lines of "key = value"; blank lines and '#' comments are skipped.
void ApplyConfigText(PipelineConfig& config, const std::string& text);
void ApplyConfigFile(PipelineConfig& config, const std::string& path);
std::string ConfigToText(const PipelineConfig& config);

}  // namespace qharma

#endif  // QHARMA_CONFIG_HPP_
