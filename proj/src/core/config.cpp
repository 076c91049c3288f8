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

#include "qharma/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <sstream>

#include "qharma/error.hpp"

namespace qharma {
namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double ToDouble(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out)) {
    Fail(ErrorCode::kInvalidArgument, key + ": not a number: " + v);
  }
  return out;
}

template <typename T>
T ToInt(const std::string& key, const std::string& v) {
  T out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    Fail(ErrorCode::kInvalidArgument, key + ": not an integer: " + v);
  }
  return out;
}

bool ToBool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  Fail(ErrorCode::kInvalidArgument, key + ": not a boolean: " + v);
}

std::string Num(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

struct Entry {
  std::string key;
  std::function<void(PipelineConfig&, const std::string&)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

#define QH_DOUBLE(name, field)                                                   \
  Entry {                                                                        \
    name, [](PipelineConfig& c, const std::string& v) { c.field = ToDouble(name, v); }, \
        [](const PipelineConfig& c) { return Num(c.field); }                     \
  }
#define QH_INT(name, field, type)                                                \
  Entry {                                                                        \
    name, [](PipelineConfig& c, const std::string& v) { c.field = ToInt<type>(name, v); }, \
        [](const PipelineConfig& c) { return std::to_string(c.field); }          \
  }

const std::vector<Entry>& Entries() {
  static const std::vector<Entry> entries = {
      QH_INT("sample_rate", sample_rate, int),
      QH_DOUBLE("frame_shift", frame_shift),
      QH_DOUBLE("window_length", window_length),
      {"window",
       [](PipelineConfig& c, const std::string& v) { c.window.kind = ParseWindowKind(v); },
       [](const PipelineConfig& c) { return std::string(WindowKindName(c.window.kind)); }},
      QH_DOUBLE("gaussian_sigma", window.gaussian_sigma),
      QH_DOUBLE("k_guard", rule.guard_hz),
      QH_DOUBLE("unvoiced_f0", rule.unvoiced_f0),
      {"orders", [](PipelineConfig& c, const std::string& v) { c.orders = ParseOrders(v); },
       [](const PipelineConfig& c) {
         return std::to_string(c.orders.p) + "," + std::to_string(c.orders.q) + "," +
                std::to_string(c.orders.r);
       }},
      {"fit_method",
       [](PipelineConfig& c, const std::string& v) { c.fit.method = ParseFitMethod(v); },
       [](const PipelineConfig& c) { return std::string(FitMethodName(c.fit.method)); }},
      QH_DOUBLE("fit_epsilon", fit.epsilon),
      QH_DOUBLE("phase_weight", fit.phase_weight),
      QH_INT("fit_max_steps", fit.max_steps, int),
      QH_DOUBLE("fit_tolerance", fit.tolerance),
      QH_DOUBLE("f0_min", pitch.f0_min),
      QH_DOUBLE("f0_max", pitch.f0_max),
      {"f0_range",
       [](PipelineConfig& c, const std::string& v) {
         const auto comma = v.find(',');
         if (comma == std::string::npos) {
           Fail(ErrorCode::kInvalidArgument, "f0_range: expected MIN,MAX");
         }
         c.pitch.f0_min = ToDouble("f0_range", Trim(v.substr(0, comma)));
         c.pitch.f0_max = ToDouble("f0_range", Trim(v.substr(comma + 1)));
       },
       [](const PipelineConfig& c) { return Num(c.pitch.f0_min) + "," + Num(c.pitch.f0_max); }},
      QH_DOUBLE("voicing_threshold", pitch.voicing_threshold),
      {"refine_f0",
       [](PipelineConfig& c, const std::string& v) { c.refine_f0 = ToBool("refine_f0", v); },
       [](const PipelineConfig& c) { return std::string(c.refine_f0 ? "true" : "false"); }},
      {"adaptive",
       [](PipelineConfig& c, const std::string& v) { c.adaptive = ParseAdaptiveMode(v); },
       [](const PipelineConfig& c) { return std::string(AdaptiveModeName(c.adaptive)); }},
      QH_INT("adaptive_iterations", adaptive_iterations, int),
      QH_DOUBLE("adaptive_tolerance", adaptive_tolerance),
      QH_INT("threads", threads, int),
      QH_INT("seed", seed, std::uint64_t),
      {"format",
       [](PipelineConfig& c, const std::string& v) { c.format = ParseSerialFormat(v); },
       [](const PipelineConfig& c) { return std::string(SerialFormatName(c.format)); }},
      {"wav_format",
       [](PipelineConfig& c, const std::string& v) {
         if (v == "float32") {
           c.wav_format = WavFormat::kFloat32;
         } else if (v == "pcm16") {
           c.wav_format = WavFormat::kPcm16;
         } else {
           Fail(ErrorCode::kInvalidArgument, "wav_format: expected float32 or pcm16");
         }
       },
       [](const PipelineConfig& c) {
         return std::string(c.wav_format == WavFormat::kPcm16 ? "pcm16" : "float32");
       }},
      {"clip",
       [](PipelineConfig& c, const std::string& v) {
         if (v == "clip") {
           c.clip = ClipPolicy::kClip;
         } else if (v == "error") {
           c.clip = ClipPolicy::kError;
         } else {
           Fail(ErrorCode::kInvalidArgument, "clip: expected clip or error");
         }
       },
       [](const PipelineConfig& c) {
         return std::string(c.clip == ClipPolicy::kError ? "error" : "clip");
       }},
  };
  return entries;
}

#undef QH_DOUBLE
#undef QH_INT

const Entry& Find(const std::string& key) {
  for (const Entry& e : Entries()) {
    if (e.key == key) return e;
  }
  Fail(ErrorCode::kInvalidArgument, "unknown config key: " + key);
}

}  // namespace

AnalysisOptions PipelineConfig::Analysis() const {
  AnalysisOptions o;
  o.frame_shift = frame_shift;
  o.half_window = 0.5 * window_length;
  o.window = window;
  o.rule = rule;
  o.pitch = pitch;
  o.refine_f0 = refine_f0;
  o.adaptive = adaptive;
  o.adaptive_iterations = adaptive_iterations;
  o.adaptive_tolerance = adaptive_tolerance;
  o.threads = threads;
  return o;
}

SynthesisOptions PipelineConfig::Synthesis() const { return {rule, threads}; }

void PipelineConfig::Validate() const {
  Require(sample_rate > 0, "sample_rate must be positive");
  Require(frame_shift > 0.0, "frame_shift must be positive");
  Require(window_length > 0.0, "window_length must be positive");
  Require(window.gaussian_sigma > 0.0, "gaussian_sigma must be positive");
  Require(rule.guard_hz >= 0.0, "k_guard must be non-negative");
  Require(rule.unvoiced_f0 > 0.0, "unvoiced_f0 must be positive");
  orders.Validate();
  Require(fit.epsilon > 0.0, "fit_epsilon must be positive");
  Require(fit.phase_weight >= 0.0, "phase_weight must be non-negative");
  Require(fit.max_steps >= 0, "fit_max_steps must be non-negative");
  Require(fit.tolerance >= 0.0, "fit_tolerance must be non-negative");
  Require(pitch.f0_min > 0.0 && pitch.f0_max > pitch.f0_min,
          "f0 range must satisfy 0 < min < max");
  Require(pitch.voicing_threshold >= 0.0 && pitch.voicing_threshold <= 1.0,
          "voicing_threshold must lie in [0, 1]");
  Require(adaptive_iterations >= 0, "adaptive_iterations must be non-negative");
  Require(adaptive_tolerance >= 0.0, "adaptive_tolerance must be non-negative");
  Require(threads >= 0, "threads must be non-negative");
}

void SetConfigValue(PipelineConfig& config, const std::string& key,
                    const std::string& value) {
  Find(Trim(key)).set(config, Trim(value));
}

std::string GetConfigValue(const PipelineConfig& config, const std::string& key) {
  return Find(key).get(config);
}

const std::vector<std::string>& ConfigKeys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const Entry& e : Entries()) k.push_back(e.key);
    return k;
  }();
  return keys;
}

void ApplyConfigText(PipelineConfig& config, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      Fail(ErrorCode::kFormat, "config line " + std::to_string(number) + ": expected key = value");
    }
    try {
      SetConfigValue(config, line.substr(0, eq), line.substr(eq + 1));
    } catch (const Error& e) {
      Fail(ErrorCode::kFormat, "config line " + std::to_string(number) + ": " + e.what());
    }
  }
}

void ApplyConfigFile(PipelineConfig& config, const std::string& path) {
  ApplyConfigText(config, ReadTextFile(path));
}

std::string ConfigToText(const PipelineConfig& config) {
  std::string out;
  for (const Entry& e : Entries()) out += e.key + " = " + e.get(config) + "\n";
  return out;
}

}  // namespace qharma
