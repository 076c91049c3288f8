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

#ifndef QHARMA_SERIALIZATION_HPP_
#define QHARMA_SERIALIZATION_HPP_

#include <string>

#include "qharma/analysis.hpp"
#include "qharma/arma.hpp"
#include "qharma/pitch.hpp"

namespace qharma {

enum class SerialFormat { kJson, kBinary };

const char* SerialFormatName(SerialFormat format);
SerialFormat ParseSerialFormat(const std::string& name);  // "json" | "bin"
// ".bin" selects the binary container, anything else JSON.
SerialFormat FormatFromPath(const std::string& path);

inline constexpr int kHarmonicSetVersion = 1;
inline constexpr int kCascadeVersion = 1;

std::string HarmonicSetToJson(const HarmonicSet& set);
HarmonicSet HarmonicSetFromJson(const std::string& text);
std::string EncodeHarmonicSet(const HarmonicSet& set);
HarmonicSet DecodeHarmonicSet(const std::string& bytes);

std::string CascadeToJson(const ArmaCascade& cascade);
ArmaCascade CascadeFromJson(const std::string& text);
std::string EncodeCascade(const ArmaCascade& cascade);
ArmaCascade DecodeCascade(const std::string& bytes);

// Readers detect the container from its leading bytes.
void WriteHarmonicSet(const HarmonicSet& set, const std::string& path,
                      SerialFormat format);
HarmonicSet ReadHarmonicSet(const std::string& path);
void WriteCascade(const ArmaCascade& cascade, const std::string& path,
                  SerialFormat format);
ArmaCascade ReadCascade(const std::string& path);

// "time_seconds,f0_hz" with one row per frame.
std::string F0ToCsv(const F0Track& track);
void WriteF0Csv(const F0Track& track, const std::string& path);
// Rows must match the grid centres within half a frame shift.
F0Track ReadF0Csv(const std::string& path, const FrameGrid& grid);

std::string ReadTextFile(const std::string& path);
void WriteTextFile(const std::string& path, const std::string& text);

bool operator==(const FrameGrid& a, const FrameGrid& b);
bool operator==(const HarmonicSet& a, const HarmonicSet& b);
bool operator==(const ArmaCascade& a, const ArmaCascade& b);

}  // namespace qharma

#endif  // QHARMA_SERIALIZATION_HPP_
