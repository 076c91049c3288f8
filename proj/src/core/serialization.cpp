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

#include "qharma/serialization.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "qharma/error.hpp"

namespace qharma {
namespace {

using nlohmann::json;

constexpr char kHarmonicMagic[8] = {'Q', 'H', 'A', 'R', 'M', 'A', 'H', 'S'};
constexpr char kCascadeMagic[8] = {'Q', 'H', 'A', 'R', 'M', 'A', 'C', 'S'};
constexpr const char* kHarmonicTag = "qharma.harmonics";
constexpr const char* kCascadeTag = "qharma.cascade";

template <typename T>
T ToLittle(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

class ByteWriter {
 public:
  void Raw(const void* p, std::size_t n) {
    out_.append(static_cast<const char*>(p), n);
  }
  template <typename T>
  void Put(T v) {
    v = ToLittle(v);
    Raw(&v, sizeof(T));
  }
  void U32(std::uint32_t v) { Put(v); }
  void U64(std::uint64_t v) { Put(v); }
  void F64(double v) { Put(v); }
  void Doubles(const std::vector<double>& v) {
    U64(v.size());
    for (double x : v) F64(x);
  }
  void Bytes(const std::vector<std::uint8_t>& v) {
    U64(v.size());
    Raw(v.data(), v.size());
  }
  void Matrix(const FrameMatrix& m) {
    U64(m.frames());
    U64(m.components());
    for (double x : m.data()) F64(x);
  }
  std::string Take() { return std::move(out_); }

 private:
  std::string out_;
};

class ByteReader {
 public:
  explicit ByteReader(const std::string& in) : in_(in) {}
  void Raw(void* p, std::size_t n) {
    if (n > in_.size() - pos_) Fail(ErrorCode::kFormat, "truncated binary container");
    std::memcpy(p, in_.data() + pos_, n);
    pos_ += n;
  }
  template <typename T>
  T Get() {
    T v;
    Raw(&v, sizeof(T));
    return ToLittle(v);
  }
  std::uint32_t U32() { return Get<std::uint32_t>(); }
  std::uint64_t U64() { return Get<std::uint64_t>(); }
  double F64() { return Get<double>(); }
  std::size_t Count(std::size_t element_size) {
    const std::uint64_t n = U64();
    if (n > (in_.size() - pos_) / element_size) {
      Fail(ErrorCode::kFormat, "array length exceeds container size");
    }
    return static_cast<std::size_t>(n);
  }
  std::vector<double> Doubles() {
    std::vector<double> v(Count(8));
    for (double& x : v) x = F64();
    return v;
  }
  std::vector<std::uint8_t> Bytes() {
    std::vector<std::uint8_t> v(Count(1));
    Raw(v.data(), v.size());
    return v;
  }
  FrameMatrix Matrix() {
    const std::uint64_t frames = U64();
    const std::uint64_t comps = U64();
    if (comps != 0 && frames > (in_.size() - pos_) / 8 / comps) {
      Fail(ErrorCode::kFormat, "matrix size exceeds container size");
    }
    FrameMatrix m(static_cast<std::size_t>(frames), static_cast<std::size_t>(comps));
    for (double& x : m.data()) x = F64();
    return m;
  }
  void Magic(const char (&magic)[8], const char* what) {
    char got[8];
    Raw(got, 8);
    if (std::memcmp(got, magic, 8) != 0) {
      Fail(ErrorCode::kFormat, std::string("not a ") + what + " binary container");
    }
  }
  void ExpectEnd() const {
    if (pos_ != in_.size()) Fail(ErrorCode::kFormat, "trailing bytes in binary container");
  }

 private:
  const std::string& in_;
  std::size_t pos_ = 0;
};

void PutGrid(ByteWriter& w, const FrameGrid& g) {
  w.F64(g.frame_shift);
  w.F64(g.half_window);
  w.U32(static_cast<std::uint32_t>(g.window.kind));
  w.F64(g.window.gaussian_sigma);
  w.Doubles(g.centers);
}

FrameGrid GetGrid(ByteReader& r) {
  FrameGrid g;
  g.frame_shift = r.F64();
  g.half_window = r.F64();
  const std::uint32_t kind = r.U32();
  if (kind > static_cast<std::uint32_t>(WindowKind::kGaussian)) {
    Fail(ErrorCode::kFormat, "unknown window kind in container");
  }
  g.window.kind = static_cast<WindowKind>(kind);
  g.window.gaussian_sigma = r.F64();
  g.centers = r.Doubles();
  return g;
}

json GridJson(const FrameGrid& g) {
  return {{"frame_shift", g.frame_shift},
          {"half_window", g.half_window},
          {"window", WindowKindName(g.window.kind)},
          {"gaussian_sigma", g.window.gaussian_sigma},
          {"centers", g.centers}};
}

FrameGrid GridFromJson(const json& j) {
  FrameGrid g;
  g.frame_shift = j.at("frame_shift").get<double>();
  g.half_window = j.at("half_window").get<double>();
  g.window.kind = ParseWindowKind(j.at("window").get<std::string>());
  g.window.gaussian_sigma = j.at("gaussian_sigma").get<double>();
  g.centers = j.at("centers").get<std::vector<double>>();
  return g;
}

json MatrixJson(const FrameMatrix& m) {
  json rows = json::array();
  for (std::size_t l = 0; l < m.frames(); ++l) {
    const auto row = m.row(l);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

FrameMatrix MatrixFromJson(const json& j, std::size_t frames, std::size_t comps) {
  if (!j.is_array() || j.size() != frames) {
    Fail(ErrorCode::kFormat, "per-frame array has the wrong number of frames");
  }
  FrameMatrix m(frames, comps);
  for (std::size_t l = 0; l < frames; ++l) {
    const auto row = j[l].get<std::vector<double>>();
    if (row.size() != comps) Fail(ErrorCode::kFormat, "per-frame array has the wrong width");
    std::copy(row.begin(), row.end(), m.row(l).begin());
  }
  return m;
}

void CheckHeader(const json& j, const char* tag, int version) {
  if (!j.is_object() || j.value("format", std::string()) != tag) {
    Fail(ErrorCode::kFormat, std::string("missing format tag ") + tag);
  }
  if (j.at("version").get<int>() != version) {
    Fail(ErrorCode::kFormat, "unsupported format version");
  }
}

template <typename F>
auto ParseJson(const std::string& text, F&& body) {
  try {
    return body(json::parse(text));
  } catch (const json::exception& e) {
    Fail(ErrorCode::kFormat, std::string("malformed JSON: ") + e.what());
  }
}

bool StartsWith(const std::string& s, const char (&magic)[8]) {
  return s.size() >= 8 && std::memcmp(s.data(), magic, 8) == 0;
}

}  // namespace

const char* SerialFormatName(SerialFormat format) {
  return format == SerialFormat::kBinary ? "bin" : "json";
}

SerialFormat ParseSerialFormat(const std::string& name) {
  if (name == "json") return SerialFormat::kJson;
  if (name == "bin" || name == "binary") return SerialFormat::kBinary;
  Fail(ErrorCode::kInvalidArgument, "unknown serialization format: " + name);
}

SerialFormat FormatFromPath(const std::string& path) {
  return path.size() >= 4 && path.compare(path.size() - 4, 4, ".bin") == 0
             ? SerialFormat::kBinary
             : SerialFormat::kJson;
}

std::string HarmonicSetToJson(const HarmonicSet& set) {
  set.Validate();
  json j = {{"format", kHarmonicTag},
            {"version", kHarmonicSetVersion},
            {"sample_rate", set.sample_rate},
            {"num_components", set.num_components()},
            {"grid", GridJson(set.grid)},
            {"f0", set.f0},
            {"flags", set.flags},
            {"freqs", MatrixJson(set.freqs)},
            {"amps", MatrixJson(set.amps)},
            {"phases", MatrixJson(set.phases)},
            {"compensations", MatrixJson(set.compensations)}};
  return j.dump(1) + "\n";
}

HarmonicSet HarmonicSetFromJson(const std::string& text) {
  HarmonicSet set = ParseJson(text, [](const json& j) {
    CheckHeader(j, kHarmonicTag, kHarmonicSetVersion);
    HarmonicSet s;
    s.sample_rate = j.at("sample_rate").get<int>();
    s.grid = GridFromJson(j.at("grid"));
    const std::size_t frames = s.grid.size();
    const auto comps = j.at("num_components").get<std::size_t>();
    s.f0 = j.at("f0").get<std::vector<double>>();
    s.flags = j.at("flags").get<std::vector<std::uint8_t>>();
    s.freqs = MatrixFromJson(j.at("freqs"), frames, comps);
    s.amps = MatrixFromJson(j.at("amps"), frames, comps);
    s.phases = MatrixFromJson(j.at("phases"), frames, comps);
    s.compensations = MatrixFromJson(j.at("compensations"), frames, comps);
    return s;
  });
  try {
    set.Validate();
  } catch (const Error& e) {
    Fail(ErrorCode::kFormat, std::string("invalid harmonics document: ") + e.what());
  }
  return set;
}

std::string EncodeHarmonicSet(const HarmonicSet& set) {
  set.Validate();
  ByteWriter w;
  w.Raw(kHarmonicMagic, 8);
  w.U32(kHarmonicSetVersion);
  w.U32(static_cast<std::uint32_t>(set.sample_rate));
  PutGrid(w, set.grid);
  w.Doubles(set.f0);
  w.Bytes(set.flags);
  w.Matrix(set.freqs);
  w.Matrix(set.amps);
  w.Matrix(set.phases);
  w.Matrix(set.compensations);
  return w.Take();
}

HarmonicSet DecodeHarmonicSet(const std::string& bytes) {
  ByteReader r(bytes);
  r.Magic(kHarmonicMagic, "harmonics");
  if (r.U32() != kHarmonicSetVersion) Fail(ErrorCode::kFormat, "unsupported format version");
  HarmonicSet set;
  set.sample_rate = static_cast<int>(r.U32());
  set.grid = GetGrid(r);
  set.f0 = r.Doubles();
  set.flags = r.Bytes();
  set.freqs = r.Matrix();
  set.amps = r.Matrix();
  set.phases = r.Matrix();
  set.compensations = r.Matrix();
  r.ExpectEnd();
  try {
    set.Validate();
  } catch (const Error& e) {
    Fail(ErrorCode::kFormat, std::string("invalid harmonics container: ") + e.what());
  }
  return set;
}

std::string CascadeToJson(const ArmaCascade& cascade) {
  cascade.Validate();
  json frames = json::array();
  for (const ArmaFrame& f : cascade.frames) {
    json sections = json::array();
    for (const ArmaSection& s : f.sections) sections.push_back({{"ar", s.ar}, {"ma", s.ma}});
    frames.push_back({{"gain", f.gain}, {"sections", sections}});
  }
  json j = {{"format", kCascadeTag},
            {"version", kCascadeVersion},
            {"sample_rate", cascade.sample_rate},
            {"orders", {{"p", cascade.orders.p}, {"q", cascade.orders.q}, {"r", cascade.orders.r}}},
            {"grid", GridJson(cascade.grid)},
            {"flags", cascade.flags},
            {"losses", cascade.losses},
            {"frames", frames}};
  return j.dump(1) + "\n";
}

ArmaCascade CascadeFromJson(const std::string& text) {
  ArmaCascade cascade = ParseJson(text, [](const json& j) {
    CheckHeader(j, kCascadeTag, kCascadeVersion);
    ArmaCascade c;
    c.sample_rate = j.at("sample_rate").get<int>();
    const json& o = j.at("orders");
    c.orders = {o.at("p").get<int>(), o.at("q").get<int>(), o.at("r").get<int>()};
    c.grid = GridFromJson(j.at("grid"));
    c.flags = j.at("flags").get<std::vector<std::uint8_t>>();
    c.losses = j.at("losses").get<std::vector<double>>();
    for (const json& f : j.at("frames")) {
      ArmaFrame frame;
      frame.gain = f.at("gain").get<double>();
      for (const json& s : f.at("sections")) {
        frame.sections.push_back({s.at("ar").get<std::vector<double>>(),
                                  s.at("ma").get<std::vector<double>>()});
      }
      c.frames.push_back(std::move(frame));
    }
    return c;
  });
  try {
    cascade.Validate();
  } catch (const Error& e) {
    Fail(ErrorCode::kFormat, std::string("invalid cascade document: ") + e.what());
  }
  return cascade;
}

std::string EncodeCascade(const ArmaCascade& cascade) {
  cascade.Validate();
  ByteWriter w;
  w.Raw(kCascadeMagic, 8);
  w.U32(kCascadeVersion);
  w.U32(static_cast<std::uint32_t>(cascade.sample_rate));
  w.U32(static_cast<std::uint32_t>(cascade.orders.p));
  w.U32(static_cast<std::uint32_t>(cascade.orders.q));
  w.U32(static_cast<std::uint32_t>(cascade.orders.r));
  PutGrid(w, cascade.grid);
  w.Bytes(cascade.flags);
  w.Doubles(cascade.losses);
  w.U64(cascade.frames.size());
  for (const ArmaFrame& f : cascade.frames) {
    w.F64(f.gain);
    w.U64(f.sections.size());
    for (const ArmaSection& s : f.sections) {
      w.Doubles(s.ar);
      w.Doubles(s.ma);
    }
  }
  return w.Take();
}

ArmaCascade DecodeCascade(const std::string& bytes) {
  ByteReader r(bytes);
  r.Magic(kCascadeMagic, "cascade");
  if (r.U32() != kCascadeVersion) Fail(ErrorCode::kFormat, "unsupported format version");
  ArmaCascade c;
  c.sample_rate = static_cast<int>(r.U32());
  c.orders.p = static_cast<int>(r.U32());
  c.orders.q = static_cast<int>(r.U32());
  c.orders.r = static_cast<int>(r.U32());
  c.grid = GetGrid(r);
  c.flags = r.Bytes();
  c.losses = r.Doubles();
  c.frames.resize(r.Count(16));
  for (ArmaFrame& f : c.frames) {
    f.gain = r.F64();
    f.sections.resize(r.Count(16));
    for (ArmaSection& s : f.sections) {
      s.ar = r.Doubles();
      s.ma = r.Doubles();
    }
  }
  r.ExpectEnd();
  try {
    c.Validate();
  } catch (const Error& e) {
    Fail(ErrorCode::kFormat, std::string("invalid cascade container: ") + e.what());
  }
  return c;
}

std::string ReadTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) Fail(ErrorCode::kIo, "cannot read " + path);
  return ss.str();
}

void WriteTextFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorCode::kIo, "cannot create " + path);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path);
}

void WriteHarmonicSet(const HarmonicSet& set, const std::string& path,
                      SerialFormat format) {
  WriteTextFile(path, format == SerialFormat::kBinary ? EncodeHarmonicSet(set)
                                                      : HarmonicSetToJson(set));
}

HarmonicSet ReadHarmonicSet(const std::string& path) {
  const std::string bytes = ReadTextFile(path);
  return StartsWith(bytes, kHarmonicMagic) ? DecodeHarmonicSet(bytes)
                                           : HarmonicSetFromJson(bytes);
}

void WriteCascade(const ArmaCascade& cascade, const std::string& path,
                  SerialFormat format) {
  WriteTextFile(path, format == SerialFormat::kBinary ? EncodeCascade(cascade)
                                                      : CascadeToJson(cascade));
}

ArmaCascade ReadCascade(const std::string& path) {
  const std::string bytes = ReadTextFile(path);
  return StartsWith(bytes, kCascadeMagic) ? DecodeCascade(bytes) : CascadeFromJson(bytes);
}

std::string F0ToCsv(const F0Track& track) {
  track.Validate();
  std::ostringstream out;
  out << "time_seconds,f0_hz\n" << std::setprecision(17);
  for (std::size_t l = 0; l < track.size(); ++l) {
    out << track.grid.centers[l] << ',' << track.values[l] << '\n';
  }
  return out.str();
}

void WriteF0Csv(const F0Track& track, const std::string& path) {
  WriteTextFile(path, F0ToCsv(track));
}

F0Track ReadF0Csv(const std::string& path, const FrameGrid& grid) {
  std::istringstream in(ReadTextFile(path));
  std::string line;
  if (!std::getline(in, line) || line.rfind("time_seconds,f0_hz", 0) != 0) {
    Fail(ErrorCode::kFormat, path + ": missing header time_seconds,f0_hz");
  }
  F0Track track;
  track.grid = grid;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::istringstream fields(line);
    double t = 0.0, f = 0.0;
    char comma = 0;
    if (!(fields >> t >> comma >> f) || comma != ',' || !std::isfinite(t) ||
        !std::isfinite(f) || f < 0.0) {
      Fail(ErrorCode::kFormat, path + ": malformed row " + std::to_string(row + 1));
    }
    if (row >= grid.size() || std::abs(t - grid.centers[row]) > 0.5 * grid.frame_shift) {
      Fail(ErrorCode::kDimensionMismatch,
           path + ": row " + std::to_string(row + 1) + " does not match the frame grid");
    }
    track.values.push_back(f);
    ++row;
  }
  if (row != grid.size()) {
    Fail(ErrorCode::kDimensionMismatch, path + ": f0 file has " + std::to_string(row) +
                                            " rows, grid has " + std::to_string(grid.size()));
  }
  return track;
}

bool operator==(const FrameGrid& a, const FrameGrid& b) {
  return a.centers == b.centers && a.frame_shift == b.frame_shift &&
         a.half_window == b.half_window && a.window.kind == b.window.kind &&
         a.window.gaussian_sigma == b.window.gaussian_sigma;
}

bool operator==(const HarmonicSet& a, const HarmonicSet& b) {
  return a.grid == b.grid && a.sample_rate == b.sample_rate && a.freqs == b.freqs &&
         a.amps == b.amps && a.phases == b.phases &&
         a.compensations == b.compensations && a.f0 == b.f0 && a.flags == b.flags;
}

bool operator==(const ArmaCascade& a, const ArmaCascade& b) {
  return a.orders == b.orders && a.grid == b.grid && a.sample_rate == b.sample_rate &&
         a.frames == b.frames && a.flags == b.flags && a.losses == b.losses;
}

}  // namespace qharma
