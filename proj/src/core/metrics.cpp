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

#include "qharma/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <mutex>
#include <sstream>

#include <fftw3.h>

#include "json.hpp"

#include "qharma/error.hpp"
#include "qharma/parallel.hpp"
#include "qharma/qhm.hpp"

namespace qharma {
namespace {

// FFTW planning is not thread-safe; execution with new arrays is.
std::mutex& PlannerMutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffers {
  explicit FftwBuffers(std::size_t n)
      : in(static_cast<double*>(fftw_malloc(sizeof(double) * n))),
        out(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)))) {}
  ~FftwBuffers() {
    fftw_free(in);
    fftw_free(out);
  }
  FftwBuffers(const FftwBuffers&) = delete;
  FftwBuffers& operator=(const FftwBuffers&) = delete;
  double* in;
  fftw_complex* out;
};

std::size_t NextPow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void CheckSameLength(const F0Track& a, const F0Track& b) {
  if (a.size() != b.size()) {
    Fail(ErrorCode::kDimensionMismatch, "f0 tracks differ in frame count");
  }
}

nlohmann::json OptionalJson(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::string OptionalText(const std::optional<double>& v, int precision) {
  if (!v) return "n/a";
  std::ostringstream out;
  out << std::fixed << std::setprecision(precision) << *v;
  return out.str();
}

}  // namespace

double VuvRate(const F0Track& gen, const F0Track& ref) {
  CheckSameLength(gen, ref);
  if (gen.size() == 0) return 0.0;
  std::size_t diff = 0;
  for (std::size_t l = 0; l < gen.size(); ++l) diff += gen.voiced(l) != ref.voiced(l) ? 1 : 0;
  return 100.0 * static_cast<double>(diff) / static_cast<double>(gen.size());
}

std::optional<double> F0Rmse(const F0Track& gen, const F0Track& ref,
                             std::span<const double> rho) {
  CheckSameLength(gen, ref);
  if (!rho.empty() && rho.size() != gen.size()) {
    Fail(ErrorCode::kDimensionMismatch, "one pitch-scale factor per frame is required");
  }
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t l = 0; l < gen.size(); ++l) {
    if (!gen.voiced(l) || !ref.voiced(l)) continue;
    const double r = rho.empty() ? 1.0 : rho[l];
    const double d = std::log(gen.values[l]) - std::log(r * ref.values[l]);
    sum += d * d;
    ++count;
  }
  if (count == 0) return std::nullopt;
  return std::sqrt(sum / static_cast<double>(count));
}

double HtkMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double HtkMelInverse(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

FrameMatrix MelFilterbank(std::size_t num_filters, std::size_t fft_size,
                          int sample_rate) {
  Require(num_filters >= 1 && fft_size >= 2 && sample_rate > 0, "invalid filterbank size");
  const std::size_t bins = fft_size / 2 + 1;
  FrameMatrix bank(num_filters, bins, 0.0);
  const double top = HtkMel(0.5 * sample_rate);
  std::vector<double> edges(num_filters + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = HtkMelInverse(top * static_cast<double>(i) / static_cast<double>(num_filters + 1));
  }
  for (std::size_t m = 0; m < num_filters; ++m) {
    const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
    for (std::size_t b = 0; b < bins; ++b) {
      const double f = static_cast<double>(b) * sample_rate / static_cast<double>(fft_size);
      double w = 0.0;
      if (f > lo && f <= mid) {
        w = (f - lo) / (mid - lo);
      } else if (f > mid && f < hi) {
        w = (hi - f) / (hi - mid);
      }
      bank(m, b) = w;
    }
  }
  return bank;
}

FrameMatrix MelCepstrum(const SignalBuffer& buffer, const FrameGrid& grid,
                        const MelCepstrumOptions& options, int threads) {
  buffer.Validate();
  grid.Validate(buffer.sample_rate);
  Require(options.num_coeffs >= 1 && options.num_coeffs < options.num_filters,
          "cepstral order must be below the filter count");
  const std::size_t length = grid.WindowLength(buffer.sample_rate);
  const std::vector<double> window = MakeWindow(WindowKind::kHann, length);
  const std::size_t nfft = NextPow2(length);
  const std::size_t bins = nfft / 2 + 1;
  const std::size_t m_count = options.num_filters;
  const FrameMatrix bank = MelFilterbank(m_count, nfft, buffer.sample_rate);

  // DCT-II rows for d = 1..num_coeffs, orthonormal scaling.
  FrameMatrix dct(options.num_coeffs, m_count);
  const double scale = std::sqrt(2.0 / static_cast<double>(m_count));
  for (std::size_t d = 0; d < options.num_coeffs; ++d) {
    for (std::size_t m = 0; m < m_count; ++m) {
      dct(d, m) = scale * std::cos(kPi * static_cast<double>(d + 1) *
                                   (static_cast<double>(m) + 0.5) /
                                   static_cast<double>(m_count));
    }
  }

  fftw_plan plan;
  {
    FftwBuffers probe(nfft);
    std::lock_guard<std::mutex> lock(PlannerMutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(nfft), probe.in, probe.out, FFTW_ESTIMATE);
  }
  FrameMatrix out(grid.size(), options.num_coeffs, 0.0);
  const std::size_t workers = static_cast<std::size_t>(std::max(1, ResolveThreadCount(threads)));
  const std::size_t per = (grid.size() + workers - 1) / std::max<std::size_t>(workers, 1);
  try {
    ParallelFor(workers, threads, [&](std::size_t w) {
      FftwBuffers buf(nfft);
      std::vector<double> mag(bins), logmel(m_count);
      const std::size_t begin = w * per;
      const std::size_t end = std::min(grid.size(), begin + per);
      for (std::size_t l = begin; l < end; ++l) {
        const AnalysisFrame frame = ExtractFrame(buffer, grid.centers[l], window);
        std::fill(buf.in, buf.in + nfft, 0.0);
        for (std::size_t n = 0; n < length; ++n) buf.in[n] = frame.weights[n] * frame.samples[n];
        fftw_execute_dft_r2c(plan, buf.in, buf.out);
        for (std::size_t b = 0; b < bins; ++b) mag[b] = std::hypot(buf.out[b][0], buf.out[b][1]);
        for (std::size_t m = 0; m < m_count; ++m) {
          double e = 0.0;
          for (std::size_t b = 0; b < bins; ++b) e += bank(m, b) * mag[b];
          logmel[m] = std::log(std::max(e, options.log_floor));
        }
        for (std::size_t d = 0; d < options.num_coeffs; ++d) {
          double c = 0.0;
          for (std::size_t m = 0; m < m_count; ++m) c += dct(d, m) * logmel[m];
          out(l, d) = c;
        }
      }
    });
  } catch (...) {
    std::lock_guard<std::mutex> lock(PlannerMutex());
    fftw_destroy_plan(plan);
    throw;
  }
  {
    std::lock_guard<std::mutex> lock(PlannerMutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

std::vector<double> McdPerFrame(const FrameMatrix& gen, const FrameMatrix& ref) {
  if (gen.frames() != ref.frames() || gen.components() != ref.components()) {
    Fail(ErrorCode::kDimensionMismatch, "cepstral matrices differ in shape");
  }
  std::vector<double> out(gen.frames());
  for (std::size_t l = 0; l < gen.frames(); ++l) {
    double s = 0.0;
    for (std::size_t d = 0; d < gen.components(); ++d) {
      const double diff = gen(l, d) - ref(l, d);
      s += diff * diff;
    }
    out[l] = kMcdScale * std::sqrt(s);
  }
  return out;
}

double Mcd(const FrameMatrix& gen, const FrameMatrix& ref) {
  const std::vector<double> per = McdPerFrame(gen, ref);
  if (per.empty()) return 0.0;
  double s = 0.0;
  for (double v : per) s += v;
  return s / static_cast<double>(per.size());
}

double Snr(const SignalBuffer& gen, const SignalBuffer& ref) {
  if (gen.size() != ref.size()) {
    Fail(ErrorCode::kDimensionMismatch, "SNR needs equal-length signals");
  }
  double num = 0.0, den = 0.0;
  for (std::size_t n = 0; n < ref.size(); ++n) {
    const double r = ref.samples[n];
    const double e = r - gen.samples[n];
    num += r * r;
    den += e * e;
  }
  if (num == 0.0) Fail(ErrorCode::kInvalidArgument, "SNR reference is all zero");
  if (den == 0.0) return kSnrCap;
  return std::min(kSnrCap, 10.0 * std::log10(num / den));
}

double MeasureRtf(const std::function<void()>& work, double audio_seconds,
                  int runs, int warmup) {
  Require(audio_seconds > 0.0, "audio duration must be positive");
  Require(runs >= 1 && warmup >= 0, "invalid run counts");
  for (int i = 0; i < warmup; ++i) work();
  std::vector<double> times;
  for (int i = 0; i < runs; ++i) {
    const auto start = std::chrono::steady_clock::now();
    work();
    const auto stop = std::chrono::steady_clock::now();
    times.push_back(std::chrono::duration<double>(stop - start).count());
  }
  std::sort(times.begin(), times.end());
  const std::size_t mid = times.size() / 2;
  const double median = times.size() % 2 ? times[mid] : 0.5 * (times[mid - 1] + times[mid]);
  return median / audio_seconds;
}

MetricReport Evaluate(const SignalBuffer& gen, const SignalBuffer& ref,
                      const EvalOptions& options) {
  gen.Validate();
  ref.Validate();
  if (gen.sample_rate != ref.sample_rate) {
    Fail(ErrorCode::kDimensionMismatch, "signals have different sample rates");
  }
  Require(!gen.empty() && !ref.empty(), "cannot evaluate empty signals");
  const std::size_t n = std::min(gen.size(), ref.size());
  const FrameGrid grid = FrameGrid::Covering(n, ref.sample_rate, options.frame_shift,
                                             options.half_window, options.window);
  SignalBuffer g{std::vector<double>(gen.samples.begin(), gen.samples.begin() + static_cast<long>(n)),
                 gen.sample_rate};
  SignalBuffer r{std::vector<double>(ref.samples.begin(), ref.samples.begin() + static_cast<long>(n)),
                 ref.sample_rate};
  const F0Track fg = DetectF0(g, grid, options.pitch);
  const F0Track fr = DetectF0(r, grid, options.pitch);
  MetricReport report;
  report.vuv_rate = VuvRate(fg, fr);
  const std::vector<double> rho(grid.size(), options.rho);
  report.f0_rmse = F0Rmse(fg, fr, rho);
  report.mcd_frames = McdPerFrame(MelCepstrum(g, grid, options.mel, options.threads),
                                  MelCepstrum(r, grid, options.mel, options.threads));
  double s = 0.0;
  for (double v : report.mcd_frames) s += v;
  report.mcd = report.mcd_frames.empty() ? 0.0 : s / static_cast<double>(report.mcd_frames.size());
  if (gen.size() == ref.size()) report.snr = Snr(gen, ref);
  report.frame_times = grid.centers;
  report.f0_gen = fg.values;
  report.f0_ref = fr.values;
  return report;
}

std::string ReportJson(const MetricReport& report) {
  nlohmann::json j;
  if (report.has_quality) {
    j["vuv_rate_percent"] = report.vuv_rate;
    j["f0_rmse_log_hz"] = OptionalJson(report.f0_rmse);
    j["mcd_db"] = report.mcd;
    j["snr_db"] = OptionalJson(report.snr);
  }
  j["rtf_analysis"] = OptionalJson(report.rtf_analysis);
  j["rtf_fit"] = OptionalJson(report.rtf_fit);
  j["rtf_synthesis"] = OptionalJson(report.rtf_synthesis);
  j["rtf_overall"] = OptionalJson(report.rtf_overall);
  return j.dump(2);
}

std::string ReportTable(const MetricReport& report) {
  std::ostringstream out;
  auto row = [&](const std::string& name, const std::string& value, const std::string& unit) {
    out << std::left << std::setw(16) << name << std::right << std::setw(12) << value << "  "
        << unit << "\n";
  };
  if (report.has_quality) {
    row("V/UV rate", OptionalText(report.vuv_rate, 3), "%");
    row("f0 RMSE", OptionalText(report.f0_rmse, 5), "log-Hz");
    row("MCD", OptionalText(report.mcd, 4), "dB");
    row("SNR", OptionalText(report.snr, 3), "dB");
  }
  if (report.rtf_analysis) row("RTF analysis", OptionalText(report.rtf_analysis, 4), "");
  if (report.rtf_fit) row("RTF envelope fit", OptionalText(report.rtf_fit, 4), "");
  if (report.rtf_synthesis) row("RTF synthesis", OptionalText(report.rtf_synthesis, 4), "");
  if (report.rtf_overall) row("RTF overall", OptionalText(report.rtf_overall, 4), "");
  return out.str();
}

std::string ReportCsv(const MetricReport& report) {
  std::ostringstream out;
  out << "time_seconds,f0_gen_hz,f0_ref_hz,mcd_db\n";
  out << std::setprecision(17);
  for (std::size_t l = 0; l < report.frame_times.size(); ++l) {
    out << report.frame_times[l] << ',' << report.f0_gen[l] << ',' << report.f0_ref[l] << ','
        << report.mcd_frames[l] << '\n';
  }
  return out.str();
}

}  // namespace qharma
