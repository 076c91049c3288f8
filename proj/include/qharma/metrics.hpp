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

#ifndef QHARMA_METRICS_HPP_
#define QHARMA_METRICS_HPP_

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qharma/pitch.hpp"
#include "qharma/signal.hpp"

namespace qharma {

// Percentage of frames whose voicing decision differs.
double VuvRate(const F0Track& gen, const F0Track& ref);

// sqrt(mean over frames voiced in both of (ln f0_gen - ln(rho f0_ref))^2).
// Empty `rho` means 1 everywhere; no common voiced frame gives nullopt.
std::optional<double> F0Rmse(const F0Track& gen, const F0Track& ref,
                             std::span<const double> rho = {});

struct MelCepstrumOptions {
  std::size_t num_coeffs = 24;
  std::size_t num_filters = 40;
  double log_floor = 1e-10;
};

// Per frame: Hann-windowed magnitude spectrum (FFT size the next power of
// two), HTK mel filterbank from 0 Hz to Nyquist, natural log, orthonormal
// DCT-II. Returns coefficients 1..num_coeffs (frames x num_coeffs).
FrameMatrix MelCepstrum(const SignalBuffer& buffer, const FrameGrid& grid,
                        const MelCepstrumOptions& options = {},
                        int threads = 1);

// Triangular filter weights (num_filters x (fft_size / 2 + 1)).
FrameMatrix MelFilterbank(std::size_t num_filters, std::size_t fft_size,
                          int sample_rate);

double HtkMel(double hz);
double HtkMelInverse(double mel);

constexpr double kMcdScale = 6.1418514637137543;  // 10 sqrt(2) / ln 10

std::vector<double> McdPerFrame(const FrameMatrix& gen, const FrameMatrix& ref);
double Mcd(const FrameMatrix& gen, const FrameMatrix& ref);

constexpr double kSnrCap = 120.0;

// 10 log10(sum ref^2 / sum (ref - gen)^2), capped at kSnrCap.
double Snr(const SignalBuffer& gen, const SignalBuffer& ref);

// Median wall-clock time of `runs` calls after `warmup` calls, divided by
// the audio duration.
double MeasureRtf(const std::function<void()>& work, double audio_seconds,
                  int runs = 5, int warmup = 1);

struct MetricReport {
  bool has_quality = true;  // false for timing-only reports
  double vuv_rate = 0.0;
  std::optional<double> f0_rmse;
  double mcd = 0.0;
  std::optional<double> snr;
  std::optional<double> rtf_analysis;
  std::optional<double> rtf_fit;
  std::optional<double> rtf_synthesis;
  std::optional<double> rtf_overall;
  // Per-frame trajectories for the CSV dump.
  std::vector<double> frame_times;
  std::vector<double> f0_gen;
  std::vector<double> f0_ref;
  std::vector<double> mcd_frames;
};

struct EvalOptions {
  double frame_shift = 0.005;
  double half_window = 0.01;
  WindowSpec window;
  PitchOptions pitch;
  double rho = 1.0;
  MelCepstrumOptions mel;
  int threads = 1;
};

// Both signals are framed on one grid covering the shorter of the two; SNR
// is reported only for equal lengths.
MetricReport Evaluate(const SignalBuffer& gen, const SignalBuffer& ref,
                      const EvalOptions& options = {});

std::string ReportJson(const MetricReport& report);
std::string ReportTable(const MetricReport& report);
std::string ReportCsv(const MetricReport& report);

}  // namespace qharma

#endif  // QHARMA_METRICS_HPP_
