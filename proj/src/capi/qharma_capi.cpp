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

#include "qharma/qharma.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "qharma/analysis.hpp"
#include "qharma/arma_fit.hpp"
#include "qharma/config.hpp"
#include "qharma/error.hpp"
#include "qharma/fixtures.hpp"
#include "qharma/metrics.hpp"
#include "qharma/modification.hpp"
#include "qharma/pitch.hpp"
#include "qharma/serialization.hpp"
#include "qharma/synthesis.hpp"
#include "qharma/wav.hpp"

struct qh_config {
  qharma::PipelineConfig value;
};
struct qh_signal {
  qharma::SignalBuffer value;
};
struct qh_harmonics {
  qharma::HarmonicSet value;
  std::vector<double> snr_history;
};
struct qh_cascade {
  qharma::ArmaCascade value;
};
struct qh_track {
  qharma::F0Track value;
};
struct qh_report {
  qharma::MetricReport value;
};

namespace {

thread_local std::string g_last_error;

qh_status Map(qharma::ErrorCode code) {
  switch (code) {
    case qharma::ErrorCode::kInvalidArgument: return QH_ERR_INVALID_ARGUMENT;
    case qharma::ErrorCode::kIo: return QH_ERR_IO;
    case qharma::ErrorCode::kFormat: return QH_ERR_FORMAT;
    case qharma::ErrorCode::kNumerical: return QH_ERR_NUMERICAL;
    case qharma::ErrorCode::kDimensionMismatch: return QH_ERR_DIMENSION;
  }
  return QH_ERR_INTERNAL;
}

template <typename F>
qh_status Guard(F&& body) {
  try {
    body();
    g_last_error.clear();
    return QH_OK;
  } catch (const qharma::Error& e) {
    g_last_error = e.what();
    return Map(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return QH_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return QH_ERR_INTERNAL;
  }
}

void NotNull(const void* p, const char* what) {
  if (p == nullptr) qharma::Fail(qharma::ErrorCode::kInvalidArgument, std::string(what) + " is NULL");
}

char* Dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename T, typename V>
void Emit(T** out, V&& value) {
  *out = new T{std::forward<V>(value)};
}

qharma::FrameGrid GridFor(const qharma::PipelineConfig& c, const qharma::SignalBuffer& b) {
  return qharma::FrameGrid::Covering(b.size(), b.sample_rate, c.frame_shift,
                                     0.5 * c.window_length, c.window);
}

qharma::SerialFormat FormatOr(const char* format, const std::string& path) {
  return format ? qharma::ParseSerialFormat(format) : qharma::FormatFromPath(path);
}

}  // namespace

extern "C" {

const char* qh_version(void) { return "1.0.0"; }

const char* qh_last_error(void) { return g_last_error.c_str(); }

const char* qh_status_name(qh_status status) {
  switch (status) {
    case QH_OK: return "ok";
    case QH_ERR_INVALID_ARGUMENT: return "invalid argument";
    case QH_ERR_IO: return "i/o error";
    case QH_ERR_FORMAT: return "format error";
    case QH_ERR_NUMERICAL: return "numerical error";
    case QH_ERR_DIMENSION: return "dimension mismatch";
    case QH_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void qh_string_free(char* text) { std::free(text); }

qh_status qh_config_new(qh_config** out) {
  return Guard([&] {
    NotNull(out, "out");
    *out = new qh_config{};
  });
}

void qh_config_free(qh_config* config) { delete config; }

qh_status qh_config_load(qh_config* config, const char* path) {
  return Guard([&] {
    NotNull(config, "config");
    NotNull(path, "path");
    qharma::ApplyConfigFile(config->value, path);
  });
}

qh_status qh_config_set(qh_config* config, const char* key, const char* value) {
  return Guard([&] {
    NotNull(config, "config");
    NotNull(key, "key");
    NotNull(value, "value");
    qharma::SetConfigValue(config->value, key, value);
  });
}

qh_status qh_config_get(const qh_config* config, const char* key, char** value) {
  return Guard([&] {
    NotNull(config, "config");
    NotNull(key, "key");
    NotNull(value, "value");
    *value = Dup(qharma::GetConfigValue(config->value, key));
  });
}

qh_status qh_config_dump(const qh_config* config, char** text) {
  return Guard([&] {
    NotNull(config, "config");
    NotNull(text, "text");
    *text = Dup(qharma::ConfigToText(config->value));
  });
}

qh_status qh_config_validate(const qh_config* config) {
  return Guard([&] {
    NotNull(config, "config");
    config->value.Validate();
  });
}

qh_status qh_signal_new(const double* samples, size_t count, int sample_rate,
                        qh_signal** out) {
  return Guard([&] {
    NotNull(out, "out");
    if (count > 0) NotNull(samples, "samples");
    qharma::SignalBuffer b;
    b.sample_rate = sample_rate;
    if (count > 0) b.samples.assign(samples, samples + count);
    b.Validate();
    Emit(out, std::move(b));
  });
}

void qh_signal_free(qh_signal* signal) { delete signal; }

qh_status qh_signal_read_wav(const char* path, qh_signal** out) {
  return Guard([&] {
    NotNull(path, "path");
    NotNull(out, "out");
    Emit(out, qharma::ReadWav(path));
  });
}

qh_status qh_signal_write_wav(const qh_signal* signal, const qh_config* config,
                              const char* path, size_t* clipped) {
  return Guard([&] {
    NotNull(signal, "signal");
    NotNull(config, "config");
    NotNull(path, "path");
    const auto report = qharma::WriteWav(signal->value, path,
                                         {config->value.wav_format, config->value.clip});
    if (clipped) *clipped = report.clipped_samples;
  });
}

size_t qh_signal_length(const qh_signal* signal) { return signal ? signal->value.size() : 0; }

int qh_signal_sample_rate(const qh_signal* signal) {
  return signal ? signal->value.sample_rate : 0;
}

const double* qh_signal_samples(const qh_signal* signal) {
  return signal ? signal->value.samples.data() : nullptr;
}

double qh_signal_duration(const qh_signal* signal) {
  return signal && signal->value.sample_rate > 0 ? signal->value.duration() : 0.0;
}

qh_status qh_generate_fixture(const qh_config* config, const char* kind,
                              const qh_fixture_params* params, qh_signal** out,
                              char** sidecar_json) {
  return Guard([&] {
    NotNull(config, "config");
    NotNull(kind, "kind");
    NotNull(out, "out");
    auto p = qharma::FixtureParams::Defaults(qharma::ParseFixtureKind(kind));
    p.sample_rate = config->value.sample_rate;
    p.seed = config->value.seed;
    p.guard_hz = config->value.rule.guard_hz;
    if (params) {
      if (params->duration != 0.0) p.duration = params->duration;
      if (params->f0 != 0.0) p.f0 = params->f0;
      if (params->f0_end != 0.0) p.f0_end = params->f0_end;
      if (params->num_harmonics != 0) p.num_harmonics = params->num_harmonics;
      if (params->amplitude != 0.0) p.amplitude = params->amplitude;
    }
    qharma::Fixture fx = qharma::GenerateFixture(p);
    char* side = sidecar_json ? Dup(fx.sidecar_json) : nullptr;
    Emit(out, std::move(fx.buffer));
    if (sidecar_json) *sidecar_json = side;
  });
}

void qh_track_free(qh_track* track) { delete track; }

qh_status qh_detect_f0(const qh_config* config, const qh_signal* signal, qh_track** out) {
  return Guard([&] {
    NotNull(config, "config");
    NotNull(signal, "signal");
    NotNull(out, "out");
    Emit(out, qharma::DetectF0(signal->value, GridFor(config->value, signal->value),
                               config->value.pitch));
  });
}

qh_status qh_track_from_harmonics(const qh_harmonics* harmonics, qh_track** out) {
  return Guard([&] {
    NotNull(harmonics, "harmonics");
    NotNull(out, "out");
    Emit(out, harmonics->value.Track());
  });
}

qh_status qh_track_read_csv(const char* path, const qh_cascade* grid_source,
                            qh_track** out) {
  return Guard([&] {
    NotNull(path, "path");
    NotNull(grid_source, "grid_source");
    NotNull(out, "out");
    Emit(out, qharma::ReadF0Csv(path, grid_source->value.grid));
  });
}

qh_status qh_track_read_csv_for_signal(const qh_config* config, const qh_signal* signal,
                                       const char* path, qh_track** out) {
  return Guard([&] {
    NotNull(config, "config");
    NotNull(signal, "signal");
    NotNull(path, "path");
    NotNull(out, "out");
    Emit(out, qharma::ReadF0Csv(path, GridFor(config->value, signal->value)));
  });
}

qh_status qh_track_write_csv(const qh_track* track, const char* path) {
  return Guard([&] {
    NotNull(track, "track");
    NotNull(path, "path");
    qharma::WriteF0Csv(track->value, path);
  });
}

size_t qh_track_length(const qh_track* track) { return track ? track->value.size() : 0; }

double qh_track_value(const qh_track* track, size_t frame) {
  return track && frame < track->value.size() ? track->value.values[frame] : 0.0;
}

double qh_track_time(const qh_track* track, size_t frame) {
  return track && frame < track->value.size() ? track->value.grid.centers[frame] : 0.0;
}

double qh_track_mean_voiced(const qh_track* track) {
  if (!track) return 0.0;
  double sum = 0.0;
  std::size_t n = 0;
  for (double v : track->value.values) {
    if (v > 0.0) {
      sum += v;
      ++n;
    }
  }
  return n ? sum / static_cast<double>(n) : 0.0;
}

qh_status qh_analyze(const qh_config* config, const qh_signal* signal, const qh_track* track,
                     qh_harmonics** out) {
  return Guard([&] {
    NotNull(config, "config");
    NotNull(signal, "signal");
    NotNull(out, "out");
    config->value.Validate();
    qharma::RefineReport report;
    qh_harmonics result;
    if (track) {
      result.value = qharma::AnalyzeTrackAndRefine(signal->value, track->value,
                                                   config->value.Analysis(), &report);
    } else {
      result.value = qharma::Analyze(signal->value, config->value.Analysis(), &report);
    }
    result.snr_history = std::move(report.snr_history);
    *out = new qh_harmonics(std::move(result));
  });
}

qh_status qh_analyze_refine_history(const qh_harmonics* harmonics, const double** values,
                                    size_t* count) {
  return Guard([&] {
    NotNull(harmonics, "harmonics");
    NotNull(values, "values");
    NotNull(count, "count");
    *values = harmonics->snr_history.data();
    *count = harmonics->snr_history.size();
  });
}

void qh_harmonics_free(qh_harmonics* harmonics) { delete harmonics; }

qh_status qh_harmonics_read(const char* path, qh_harmonics** out) {
  return Guard([&] {
    NotNull(path, "path");
    NotNull(out, "out");
    *out = new qh_harmonics{qharma::ReadHarmonicSet(path), {}};
  });
}

qh_status qh_harmonics_write(const qh_harmonics* harmonics, const char* path,
                             const char* format) {
  return Guard([&] {
    NotNull(harmonics, "harmonics");
    NotNull(path, "path");
    qharma::WriteHarmonicSet(harmonics->value, path, FormatOr(format, path));
  });
}

size_t qh_harmonics_frames(const qh_harmonics* h) { return h ? h->value.num_frames() : 0; }

size_t qh_harmonics_components(const qh_harmonics* h) {
  return h ? h->value.num_components() : 0;
}

int qh_harmonics_sample_rate(const qh_harmonics* h) { return h ? h->value.sample_rate : 0; }

qh_status qh_harmonics_component(const qh_harmonics* harmonics, size_t frame, size_t k,
                                 double* freq_hz, double* amplitude, double* phase) {
  return Guard([&] {
    NotNull(harmonics, "harmonics");
    const auto& s = harmonics->value;
    qharma::Require(frame < s.num_frames() && k < s.num_components(),
                    "frame or component index out of range");
    if (freq_hz) *freq_hz = s.freqs(frame, k);
    if (amplitude) *amplitude = s.amps(frame, k);
    if (phase) *phase = s.phases(frame, k);
  });
}

qh_status qh_harmonics_frame(const qh_harmonics* harmonics, size_t frame, double* time,
                             double* f0, size_t* count, uint8_t* flags) {
  return Guard([&] {
    NotNull(harmonics, "harmonics");
    const auto& s = harmonics->value;
    qharma::Require(frame < s.num_frames(), "frame index out of range");
    if (time) *time = s.grid.centers[frame];
    if (f0) *f0 = s.f0[frame];
    if (count) *count = s.ComponentCount(frame);
    if (flags) *flags = s.flags[frame];
  });
}

qh_status qh_fit_envelope(const qh_config* config, const qh_harmonics* harmonics,
                          qh_cascade** out) {
  return Guard([&] {
    NotNull(config, "config");
    NotNull(harmonics, "harmonics");
    NotNull(out, "out");
    const auto& c = config->value;
    c.Validate();
    Emit(out, qharma::FitCascade(harmonics->value, c.orders, c.fit, c.rule, c.threads));
  });
}

void qh_cascade_free(qh_cascade* cascade) { delete cascade; }

qh_status qh_cascade_read(const char* path, qh_cascade** out) {
  return Guard([&] {
    NotNull(path, "path");
    NotNull(out, "out");
    Emit(out, qharma::ReadCascade(path));
  });
}

qh_status qh_cascade_write(const qh_cascade* cascade, const char* path, const char* format) {
  return Guard([&] {
    NotNull(cascade, "cascade");
    NotNull(path, "path");
    qharma::WriteCascade(cascade->value, path, FormatOr(format, path));
  });
}

size_t qh_cascade_frames(const qh_cascade* c) { return c ? c->value.num_frames() : 0; }

qh_status qh_cascade_frame(const qh_cascade* cascade, size_t frame, double* time,
                           double* loss, uint8_t* flags) {
  return Guard([&] {
    NotNull(cascade, "cascade");
    const auto& c = cascade->value;
    qharma::Require(frame < c.num_frames(), "frame index out of range");
    if (time) *time = c.grid.centers[frame];
    if (loss) *loss = c.losses[frame];
    if (flags) *flags = c.flags[frame];
  });
}

qh_status qh_synthesize(const qh_config* config, const qh_cascade* cascade,
                        const qh_track* track, qh_signal** out) {
  return Guard([&] {
    NotNull(config, "config");
    NotNull(cascade, "cascade");
    NotNull(track, "track");
    NotNull(out, "out");
    Emit(out, qharma::SynthesizeArma(cascade->value, track->value, config->value.Synthesis()));
  });
}

qh_status qh_synthesize_harmonics(const qh_config* config, const qh_harmonics* harmonics,
                                  qh_signal** out) {
  return Guard([&] {
    NotNull(config, "config");
    NotNull(harmonics, "harmonics");
    NotNull(out, "out");
    Emit(out, qharma::SynthesizeQhm(harmonics->value, config->value.Synthesis()));
  });
}

qh_status qh_modify(const qh_config* config, const qh_cascade* cascade, const qh_track* track,
                    double rho, double beta, const char* schedule_path, qh_signal** out) {
  return Guard([&] {
    NotNull(config, "config");
    NotNull(cascade, "cascade");
    NotNull(track, "track");
    NotNull(out, "out");
    qharma::ScaleSchedule schedule;
    if (schedule_path) {
      const auto points = qharma::ReadScheduleFile(schedule_path);
      schedule = qharma::ScheduleFromBreakpoints(track->value, points);
    } else {
      schedule = qharma::ScaleSchedule::Constant(track->value, beta, rho);
    }
    Emit(out, qharma::Modify(cascade->value, track->value, schedule,
                             config->value.Synthesis()));
  });
}

qh_status qh_evaluate(const qh_config* config, const qh_signal* generated,
                      const qh_signal* reference, double rho, qh_report** out) {
  return Guard([&] {
    NotNull(config, "config");
    NotNull(generated, "generated");
    NotNull(reference, "reference");
    NotNull(out, "out");
    const auto& c = config->value;
    qharma::EvalOptions o;
    o.frame_shift = c.frame_shift;
    o.half_window = 0.5 * c.window_length;
    o.window = c.window;
    o.pitch = c.pitch;
    o.rho = rho;
    o.threads = c.threads;
    Emit(out, qharma::Evaluate(generated->value, reference->value, o));
  });
}

qh_status qh_bench(const qh_config* config, const qh_signal* signal, int runs,
                   qh_report** out) {
  return Guard([&] {
    NotNull(config, "config");
    NotNull(signal, "signal");
    NotNull(out, "out");
    qharma::Require(runs >= 1, "runs must be at least 1");
    const auto& c = config->value;
    c.Validate();
    const auto& buffer = signal->value;
    const double seconds = buffer.duration();
    qharma::Require(seconds > 0.0, "cannot benchmark an empty signal");
    const int warmup = runs > 1 ? 1 : 0;
    const qharma::AnalysisOptions analysis = c.Analysis();
    qharma::HarmonicSet set = qharma::Analyze(buffer, analysis);
    qharma::ArmaCascade cascade = qharma::FitCascade(set, c.orders, c.fit, c.rule, c.threads);
    const qharma::F0Track track = set.Track();
    qharma::MetricReport report;
    report.has_quality = false;
    report.rtf_analysis = qharma::MeasureRtf(
        [&] { set = qharma::Analyze(buffer, analysis); }, seconds, runs, warmup);
    report.rtf_fit = qharma::MeasureRtf(
        [&] { cascade = qharma::FitCascade(set, c.orders, c.fit, c.rule, c.threads); },
        seconds, runs, warmup);
    report.rtf_synthesis = qharma::MeasureRtf(
        [&] { qharma::SynthesizeArma(cascade, track, c.Synthesis()); }, seconds, runs, warmup);
    report.rtf_overall = *report.rtf_analysis + *report.rtf_synthesis;
    Emit(out, std::move(report));
  });
}

void qh_report_free(qh_report* report) { delete report; }

qh_status qh_report_render(const qh_report* report, const char* kind, char** text) {
  return Guard([&] {
    NotNull(report, "report");
    NotNull(kind, "kind");
    NotNull(text, "text");
    const std::string k = kind;
    if (k == "json") {
      *text = Dup(qharma::ReportJson(report->value) + "\n");
    } else if (k == "table") {
      *text = Dup(qharma::ReportTable(report->value));
    } else if (k == "csv") {
      *text = Dup(qharma::ReportCsv(report->value));
    } else {
      qharma::Fail(qharma::ErrorCode::kInvalidArgument, "unknown report kind: " + k);
    }
  });
}

qh_status qh_report_value(const qh_report* report, const char* name, double* value) {
  return Guard([&] {
    NotNull(report, "report");
    NotNull(name, "name");
    NotNull(value, "value");
    const auto& r = report->value;
    const std::string n = name;
    std::optional<double> v;
    if (n == "vuv_rate") {
      v = r.vuv_rate;
    } else if (n == "f0_rmse") {
      v = r.f0_rmse;
    } else if (n == "mcd") {
      v = r.mcd;
    } else if (n == "snr") {
      v = r.snr;
    } else if (n == "rtf_analysis") {
      v = r.rtf_analysis;
    } else if (n == "rtf_fit") {
      v = r.rtf_fit;
    } else if (n == "rtf_synthesis") {
      v = r.rtf_synthesis;
    } else if (n == "rtf_overall") {
      v = r.rtf_overall;
    } else {
      qharma::Fail(qharma::ErrorCode::kInvalidArgument, "unknown metric: " + n);
    }
    if (!v) qharma::Fail(qharma::ErrorCode::kInvalidArgument, "metric not available: " + n);
    *value = *v;
  });
}

}  // extern "C"
