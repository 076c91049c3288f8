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

/* C interface to the qharma vocoder toolkit. Objects are opaque handles
 * owned by the caller and released with the matching *_free function.
 * Every fallible call returns a qh_status; the message of the most recent
 * failure on the calling thread is available from qh_last_error(). */

#ifndef QHARMA_QHARMA_H_
#define QHARMA_QHARMA_H_

#include <stddef.h>
#include <stdint.h>

#if defined(QHARMA_BUILDING_LIBRARY)
#define QH_API __attribute__((visibility("default")))
#else
#define QH_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qh_status {
  QH_OK = 0,
  QH_ERR_INVALID_ARGUMENT = 1,
  QH_ERR_IO = 2,
  QH_ERR_FORMAT = 3,
  QH_ERR_NUMERICAL = 4,
  QH_ERR_DIMENSION = 5,
  QH_ERR_INTERNAL = 6
} qh_status;

typedef struct qh_config qh_config;
typedef struct qh_signal qh_signal;
typedef struct qh_harmonics qh_harmonics;
typedef struct qh_cascade qh_cascade;
typedef struct qh_track qh_track;
typedef struct qh_report qh_report;

QH_API const char* qh_version(void);
QH_API const char* qh_last_error(void);
QH_API const char* qh_status_name(qh_status status);
/* Strings handed out by the library. */
QH_API void qh_string_free(char* text);

/* Pipeline configuration: defaults, then a key = value file, then
 * individual overrides. Unknown keys are rejected. */
QH_API qh_status qh_config_new(qh_config** out);
QH_API void qh_config_free(qh_config* config);
QH_API qh_status qh_config_load(qh_config* config, const char* path);
QH_API qh_status qh_config_set(qh_config* config, const char* key, const char* value);
QH_API qh_status qh_config_get(const qh_config* config, const char* key, char** value);
QH_API qh_status qh_config_dump(const qh_config* config, char** text);
QH_API qh_status qh_config_validate(const qh_config* config);

/* Mono audio. */
QH_API qh_status qh_signal_new(const double* samples, size_t count, int sample_rate,
                               qh_signal** out);
QH_API void qh_signal_free(qh_signal* signal);
QH_API qh_status qh_signal_read_wav(const char* path, qh_signal** out);
/* Sample format and clip policy come from the config; clipped samples are
 * counted in *clipped when it is not NULL. */
QH_API qh_status qh_signal_write_wav(const qh_signal* signal, const qh_config* config,
                                     const char* path, size_t* clipped);
QH_API size_t qh_signal_length(const qh_signal* signal);
QH_API int qh_signal_sample_rate(const qh_signal* signal);
QH_API const double* qh_signal_samples(const qh_signal* signal);
QH_API double qh_signal_duration(const qh_signal* signal);

/* Test-signal generators. kind: tone, multisine, chirp, am, vowel, noise.
 * Fields left at zero take the kind's default; the sample rate and seed
 * come from the config. */
typedef struct qh_fixture_params {
  double duration;
  double f0;
  double f0_end;
  int num_harmonics;
  double amplitude;
} qh_fixture_params;

QH_API qh_status qh_generate_fixture(const qh_config* config, const char* kind,
                                     const qh_fixture_params* params, qh_signal** out,
                                     char** sidecar_json);

/* f0 tracks on a frame grid. */
QH_API void qh_track_free(qh_track* track);
QH_API qh_status qh_detect_f0(const qh_config* config, const qh_signal* signal,
                              qh_track** out);
QH_API qh_status qh_track_from_harmonics(const qh_harmonics* harmonics, qh_track** out);
/* Reads "time_seconds,f0_hz" rows matching the cascade's frame grid. */
QH_API qh_status qh_track_read_csv(const char* path, const qh_cascade* grid_source,
                                   qh_track** out);
/* Reads rows matching the grid the config lays over `signal`. */
QH_API qh_status qh_track_read_csv_for_signal(const qh_config* config,
                                              const qh_signal* signal, const char* path,
                                              qh_track** out);
QH_API qh_status qh_track_write_csv(const qh_track* track, const char* path);
QH_API size_t qh_track_length(const qh_track* track);
QH_API double qh_track_value(const qh_track* track, size_t frame);
QH_API double qh_track_time(const qh_track* track, size_t frame);
/* Mean over voiced frames, 0 when none is voiced. */
QH_API double qh_track_mean_voiced(const qh_track* track);

/* QHM analysis. f0 is tracked from the signal unless `track` is given.
 * snr_history receives the adaptive refinement SNRs (may be NULL). */
QH_API qh_status qh_analyze(const qh_config* config, const qh_signal* signal,
                            const qh_track* track, qh_harmonics** out);
QH_API qh_status qh_analyze_refine_history(const qh_harmonics* harmonics,
                                           const double** values, size_t* count);
QH_API void qh_harmonics_free(qh_harmonics* harmonics);
QH_API qh_status qh_harmonics_read(const char* path, qh_harmonics** out);
/* format: "json" or "bin"; NULL takes the config's format. */
QH_API qh_status qh_harmonics_write(const qh_harmonics* harmonics, const char* path,
                                    const char* format);
QH_API size_t qh_harmonics_frames(const qh_harmonics* harmonics);
QH_API size_t qh_harmonics_components(const qh_harmonics* harmonics);
QH_API int qh_harmonics_sample_rate(const qh_harmonics* harmonics);
QH_API qh_status qh_harmonics_component(const qh_harmonics* harmonics, size_t frame,
                                        size_t k, double* freq_hz, double* amplitude,
                                        double* phase);
QH_API qh_status qh_harmonics_frame(const qh_harmonics* harmonics, size_t frame,
                                    double* time, double* f0, size_t* count,
                                    uint8_t* flags);

/* Envelope fitting. */
QH_API qh_status qh_fit_envelope(const qh_config* config, const qh_harmonics* harmonics,
                                 qh_cascade** out);
QH_API void qh_cascade_free(qh_cascade* cascade);
QH_API qh_status qh_cascade_read(const char* path, qh_cascade** out);
QH_API qh_status qh_cascade_write(const qh_cascade* cascade, const char* path,
                                  const char* format);
QH_API size_t qh_cascade_frames(const qh_cascade* cascade);
QH_API qh_status qh_cascade_frame(const qh_cascade* cascade, size_t frame, double* time,
                                  double* loss, uint8_t* flags);
/* Flag bits per frame. */
#define QH_FIT_NONFINITE 1u
#define QH_FIT_DEGENERATE 2u
#define QH_FIT_UNDERDETERMINED 4u
#define QH_FIT_STALLED 8u

/* Synthesis. */
QH_API qh_status qh_synthesize(const qh_config* config, const qh_cascade* cascade,
                               const qh_track* track, qh_signal** out);
QH_API qh_status qh_synthesize_harmonics(const qh_config* config,
                                         const qh_harmonics* harmonics, qh_signal** out);

/* Time and pitch-scale modification with constant factors, or with a
 * breakpoint file ("time_seconds beta rho" lines) when schedule_path is
 * not NULL. */
QH_API qh_status qh_modify(const qh_config* config, const qh_cascade* cascade,
                           const qh_track* track, double rho, double beta,
                           const char* schedule_path, qh_signal** out);

/* Metrics. rho scales the reference f0 inside f0_rmse. */
QH_API qh_status qh_evaluate(const qh_config* config, const qh_signal* generated,
                             const qh_signal* reference, double rho, qh_report** out);
/* Real-time factors of analysis, envelope fitting and synthesis. */
QH_API qh_status qh_bench(const qh_config* config, const qh_signal* signal, int runs,
                          qh_report** out);
QH_API void qh_report_free(qh_report* report);
/* kind: "json", "table" or "csv". */
QH_API qh_status qh_report_render(const qh_report* report, const char* kind, char** text);
/* name: vuv_rate, f0_rmse, mcd, snr, rtf_analysis, rtf_fit, rtf_synthesis,
 * rtf_overall. Missing values give QH_ERR_INVALID_ARGUMENT. */
QH_API qh_status qh_report_value(const qh_report* report, const char* name, double* value);

#ifdef __cplusplus
}
#endif

#endif  /* QHARMA_QHARMA_H_ */
