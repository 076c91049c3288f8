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

/* C API smoke test: every call from plain C, status codes, handle
 * lifetimes and a short analysis/synthesis pipeline. */

#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "qharma/qharma.h"

static int failures = 0;

#define EXPECT(cond)                                                  \
  do {                                                                \
    if (!(cond)) {                                                    \
      fprintf(stderr, "%s:%d: expected %s (%s)\n", __FILE__, __LINE__, \
              #cond, qh_last_error());                                \
      ++failures;                                                     \
    }                                                                 \
  } while (0)

#define EXPECT_OK(call) EXPECT((call) == QH_OK)

static void test_config(void) {
  qh_config* config = NULL;
  char* text = NULL;
  EXPECT_OK(qh_config_new(&config));
  EXPECT_OK(qh_config_set(config, "frame_shift", "0.01"));
  EXPECT_OK(qh_config_get(config, "frame_shift", &text));
  EXPECT(text != NULL && atof(text) == 0.01);
  qh_string_free(text);
  EXPECT(qh_config_set(config, "bogus", "1") == QH_ERR_INVALID_ARGUMENT);
  EXPECT(strlen(qh_last_error()) > 0);
  EXPECT(qh_config_load(config, "/nonexistent/qharma.conf") == QH_ERR_IO);
  EXPECT_OK(qh_config_dump(config, &text));
  EXPECT(text != NULL && strstr(text, "frame_shift") != NULL);
  qh_string_free(text);
  EXPECT_OK(qh_config_validate(config));
  EXPECT(qh_config_new(NULL) == QH_ERR_INVALID_ARGUMENT);
  EXPECT(strcmp(qh_status_name(QH_ERR_FORMAT), "") != 0);
  qh_config_free(config);
  qh_config_free(NULL);
}

static void test_pipeline(const char* dir) {
  qh_config* config = NULL;
  qh_signal* vowel = NULL;
  qh_harmonics* harmonics = NULL;
  qh_harmonics* reread = NULL;
  qh_cascade* cascade = NULL;
  qh_track* track = NULL;
  qh_signal* synth = NULL;
  qh_signal* same = NULL;
  qh_report* report = NULL;
  char* sidecar = NULL;
  char path[1024];
  qh_fixture_params params;
  double value = 0.0;
  size_t n, i;

  memset(&params, 0, sizeof params);
  params.duration = 0.1;
  EXPECT_OK(qh_config_new(&config));
  EXPECT_OK(qh_config_set(config, "orders", "16,16,2"));
  EXPECT_OK(qh_generate_fixture(config, "vowel", &params, &vowel, &sidecar));
  EXPECT(sidecar != NULL && strstr(sidecar, "vowel") != NULL);
  qh_string_free(sidecar);
  EXPECT(qh_signal_length(vowel) == 2400);
  EXPECT(qh_signal_sample_rate(vowel) == 24000);

  EXPECT_OK(qh_analyze(config, vowel, NULL, &harmonics));
  EXPECT(qh_harmonics_frames(harmonics) == 21);
  snprintf(path, sizeof path, "%s/capi.harmonics.bin", dir);
  EXPECT_OK(qh_harmonics_write(harmonics, path, "bin"));
  EXPECT_OK(qh_harmonics_read(path, &reread));
  EXPECT(qh_harmonics_frames(reread) == qh_harmonics_frames(harmonics));
  {
    double f1 = 0, a1 = 0, p1 = 0, f2 = 0, a2 = 0, p2 = 0;
    EXPECT_OK(qh_harmonics_component(harmonics, 5, 0, &f1, &a1, &p1));
    EXPECT_OK(qh_harmonics_component(reread, 5, 0, &f2, &a2, &p2));
    EXPECT(f1 == f2 && a1 == a2 && p1 == p2);
    EXPECT(fabs(f1 - 150.0) < 1.0);
  }
  EXPECT(qh_harmonics_component(harmonics, 999, 0, &value, &value, &value) ==
         QH_ERR_INVALID_ARGUMENT);

  EXPECT_OK(qh_fit_envelope(config, harmonics, &cascade));
  EXPECT(qh_cascade_frames(cascade) == 21);
  EXPECT_OK(qh_track_from_harmonics(harmonics, &track));
  EXPECT(fabs(qh_track_mean_voiced(track) - 150.0) < 1.0);
  EXPECT_OK(qh_synthesize(config, cascade, track, &synth));
  EXPECT(qh_signal_length(synth) == qh_signal_length(vowel));
  EXPECT_OK(qh_modify(config, cascade, track, 1.0, 1.0, NULL, &same));
  n = qh_signal_length(same);
  EXPECT(n == qh_signal_length(synth));
  for (i = 0; i < n && i < qh_signal_length(synth); ++i) {
    EXPECT(fabs(qh_signal_samples(same)[i] - qh_signal_samples(synth)[i]) <= 1e-9);
  }

  EXPECT_OK(qh_evaluate(config, synth, vowel, 1.0, &report));
  EXPECT_OK(qh_report_value(report, "snr", &value));
  EXPECT(value >= 20.0);
  EXPECT(qh_report_value(report, "rtf_fit", &value) == QH_ERR_INVALID_ARGUMENT);
  qh_report_free(report);
  report = NULL;

  EXPECT_OK(qh_evaluate(config, vowel, vowel, 1.0, &report));
  EXPECT_OK(qh_report_value(report, "mcd", &value));
  EXPECT(value == 0.0);
  {
    char* json = NULL;
    EXPECT_OK(qh_report_render(report, "json", &json));
    EXPECT(json != NULL && strstr(json, "snr") != NULL);
    qh_string_free(json);
  }

  snprintf(path, sizeof path, "%s/capi.wav", dir);
  EXPECT_OK(qh_signal_write_wav(synth, config, path, NULL));
  {
    qh_signal* back = NULL;
    EXPECT_OK(qh_signal_read_wav(path, &back));
    EXPECT(qh_signal_length(back) == qh_signal_length(synth));
    qh_signal_free(back);
  }
  EXPECT(qh_cascade_read("/nonexistent/x.json", &cascade) == QH_ERR_IO);
  snprintf(path, sizeof path, "%s/capi.garbage.json", dir);
  {
    FILE* f = fopen(path, "w");
    if (f) {
      fputs("{\"format\": \"qharma.cascade\"", f);
      fclose(f);
    }
  }
  {
    qh_cascade* broken = NULL;
    EXPECT(qh_cascade_read(path, &broken) == QH_ERR_FORMAT);
    EXPECT(broken == NULL);
  }

  qh_report_free(report);
  qh_signal_free(same);
  qh_signal_free(synth);
  qh_track_free(track);
  qh_cascade_free(cascade);
  qh_harmonics_free(reread);
  qh_harmonics_free(harmonics);
  qh_signal_free(vowel);
  qh_config_free(config);
}

int main(int argc, char** argv) {
  const char* dir = argc > 1 ? argv[1] : ".";
  EXPECT(qh_version() != NULL && strlen(qh_version()) > 0);
  test_config();
  test_pipeline(dir);
  if (failures == 0) printf("capi: all checks passed\n");
  return failures == 0 ? 0 : 1;
}
