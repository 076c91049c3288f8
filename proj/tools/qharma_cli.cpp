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

// qharma command-line front end. Links only the C interface.

#include <algorithm>
#include <cstdio>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qharma/qharma.h"

namespace {

enum ExitCode { kExitOk = 0, kExitQuality = 1, kExitUsage = 2 };

struct Failure {
  qh_status status;
  std::string message;
};

void Check(qh_status status) {
  if (status != QH_OK) throw Failure{status, qh_last_error()};
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
template <typename T, void (*Free)(T*)>
using Handle = std::unique_ptr<T, Deleter<T, Free>>;

using Config = Handle<qh_config, qh_config_free>;
using Signal = Handle<qh_signal, qh_signal_free>;
using Harmonics = Handle<qh_harmonics, qh_harmonics_free>;
using Cascade = Handle<qh_cascade, qh_cascade_free>;
using Track = Handle<qh_track, qh_track_free>;
using Report = Handle<qh_report, qh_report_free>;

std::string TakeString(char* text) {
  std::string out = text ? text : "";
  qh_string_free(text);
  return out;
}

template <typename H, typename F>
H Make(F&& call) {
  typename H::pointer raw = nullptr;
  Check(call(&raw));
  return H(raw);
}

bool EndsWith(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string StripExtension(const std::string& path) {
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path;
  return path.substr(0, dot);
}

void WriteFile(const std::string& path, const std::string& text) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw Failure{QH_ERR_IO, "cannot create " + path};
  const bool ok = std::fwrite(text.data(), 1, text.size(), f) == text.size();
  if (std::fclose(f) != 0 || !ok) throw Failure{QH_ERR_IO, "cannot write " + path};
}

void WriteWav(const qh_signal* signal, const qh_config* config, const std::string& path) {
  size_t clipped = 0;
  Check(qh_signal_write_wav(signal, config, path.c_str(), &clipped));
  if (clipped > 0) std::fprintf(stderr, "warning: %zu samples clipped in %s\n", clipped, path.c_str());
}

// Config-backed flags shared by all subcommands.
struct CommonFlags {
  std::string config_path;
  std::map<std::string, std::string> values;  // config key -> flag text
  std::vector<std::string> sets;

  void Register(CLI::App& app) {
    app.add_option("--config", config_path, "key = value configuration file");
    Add(app, "--seed", "seed", "Seed for every random choice");
    Add(app, "--frame-shift", "frame_shift", "Frame shift in seconds");
    Add(app, "--window", "window", "Analysis window: hann, hamming or gaussian");
    Add(app, "--window-length", "window_length", "Analysis window length in seconds");
    Add(app, "--orders", "orders", "ARMA orders P,Q,r");
    Add(app, "--k-guard", "k_guard", "Guard band below Nyquist in Hz");
    Add(app, "--f0-range", "f0_range", "Pitch search range MIN,MAX in Hz");
    Add(app, "--voicing-threshold", "voicing_threshold", "Voicing threshold in [0, 1]");
    Add(app, "--threads", "threads", "Worker threads (0 = all cores)");
    Add(app, "--format", "format", "Serialization format: json or bin");
    Add(app, "--wav-format", "wav_format", "WAV output: float32 or pcm16");
    Add(app, "--sample-rate", "sample_rate", "Sample rate of generated fixtures");
    app.add_option("--set", sets, "Override any config key (key=value)");
  }

  void Add(CLI::App& app, const std::string& flag, const std::string& key,
           const std::string& help) {
    app.add_option_function<std::string>(
        flag, [this, key](const std::string& v) { values[key] = v; }, help);
  }

  Config Build() const {
    Config config = Make<Config>([](qh_config** out) { return qh_config_new(out); });
    if (!config_path.empty()) Check(qh_config_load(config.get(), config_path.c_str()));
    for (const auto& [key, value] : values) {
      Check(qh_config_set(config.get(), key.c_str(), value.c_str()));
    }
    for (const std::string& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw Failure{QH_ERR_INVALID_ARGUMENT, "--set expects key=value"};
      Check(qh_config_set(config.get(), kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()));
    }
    Check(qh_config_validate(config.get()));
    return config;
  }
};

std::string FormatOf(const qh_config* config) {
  char* text = nullptr;
  Check(qh_config_get(config, "format", &text));
  return TakeString(text);
}

std::string DefaultExtension(const qh_config* config) {
  return FormatOf(config) == "bin" ? ".bin" : ".json";
}

Signal ReadSignal(const std::string& path) {
  return Make<Signal>([&](qh_signal** out) { return qh_signal_read_wav(path.c_str(), out); });
}

// f0 source for synthesis: a "time_seconds,f0_hz" CSV on the cascade grid or
// a harmonics file.
Track LoadTrack(const std::string& path, const qh_cascade* cascade) {
  if (EndsWith(path, ".csv")) {
    return Make<Track>([&](qh_track** out) { return qh_track_read_csv(path.c_str(), cascade, out); });
  }
  Harmonics h = Make<Harmonics>([&](qh_harmonics** out) { return qh_harmonics_read(path.c_str(), out); });
  return Make<Track>([&](qh_track** out) { return qh_track_from_harmonics(h.get(), out); });
}

int RunAnalyze(const qh_config* config, const std::string& input, std::string output,
               const std::string& f0_file, std::string f0_out) {
  Signal signal = ReadSignal(input);
  Track track;
  if (!f0_file.empty()) {
    track = Make<Track>([&](qh_track** out) {
      return qh_track_read_csv_for_signal(config, signal.get(), f0_file.c_str(), out);
    });
  }
  Harmonics h = Make<Harmonics>([&](qh_harmonics** out) {
    return qh_analyze(config, signal.get(), track.get(), out);
  });
  if (output.empty()) output = StripExtension(input) + ".harmonics" + DefaultExtension(config);
  if (f0_out.empty()) f0_out = StripExtension(output) + ".f0.csv";
  Check(qh_harmonics_write(h.get(), output.c_str(), FormatOf(config).c_str()));
  Track analyzed = Make<Track>([&](qh_track** out) { return qh_track_from_harmonics(h.get(), out); });
  Check(qh_track_write_csv(analyzed.get(), f0_out.c_str()));
  const size_t frames = qh_harmonics_frames(h.get());
  size_t voiced = 0, regularized = 0;
  for (size_t l = 0; l < frames; ++l) {
    double f0 = 0.0;
    uint8_t flags = 0;
    Check(qh_harmonics_frame(h.get(), l, nullptr, &f0, nullptr, &flags));
    voiced += f0 > 0.0;
    regularized += flags & 1u;
  }
  std::printf("frames %zu  voiced %zu  components %zu  mean f0 %.3f Hz\n", frames, voiced,
              qh_harmonics_components(h.get()), qh_track_mean_voiced(analyzed.get()));
  if (regularized) std::printf("regularized frames %zu\n", regularized);
  const double* snr = nullptr;
  size_t count = 0;
  Check(qh_analyze_refine_history(h.get(), &snr, &count));
  for (size_t i = 0; i < count; ++i) std::printf("refine pass %zu  SNR %.3f dB\n", i, snr[i]);
  std::printf("wrote %s and %s\n", output.c_str(), f0_out.c_str());
  return kExitOk;
}

int RunFit(const qh_config* config, const std::string& input, std::string output) {
  Harmonics h = Make<Harmonics>([&](qh_harmonics** out) { return qh_harmonics_read(input.c_str(), out); });
  Cascade c = Make<Cascade>([&](qh_cascade** out) { return qh_fit_envelope(config, h.get(), out); });
  if (output.empty()) output = StripExtension(input) + ".cascade" + DefaultExtension(config);
  Check(qh_cascade_write(c.get(), output.c_str(), FormatOf(config).c_str()));
  const size_t frames = qh_cascade_frames(c.get());
  std::vector<double> losses;
  std::vector<size_t> divergent;
  size_t stalled = 0, degenerate = 0, underdetermined = 0;
  for (size_t l = 0; l < frames; ++l) {
    double loss = 0.0;
    uint8_t flags = 0;
    Check(qh_cascade_frame(c.get(), l, nullptr, &loss, &flags));
    if (flags & QH_FIT_NONFINITE) divergent.push_back(l);
    stalled += (flags & QH_FIT_STALLED) != 0;
    degenerate += (flags & QH_FIT_DEGENERATE) != 0;
    underdetermined += (flags & QH_FIT_UNDERDETERMINED) != 0;
    if (!(flags & (QH_FIT_NONFINITE | QH_FIT_DEGENERATE))) losses.push_back(loss);
  }
  std::sort(losses.begin(), losses.end());
  double mean = 0.0;
  for (double v : losses) mean += v;
  if (!losses.empty()) mean /= static_cast<double>(losses.size());
  std::printf("frames %zu  fitted %zu  degenerate %zu  underdetermined %zu  stalled %zu\n",
              frames, losses.size(), degenerate, underdetermined, stalled);
  if (!losses.empty()) {
    std::printf("loss mean %.6g  median %.6g  max %.6g\n", mean, losses[losses.size() / 2],
                losses.back());
  }
  std::printf("wrote %s\n", output.c_str());
  if (!divergent.empty()) {
    std::fprintf(stderr, "divergent frames:");
    for (size_t l : divergent) std::fprintf(stderr, " %zu", l);
    std::fprintf(stderr, "\n");
    return kExitQuality;
  }
  return kExitOk;
}

int RunSynth(const qh_config* config, const std::string& cascade_path,
             const std::string& f0_path, const std::string& from_harmonics,
             const std::string& output) {
  Signal out;
  if (!from_harmonics.empty()) {
    Harmonics h = Make<Harmonics>([&](qh_harmonics** o) { return qh_harmonics_read(from_harmonics.c_str(), o); });
    out = Make<Signal>([&](qh_signal** o) { return qh_synthesize_harmonics(config, h.get(), o); });
  } else {
    if (cascade_path.empty() || f0_path.empty()) {
      throw Failure{QH_ERR_INVALID_ARGUMENT, "synth needs a cascade file and --f0, or --from-harmonics"};
    }
    Cascade c = Make<Cascade>([&](qh_cascade** o) { return qh_cascade_read(cascade_path.c_str(), o); });
    Track t = LoadTrack(f0_path, c.get());
    out = Make<Signal>([&](qh_signal** o) { return qh_synthesize(config, c.get(), t.get(), o); });
  }
  WriteWav(out.get(), config, output);
  std::printf("wrote %s (%.4f s)\n", output.c_str(), qh_signal_duration(out.get()));
  return kExitOk;
}

int RunModify(const qh_config* config, const std::string& cascade_path, const std::string& f0_path,
              double rho, double beta, const std::string& schedule, const std::string& output) {
  Cascade c = Make<Cascade>([&](qh_cascade** o) { return qh_cascade_read(cascade_path.c_str(), o); });
  Track t = LoadTrack(f0_path, c.get());
  Signal out = Make<Signal>([&](qh_signal** o) {
    return qh_modify(config, c.get(), t.get(), rho, beta, schedule.empty() ? nullptr : schedule.c_str(), o);
  });
  WriteWav(out.get(), config, output);
  Track detected = Make<Track>([&](qh_track** o) { return qh_detect_f0(config, out.get(), o); });
  std::printf("duration %.6f s  mean detected f0 %.3f Hz\n", qh_signal_duration(out.get()),
              qh_track_mean_voiced(detected.get()));
  std::printf("wrote %s\n", output.c_str());
  return kExitOk;
}

int RunEval(const qh_config* config, const std::string& gen, const std::string& ref, double rho,
            const std::string& json_path, const std::string& csv_path) {
  Signal g = ReadSignal(gen);
  Signal r = ReadSignal(ref);
  Report report = Make<Report>([&](qh_report** o) { return qh_evaluate(config, g.get(), r.get(), rho, o); });
  auto render = [&](const char* kind) {
    char* text = nullptr;
    Check(qh_report_render(report.get(), kind, &text));
    return TakeString(text);
  };
  std::fputs(render("table").c_str(), stdout);
  const std::string json = render("json");
  if (json_path.empty()) {
    std::fputs(json.c_str(), stdout);
  } else {
    WriteFile(json_path, json);
  }
  if (!csv_path.empty()) WriteFile(csv_path, render("csv"));
  return kExitOk;
}

int RunBench(const qh_config* config, const std::string& input, int runs) {
  Signal s = ReadSignal(input);
  Report report = Make<Report>([&](qh_report** o) { return qh_bench(config, s.get(), runs, o); });
  char* text = nullptr;
  Check(qh_report_render(report.get(), "table", &text));
  std::printf("input %s  %.3f s\n", input.c_str(), qh_signal_duration(s.get()));
  std::fputs(TakeString(text).c_str(), stdout);
  return kExitOk;
}

int RunGenFixture(const qh_config* config, const std::string& kind, const qh_fixture_params& params,
                  const std::string& output, std::string sidecar) {
  char* side = nullptr;
  Signal s = Make<Signal>([&](qh_signal** o) {
    return qh_generate_fixture(config, kind.c_str(), &params, o, &side);
  });
  const std::string json = TakeString(side);
  if (sidecar.empty()) sidecar = StripExtension(output) + ".json";
  WriteWav(s.get(), config, output);
  WriteFile(sidecar, json);
  std::printf("wrote %s (%zu samples) and %s\n", output.c_str(), qh_signal_length(s.get()),
              sidecar.c_str());
  return kExitOk;
}

int ExitFor(qh_status status) {
  return status == QH_ERR_NUMERICAL || status == QH_ERR_INTERNAL ? kExitQuality : kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qharma: quasi-harmonic ARMA vocoder toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  CommonFlags common;
  common.Register(app);

  std::string input, input2, output, f0_file, f0_out, schedule, from_harmonics, json_path,
      csv_path, sidecar, kind, adaptive, fit_method;
  double rho = 1.0, beta = 1.0;
  int runs = 3;
  std::optional<int> iterations;
  qh_fixture_params params{};

  auto* analyze = app.add_subcommand("analyze", "QHM analysis of a WAV file");
  analyze->add_option("input", input, "Input WAV")->required();
  analyze->add_option("-o,--output", output, "Harmonics file (.json or .bin)");
  analyze->add_option("--f0-file", f0_file, "Use this f0 CSV instead of tracking");
  analyze->add_option("--f0-out", f0_out, "Where to write the f0 CSV");
  analyze->add_option("--adaptive", adaptive, "Adaptive refinement: none, aqhm or eaqhm");
  analyze->add_option("--iterations", iterations, "Adaptive refinement iterations");

  auto* fit = app.add_subcommand("fit-envelope", "Fit ARMA cascades to a harmonics file");
  fit->add_option("input", input, "Harmonics file")->required();
  fit->add_option("-o,--output", output, "Cascade file (.json or .bin)");
  fit->add_option("--fit-method", fit_method, "Optimizer: lm or gd");

  auto* synth = app.add_subcommand("synth", "Synthesize from a cascade and an f0 source");
  synth->add_option("cascade", input, "Cascade file");
  synth->add_option("--f0", f0_file, "f0 CSV or harmonics file");
  synth->add_option("--from-harmonics", from_harmonics, "Resynthesize a harmonics file directly");
  synth->add_option("-o,--output", output, "Output WAV")->required();

  auto* modify = app.add_subcommand("modify", "Time- and pitch-scale modification");
  modify->add_option("cascade", input, "Cascade file")->required();
  modify->add_option("--f0", f0_file, "f0 CSV or harmonics file")->required();
  modify->add_option("--rho", rho, "Pitch-scale factor");
  modify->add_option("--beta", beta, "Time-scale factor");
  modify->add_option("--schedule", schedule, "Breakpoint file of 'time_seconds beta rho' lines");
  modify->add_option("-o,--output", output, "Output WAV")->required();

  auto* eval = app.add_subcommand("eval", "Objective metrics of a generated signal");
  eval->add_option("generated", input, "Generated WAV")->required();
  eval->add_option("reference", input2, "Reference WAV")->required();
  eval->add_option("--rho", rho, "Pitch-scale factor applied to the reference f0");
  eval->add_option("--json", json_path, "Write the JSON report here instead of stdout");
  eval->add_option("--csv", csv_path, "Per-frame f0 and MCD trajectories");

  auto* bench = app.add_subcommand("bench", "Real-time factors of the pipeline stages");
  bench->add_option("input", input, "Input WAV")->required();
  bench->add_option("--runs", runs, "Timed runs per stage (median)");

  auto* gen = app.add_subcommand("gen-fixture", "Generate a test signal and its sidecar");
  gen->add_option("kind", kind, "tone, multisine, chirp, am, vowel or noise")->required();
  gen->add_option("-o,--output", output, "Output WAV")->required();
  gen->add_option("--sidecar", sidecar, "Sidecar JSON path");
  gen->add_option("--duration", params.duration, "Seconds");
  gen->add_option("--f0", params.f0, "Tone frequency or fundamental in Hz");
  gen->add_option("--f0-end", params.f0_end, "Chirp end fundamental in Hz");
  gen->add_option("--harmonics", params.num_harmonics, "Number of harmonics");
  gen->add_option("--amplitude", params.amplitude, "Peak component amplitude");

  for (CLI::App* sub : {analyze, fit, synth, modify, eval, bench, gen}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (!adaptive.empty()) common.values["adaptive"] = adaptive;
    if (iterations) common.values["adaptive_iterations"] = std::to_string(*iterations);
    if (!fit_method.empty()) common.values["fit_method"] = fit_method;
    Config config = common.Build();
    if (*analyze) return RunAnalyze(config.get(), input, output, f0_file, f0_out);
    if (*fit) return RunFit(config.get(), input, output);
    if (*synth) return RunSynth(config.get(), input, f0_file, from_harmonics, output);
    if (*modify) return RunModify(config.get(), input, f0_file, rho, beta, schedule, output);
    if (*eval) return RunEval(config.get(), input, input2, rho, json_path, csv_path);
    if (*bench) return RunBench(config.get(), input, runs);
    if (*gen) return RunGenFixture(config.get(), kind, params, output, sidecar);
  } catch (const Failure& f) {
    std::fprintf(stderr, "error: %s\n", f.message.c_str());
    return ExitFor(f.status);
  }
  return kExitUsage;
}
