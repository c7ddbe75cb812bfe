// Copyright 2026 The dpmwf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// dpmwf command-line front end. Talks to the library only through dpmwf.h.

#include <unistd.h>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dpmwf/dpmwf.h"
#include "json.hpp"

namespace {

namespace fs = std::filesystem;

enum ExitCode { kOk = 0, kInternal = 1, kUsage = 2, kData = 3, kNumerical = 4 };

// Carries a library status up to main().
struct Failure {
  dpmwf_status status;
  std::string message;
};

void check(dpmwf_status s, const std::string& context) {
  if (s != DPMWF_OK) throw Failure{s, context + ": " + dpmwf_last_error()};
}

[[noreturn]] void usage_error(const std::string& message) {
  throw Failure{DPMWF_ERR_USAGE, message};
}

int exit_code(dpmwf_status s) {
  switch (s) {
    case DPMWF_OK:
      return kOk;
    case DPMWF_ERR_USAGE:
      return kUsage;
    case DPMWF_ERR_FORMAT:
    case DPMWF_ERR_IO:
      return kData;
    case DPMWF_ERR_NUMERICAL:
      return kNumerical;
    default:
      return kInternal;
  }
}

struct SignalDeleter {
  void operator()(dpmwf_signal* s) const { dpmwf_signal_destroy(s); }
};
struct ConfigDeleter {
  void operator()(dpmwf_config* c) const { dpmwf_config_destroy(c); }
};
struct SceneDeleter {
  void operator()(dpmwf_scene* s) const { dpmwf_scene_destroy(s); }
};
struct SrpDeleter {
  void operator()(dpmwf_srp_map* m) const { dpmwf_srp_destroy(m); }
};
using Signal = std::unique_ptr<dpmwf_signal, SignalDeleter>;
using Config = std::unique_ptr<dpmwf_config, ConfigDeleter>;
using Scene = std::unique_ptr<dpmwf_scene, SceneDeleter>;
using SrpMap = std::unique_ptr<dpmwf_srp_map, SrpDeleter>;

Signal read_signal(const std::string& path) {
  dpmwf_signal* s = nullptr;
  check(dpmwf_signal_read_wav(path.c_str(), &s), "reading " + path);
  return Signal(s);
}

void write_signal(const Signal& s, const std::string& path) {
  check(dpmwf_signal_write_wav(s.get(), path.c_str()), "writing " + path);
}

Scene read_scene(const std::string& path) {
  dpmwf_scene* s = nullptr;
  check(dpmwf_scene_read(path.c_str(), &s), "reading " + path);
  return Scene(s);
}

void write_text_atomic(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << text;
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Failure{DPMWF_ERR_IO, "cannot write " + path};
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Failure{DPMWF_ERR_IO, "cannot rename onto " + path};
  }
}

// Every pipeline field as a flag.
struct ConfigFlags {
  std::size_t frame_size = 512;
  std::size_t hop_size = 256;
  std::uint32_t sample_rate = 32000;
  double a = 0.0;
  double mu = 1.0;
  double nu = 8.0;
  double window_ms = 100.0;
  double epsilon = 1e-5;
  double lambda = 10.0;
  double array_diameter = 0.07;
  double sound_speed = 343.0;
  std::optional<std::size_t> ild_left;
  std::optional<std::size_t> ild_right;
  CLI::Option* diameter_opt = nullptr;

  void add_to(CLI::App* app) {
    app->add_option("--frame-size", frame_size, "STFT frame length")
        ->capture_default_str();
    app->add_option("--hop-size", hop_size, "STFT hop")->capture_default_str();
    app->add_option("--sample-rate", sample_rate, "expected sample rate (Hz)")
        ->capture_default_str();
    app->add_option("--a", a, "lower bound on the identity mixing factor")
        ->capture_default_str();
    app->add_option("--mu", mu, "noise reduction weight")->capture_default_str();
    app->add_option("--nu", nu, "direction-preserving weight")
        ->capture_default_str();
    app->add_option("--window-ms", window_ms, "covariance window (ms)")
        ->capture_default_str();
    app->add_option("--epsilon", epsilon, "Cholesky diagonal floor")
        ->capture_default_str();
    app->add_option("--lambda", lambda, "Cholesky loss weight")
        ->capture_default_str();
    diameter_opt =
        app->add_option("--array-diameter", array_diameter,
                        "circular array diameter (m)")
            ->capture_default_str();
    app->add_option("--sound-speed", sound_speed, "speed of sound (m/s)")
        ->capture_default_str();
    app->add_option("--ild-left", ild_left, "left channel for the ILD");
    app->add_option("--ild-right", ild_right, "right channel for the ILD");
  }

  Config build() const {
    dpmwf_config* raw = nullptr;
    check(dpmwf_config_create(&raw), "config");
    Config c(raw);
    check(dpmwf_config_set_stft(raw, frame_size, hop_size, sample_rate),
          "config");
    check(dpmwf_config_set_filter(raw, a, mu, nu), "config");
    check(dpmwf_config_set_window_ms(raw, window_ms), "config");
    check(dpmwf_config_set_epsilon(raw, epsilon), "config");
    check(dpmwf_config_set_lambda(raw, lambda), "config");
    check(dpmwf_config_set_array(raw, array_diameter, sound_speed), "config");
    if (ild_left.has_value() != ild_right.has_value()) {
      usage_error("--ild-left and --ild-right go together");
    }
    if (ild_left) {
      check(dpmwf_config_set_ild_pair(raw, *ild_left, *ild_right), "config");
    }
    check(dpmwf_config_validate(raw), "config");
    return c;
  }
};

nlohmann::json report_json(const dpmwf_enhance_report& r) {
  return {
      {"frames", r.frames},
      {"bins", r.bins},
      {"channels", r.channels},
      {"filter_bins", r.filter_bins},
      {"loaded_bins", r.loaded_bins},
      {"singular_bins", r.singular_bins},
      {"trace_clamped_bins", r.trace_clamped_bins},
      {"gamma_floored_bins", r.gamma_floored_bins},
      {"mixing_factor",
       {{"min", r.mixing_min}, {"max", r.mixing_max}, {"mean", r.mixing_mean}}},
  };
}

// ---- simulate ----

struct SimulateArgs {
  std::string out_dir;
  std::string scene_path;
  std::uint64_t seed = 0;
  double duration = 2.0;
  std::optional<double> snr;
  std::optional<std::size_t> max_order;
  std::string speech;
  std::vector<std::string> noises;
  bool synthetic = false;
};

void run_simulate(const SimulateArgs& args) {
  dpmwf_scene* raw = nullptr;
  if (!args.scene_path.empty()) {
    raw = read_scene(args.scene_path).release();
  } else {
    check(dpmwf_scene_sample(args.seed, args.duration, &raw), "sampling scene");
  }
  Scene scene(raw);
  if (args.snr) check(dpmwf_scene_set_snr(raw, *args.snr), "--snr");
  if (args.max_order) {
    check(dpmwf_scene_set_max_order(raw, *args.max_order), "--max-order");
  }
  const std::size_t sources = dpmwf_scene_num_noise_sources(raw);
  const std::uint32_t fs = dpmwf_scene_sample_rate(raw);
  const double duration = dpmwf_scene_duration(raw);

  Signal speech;
  std::vector<Signal> noises;
  if (args.synthetic) {
    if (!args.speech.empty() || !args.noises.empty()) {
      usage_error("--synthetic excludes --speech and --noise");
    }
    dpmwf_signal* s = nullptr;
    check(dpmwf_synth_speech(args.seed, duration, fs, &s), "speech");
    speech.reset(s);
    for (std::size_t i = 0; i < sources; ++i) {
      check(dpmwf_synth_noise(args.seed + 1 + i, duration, fs, &s), "noise");
      noises.emplace_back(s);
    }
  } else {
    if (args.speech.empty()) usage_error("--speech or --synthetic is required");
    if (args.noises.size() != sources) {
      usage_error("scene has " + std::to_string(sources) +
                  " noise sources but " + std::to_string(args.noises.size()) +
                  " --noise files were given");
    }
    speech = read_signal(args.speech);
    for (const auto& path : args.noises) noises.push_back(read_signal(path));
  }
  std::vector<const dpmwf_signal*> noise_ptrs;
  for (const auto& n : noises) noise_ptrs.push_back(n.get());

  dpmwf_signal *mix = nullptr, *clean = nullptr, *noise = nullptr;
  check(dpmwf_scene_render(raw, speech.get(), noise_ptrs.data(),
                           noise_ptrs.size(), &mix, &clean, &noise),
        "rendering scene");
  Signal mixture_s(mix), clean_s(clean), noise_s(noise);

  std::error_code ec;
  fs::create_directories(args.out_dir, ec);
  if (ec) throw Failure{DPMWF_ERR_IO, "cannot create " + args.out_dir};
  const fs::path dir(args.out_dir);
  write_signal(mixture_s, (dir / "mixture.wav").string());
  write_signal(clean_s, (dir / "clean.wav").string());
  write_signal(noise_s, (dir / "noise.wav").string());
  check(dpmwf_scene_write(raw, (dir / "scene.txt").string().c_str()),
        "writing scene");
  std::cerr << "target azimuth " << dpmwf_scene_target_azimuth(raw)
            << " deg, " << sources << " noise source(s)\n";
}

// ---- enhance ----

struct EnhanceArgs {
  std::string mixture;
  std::string noise_wav;
  std::string cholesky;
  std::string output;
  std::string report;
};

void run_enhance(const EnhanceArgs& args, const ConfigFlags& flags) {
  if (args.noise_wav.empty() == args.cholesky.empty()) {
    usage_error("give exactly one noise source: --noise-wav or --cholesky");
  }
  Config config = flags.build();
  Signal mixture = read_signal(args.mixture);
  dpmwf_signal* out = nullptr;
  dpmwf_enhance_report report{};
  if (!args.noise_wav.empty()) {
    Signal noise = read_signal(args.noise_wav);
    check(dpmwf_enhance_oracle(config.get(), mixture.get(), noise.get(), &out,
                               &report),
          "enhance");
  } else {
    check(dpmwf_enhance_cholesky(config.get(), mixture.get(),
                                 args.cholesky.c_str(), &out, &report),
          "enhance");
  }
  Signal enhanced(out);
  write_signal(enhanced, args.output);
  const nlohmann::json j = report_json(report);
  if (!args.report.empty()) {
    write_text_atomic(args.report, j.dump(2) + "\n");
  } else {
    std::cerr << j.dump() << "\n";
  }
}

// ---- export-cholesky ----

struct ExportArgs {
  std::string mixture;
  std::string noise_wav;
  std::string output;
};

void run_export(const ExportArgs& args, const ConfigFlags& flags) {
  Config config = flags.build();
  Signal mixture = read_signal(args.mixture);
  Signal noise = read_signal(args.noise_wav);
  check(dpmwf_export_oracle_cholesky(config.get(), mixture.get(), noise.get(),
                                     args.output.c_str()),
        "export");
}

// ---- evaluate ----

struct EvaluateArgs {
  std::string enhanced;
  std::string clean;
  std::string noise;
  std::string mixture;
  std::string cholesky;
  std::string scene;
  std::optional<double> target_azimuth;
  std::string output;
};

void run_evaluate(const EvaluateArgs& args, ConfigFlags flags) {
  double azimuth = 0.0;
  if (!args.scene.empty()) {
    if (args.target_azimuth) usage_error("--scene excludes --target-azimuth");
    Scene scene = read_scene(args.scene);
    azimuth = dpmwf_scene_target_azimuth(scene.get());
    if (flags.diameter_opt->count() == 0) {
      flags.array_diameter = dpmwf_scene_array_diameter(scene.get());
    }
  } else if (args.target_azimuth) {
    azimuth = *args.target_azimuth;
  } else {
    usage_error("--scene or --target-azimuth is required");
  }
  Config config = flags.build();
  Signal enhanced = read_signal(args.enhanced);
  Signal clean = read_signal(args.clean);
  Signal noise = read_signal(args.noise);
  Signal mixture;
  if (!args.mixture.empty()) mixture = read_signal(args.mixture);
  dpmwf_metrics metrics{};
  check(dpmwf_evaluate(config.get(), enhanced.get(), clean.get(), noise.get(),
                       mixture.get(),
                       args.cholesky.empty() ? nullptr : args.cholesky.c_str(),
                       azimuth, &metrics),
        "evaluate");
  check(dpmwf_metrics_write_csv(&metrics, args.output.c_str()),
        "writing " + args.output);
}

// ---- srp-map ----

struct SrpArgs {
  std::string input;
  std::string csv;
  std::string pgm;
  double step = 1.0;
  double range_db = 40.0;
  double band_lo = 500.0;
  double band_hi = 2000.0;
};

void run_srp(const SrpArgs& args, const ConfigFlags& flags) {
  if (args.csv.empty() && args.pgm.empty()) {
    usage_error("give --csv and/or --pgm");
  }
  Config config = flags.build();
  Signal input = read_signal(args.input);
  dpmwf_srp_map* raw = nullptr;
  check(dpmwf_srp_compute(config.get(), input.get(), args.step, &raw),
        "srp-map");
  SrpMap map(raw);
  if (!args.csv.empty()) {
    check(dpmwf_srp_write_csv(raw, args.csv.c_str()), "writing " + args.csv);
  }
  if (!args.pgm.empty()) {
    check(dpmwf_srp_write_pgm(raw, args.pgm.c_str(), args.range_db),
          "writing " + args.pgm);
  }
  double peak = 0.0;
  check(dpmwf_srp_band_peak(raw, args.band_lo, args.band_hi, &peak), "srp-map");
  std::cout << "peak_azimuth_deg," << peak << "\n";
}

// Config files hold "key = value" lines, key being a long flag name without
// the dashes. Their values are appended after the command line, and every
// option keeps its last value, so the file wins over flags.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    }
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw Failure{DPMWF_ERR_IO, "cannot open config file " + path};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    if (trim(line).empty()) continue;
    if (eq == std::string::npos) {
      throw Failure{DPMWF_ERR_FORMAT, path + ":" + std::to_string(lineno) +
                                          ": expected key = value"};
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || key == "config") {
      throw Failure{DPMWF_ERR_FORMAT,
                    path + ":" + std::to_string(lineno) + ": bad key"};
    }
    args.push_back("--" + key);
    args.push_back(value);
  }
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Direction-preserving multichannel Wiener filter"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_version_flag("--version", std::string(dpmwf_version()));

  std::string config_path;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_path,
                    "key = value file; its values override flags");
  };

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "render a random room scene");
  simulate->add_option("--out-dir", sim.out_dir, "output directory")->required();
  simulate->add_option("--scene", sim.scene_path, "scene file to render");
  simulate->add_option("--seed", sim.seed, "scene and source seed")
      ->capture_default_str();
  simulate->add_option("--duration", sim.duration, "seconds")
      ->capture_default_str();
  simulate->add_option("--snr", sim.snr, "override the scene SNR (dB)");
  simulate->add_option("--max-order", sim.max_order, "image-source order");
  simulate->add_option("--speech", sim.speech, "speech source WAV");
  simulate->add_option("--noise", sim.noises, "noise source WAV, one per source")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  simulate->add_flag("--synthetic", sim.synthetic,
                     "use generated speech and noise");
  add_config(simulate);

  ConfigFlags enhance_flags, export_flags, eval_flags, srp_flags;

  EnhanceArgs enh;
  auto* enhance = app.add_subcommand("enhance", "apply the DP-MWF");
  enhance->add_option("--mixture", enh.mixture, "mixture WAV")->required();
  enhance->add_option("--noise-wav", enh.noise_wav, "noise-only WAV (oracle)");
  enhance->add_option("--cholesky", enh.cholesky, "noise Cholesky file");
  enhance->add_option("--output", enh.output, "enhanced WAV")->required();
  enhance->add_option("--report", enh.report, "JSON report path");
  enhance_flags.add_to(enhance);
  add_config(enhance);

  ExportArgs exp;
  auto* export_cmd = app.add_subcommand(
      "export-cholesky", "write the oracle noise factor as an interchange file");
  export_cmd->add_option("--mixture", exp.mixture, "mixture WAV")->required();
  export_cmd->add_option("--noise-wav", exp.noise_wav, "noise WAV")->required();
  export_cmd->add_option("--output", exp.output, "Cholesky file")->required();
  export_flags.add_to(export_cmd);
  add_config(export_cmd);

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "compute metrics as CSV");
  evaluate->add_option("--enhanced", ev.enhanced, "enhanced WAV")->required();
  evaluate->add_option("--clean", ev.clean, "clean speech WAV")->required();
  evaluate->add_option("--noise", ev.noise, "noise WAV")->required();
  evaluate->add_option("--mixture", ev.mixture,
                       "stored mixture WAV (default: clean + noise)");
  evaluate->add_option("--cholesky", ev.cholesky, "estimated Cholesky file");
  evaluate->add_option("--scene", ev.scene, "scene file (target azimuth)");
  evaluate->add_option("--target-azimuth", ev.target_azimuth, "degrees");
  evaluate->add_option("--output", ev.output, "metrics CSV")->required();
  eval_flags.add_to(evaluate);
  add_config(evaluate);

  SrpArgs srp;
  auto* srp_cmd = app.add_subcommand("srp-map", "steered response power map");
  srp_cmd->add_option("--input", srp.input, "multichannel WAV")->required();
  srp_cmd->add_option("--csv", srp.csv, "CSV output");
  srp_cmd->add_option("--pgm", srp.pgm, "PGM image output");
  srp_cmd->add_option("--step", srp.step, "azimuth step (deg)")
      ->capture_default_str();
  srp_cmd->add_option("--range-db", srp.range_db, "PGM dynamic range")
      ->capture_default_str();
  srp_cmd->add_option("--band-lo", srp.band_lo, "peak band low edge (Hz)")
      ->capture_default_str();
  srp_cmd->add_option("--band-hi", srp.band_hi, "peak band high edge (Hz)")
      ->capture_default_str();
  srp_flags.add_to(srp_cmd);
  add_config(srp_cmd);

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config(std::move(args));
    std::reverse(args.begin(), args.end());  // CLI11 consumes from the back
    try {
      app.parse(args);
    } catch (const CLI::ParseError& e) {
      const int rc = app.exit(e);
      return rc == 0 ? kOk : kUsage;
    }
    if (simulate->parsed()) {
      run_simulate(sim);
    } else if (enhance->parsed()) {
      run_enhance(enh, enhance_flags);
    } else if (export_cmd->parsed()) {
      run_export(exp, export_flags);
    } else if (evaluate->parsed()) {
      run_evaluate(ev, eval_flags);
    } else if (srp_cmd->parsed()) {
      run_srp(srp, srp_flags);
    }
  } catch (const Failure& f) {
    std::cerr << "dpmwf: " << f.message << "\n";
    return exit_code(f.status);
  } catch (const std::exception& e) {
    std::cerr << "dpmwf: " << e.what() << "\n";
    return kInternal;
  }
  return kOk;
}
