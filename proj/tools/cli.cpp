#include "cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <future>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "tgrip/archive.hpp"
#include "tgrip/report.hpp"
#include "tgrip/sim.hpp"

namespace tgrip {
namespace {

struct CommonOpts {
  std::string config_path;
  RunConfig config;
  std::optional<int> calib_frames_flag;
  std::optional<double> detect_threshold_flag;

  // Layering: defaults -> TGRIP_CONFIG -> --config -> explicit flags.
  void load() {
    if (!config_path.empty()) {
      config.merge_file(config_path);
    } else if (const char* env = std::getenv("TGRIP_CONFIG")) {
      if (*env != '\0') {
        config.merge_file(env);
      }
    }
    if (calib_frames_flag) {
      config.calib_frames = *calib_frames_flag;
    }
    if (detect_threshold_flag) {
      config.detect_threshold_init = *detect_threshold_flag;
    }
  }
};

std::string event_to_json(const DetectionEvent& e) {
  nlohmann::ordered_json j;
  j["t"] = e.t;
  j["sensor"] = to_string(e.sensor);
  j["kind"] = to_string(e.kind);
  j["ratio"] = e.ratio;
  j["threshold"] = e.threshold;
  return j.dump();
}

void write_lines(const std::vector<std::string>& lines,
                 const std::string& out_path, std::ostream& out) {
  if (out_path.empty()) {
    for (const auto& line : lines) {
      out << line << "\n";
    }
    return;
  }
  std::ofstream f(out_path, std::ios::trunc);
  if (!f) {
    throw ConfigError("cannot open output file '" + out_path + "'");
  }
  for (const auto& line : lines) {
    f << line << "\n";
  }
}

int run_calibrate(const std::string& archive_path, CommonOpts& opts,
                  std::ostream& out) {
  opts.load();
  opts.config.validate();
  const FrameArchive archive = read_archive(archive_path);
  const int needed = opts.config.calib_frames + 1;
  if (static_cast<int>(archive.frame_count()) < needed) {
    throw ConfigError("archive has " + std::to_string(archive.frame_count()) +
                      " frames per sensor, calibration needs " +
                      std::to_string(needed));
  }
  for (std::uint8_t s = 0; s < archive.sensor_count; ++s) {
    ChangeDetector det(static_cast<SensorId>(s),
                       opts.config.detector_config());
    for (int t = 0; t < needed; ++t) {
      det.calibrate_step(archive.frame(static_cast<std::uint32_t>(t), s));
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s %.9g",
                  to_string(static_cast<SensorId>(s)), det.noise_threshold());
    out << buf << "\n";
  }
  return 0;
}

int run_detect(const std::string& archive_path, CommonOpts& opts,
               const std::string& out_path, std::ostream& out) {
  opts.load();
  opts.config.validate();
  const FrameArchive archive = read_archive(archive_path);
  const DetectorConfig det_cfg = opts.config.detector_config();
  const double threshold = det_cfg.detect_threshold_init;

  std::vector<ChangeDetector> detectors;
  for (std::uint8_t s = 0; s < archive.sensor_count; ++s) {
    detectors.emplace_back(static_cast<SensorId>(s), det_cfg);
  }

  std::vector<std::string> lines;
  for (std::uint32_t t = 0; t < archive.frame_count(); ++t) {
    for (std::uint8_t s = 0; s < archive.sensor_count; ++s) {
      ChangeDetector& det = detectors[s];
      const TactileFrame& frame = archive.frame(t, s);
      switch (det.phase()) {
        case DetectPhase::Calibrating:
          det.calibrate_step(frame);
          break;
        case DetectPhase::BuildingReference:
          det.reference_step(frame);
          break;
        case DetectPhase::Armed:
          if (auto ev = det.detect_step(frame, threshold)) {
            lines.push_back(event_to_json(*ev));
            if (ev->kind == ChangeKind::Touch) {
              det.rearm_for_slip();
            }
          }
          break;
      }
    }
  }
  write_lines(lines, out_path, out);
  return 0;
}

int run_simulate(CommonOpts& opts, const std::string& scenario_flag,
                 const std::string& scenario_file,
                 std::optional<std::uint64_t> seed_flag, int repeat,
                 const std::string& out_path, const std::string& dump_path,
                 std::ostream& out) {
  opts.load();
  if (seed_flag) {
    opts.config.seed = *seed_flag;
  }
  if (!scenario_flag.empty()) {
    opts.config.scenario = scenario_flag;
  }
  opts.config.validate();

  Scenario scenario;
  if (!scenario_file.empty()) {
    scenario = scenario_from_file(scenario_file);
  } else if (!opts.config.scenario.empty()) {
    scenario = scenario_preset(opts.config.scenario);
  } else {
    throw ConfigError("no scenario given (--scenario, --scenario-file, or "
                      "config key)");
  }
  if (repeat < 1) {
    throw ConfigError("--repeat must be >= 1");
  }
  if (!dump_path.empty() && repeat != 1) {
    throw ConfigError("--dump-frames only works with a single run");
  }

  std::vector<std::string> lines(static_cast<std::size_t>(repeat));
  if (repeat == 1) {
    ArchiveRecorder recorder;
    RunReport report = simulate_run(
        opts.config, scenario,
        dump_path.empty() ? FrameObserver{} : recorder.observer());
    if (!dump_path.empty()) {
      write_archive(recorder.finish(), dump_path);
    }
    lines[0] = report_to_json(report);
  } else {
    // Independent seeds run in parallel; output stays in seed order.
    std::vector<std::future<std::string>> futures;
    futures.reserve(static_cast<std::size_t>(repeat));
    for (int i = 0; i < repeat; ++i) {
      RunConfig cfg = opts.config;
      cfg.seed = opts.config.seed + static_cast<std::uint64_t>(i);
      futures.push_back(std::async(std::launch::async, [cfg, scenario] {
        return report_to_json(simulate_run(cfg, scenario));
      }));
    }
    for (int i = 0; i < repeat; ++i) {
      lines[static_cast<std::size_t>(i)] = futures[static_cast<std::size_t>(i)].get();
    }
  }
  write_lines(lines, out_path, out);
  return 0;
}

int run_replay(const std::string& archive_path, CommonOpts& opts,
               const std::string& out_path, std::ostream& out) {
  opts.load();
  opts.config.validate();
  ArchiveFrameSource source(read_archive(archive_path));
  const double start_width =
      opts.config.start_width_m != 0.0 ? opts.config.start_width_m : 0.03;
  LogActuation sink(start_width, opts.config.dt_s);
  RunConfig cfg = opts.config;
  if (cfg.scenario.empty()) {
    cfg.scenario = "replay";
  }
  cfg.archive = archive_path;
  RunReport report = run_to_completion(cfg, source, sink);
  write_lines({report_to_json(report)}, out_path, out);
  return 0;
}

int run_report(const std::vector<std::string>& files, std::ostream& out) {
  std::vector<RunReport> reports;
  for (const std::string& path : files) {
    std::ifstream in(path);
    if (!in) {
      throw ConfigError("cannot open report file '" + path + "'");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    for (RunReport& r : reports_from_lines(buffer.str())) {
      reports.push_back(std::move(r));
    }
  }
  if (reports.empty()) {
    throw ConfigError("no reports found in the given files");
  }
  out << format_table(aggregate(reports));
  return 0;
}

}  // namespace

int cli_run(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"touch/slip detection and adaptive-grasp toolkit for "
               "vision-based tactile sensors"};
  app.require_subcommand(1);

  CommonOpts opts;

  // calibrate
  auto* calibrate = app.add_subcommand(
      "calibrate", "Estimate per-sensor noise thresholds from an archive");
  std::string calibrate_archive;
  calibrate->add_option("archive", calibrate_archive, "TGF1 archive")
      ->required();
  calibrate->add_option("--config", opts.config_path, "config file");
  calibrate->add_option("--calib-frames", opts.calib_frames_flag,
                        "difference maxima to record");

  // detect
  auto* detect = app.add_subcommand(
      "detect", "Stream detection events from an archive as JSON lines");
  std::string detect_archive;
  std::string detect_out;
  detect->add_option("archive", detect_archive, "TGF1 archive")->required();
  detect->add_option("--config", opts.config_path, "config file");
  detect->add_option("--detect-threshold", opts.detect_threshold_flag,
                     "change ratio that fires an event");
  detect->add_option("--out", detect_out, "write events here, not stdout");

  // simulate
  auto* simulate = app.add_subcommand(
      "simulate", "Run the closed-loop manipulation in the simulator");
  std::string sim_scenario;
  std::string sim_scenario_file;
  std::string sim_out;
  std::string sim_dump;
  std::optional<std::uint64_t> sim_seed;
  int sim_repeat = 1;
  simulate->add_option("--scenario", sim_scenario, "preset name");
  simulate->add_option("--scenario-file", sim_scenario_file,
                       "scenario key/value file");
  simulate->add_option("--config", opts.config_path, "config file");
  simulate->add_option("--seed", sim_seed, "run seed");
  simulate->add_option("--repeat", sim_repeat,
                       "independent runs with seeds seed, seed+1, ...");
  simulate->add_option("--out", sim_out, "write report lines here");
  simulate->add_option("--dump-frames", sim_dump,
                       "dump consumed frames to a TGF1 archive");

  // replay
  auto* replay = app.add_subcommand(
      "replay", "Drive the manipulation FSM from recorded frames");
  std::string replay_archive;
  std::string replay_out;
  replay->add_option("archive", replay_archive, "2-sensor TGF1 archive")
      ->required();
  replay->add_option("--config", opts.config_path, "config file");
  replay->add_option("--out", replay_out, "write the report line here");

  // report
  auto* report = app.add_subcommand(
      "report", "Aggregate run reports into a mean ± std table");
  std::vector<std::string> report_files;
  report->add_option("files", report_files, "report files (JSON lines)")
      ->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (calibrate->parsed()) {
      return run_calibrate(calibrate_archive, opts, out);
    }
    if (detect->parsed()) {
      return run_detect(detect_archive, opts, detect_out, out);
    }
    if (simulate->parsed()) {
      return run_simulate(opts, sim_scenario, sim_scenario_file, sim_seed,
                          sim_repeat, sim_out, sim_dump, out);
    }
    if (replay->parsed()) {
      return run_replay(replay_archive, opts, replay_out, out);
    }
    if (report->parsed()) {
      return run_report(report_files, out);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace tgrip
