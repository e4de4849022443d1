#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "tgrip/fsm.hpp"

namespace tgrip {

// Run parameters. Defaults follow the experimental setup the method was
// reported with: detection threshold 0.01, 100 calibration frames, 10
// reference frames, 0.001 m tighten steps, 0.0015 m/s closing speed.
//
// Text schema: one `key = value` per line, `#` starts a comment. Keys match
// the field names below. Unknown keys are errors.
struct RunConfig {
  double detect_threshold_init = 0.01;
  int calib_frames = 100;
  int ref_frames = 10;
  double tighten_delta_m = 0.001;
  double close_speed_mps = 0.0015;
  double task_speed_mps = 0.0015;
  bool reverse_on_slip = true;
  bool react_to_slip = true;
  int timeout_steps = 10000;
  double dt_s = 1.0 / 30.0;
  std::uint64_t seed = 0;
  double start_width_m = 0.0;  // 0 = use the scenario default
  std::string scenario;        // preset name
  std::string archive;         // replay source path

  void validate() const;

  DetectorConfig detector_config() const;
  FsmConfig fsm_config() const;

  // Applies `key = value` lines from a stream/file on top of the current
  // values. Throws ConfigError on unknown keys or unparsable values.
  void merge_stream(std::istream& in, const std::string& origin);
  void merge_file(const std::string& path);
  void set(const std::string& key, const std::string& value);
};

}  // namespace tgrip
