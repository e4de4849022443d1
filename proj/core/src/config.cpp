#include "tgrip/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tgrip {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) {
    ++b;
  }
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) {
    --e;
  }
  return s.substr(b, e - b);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) {
      throw std::invalid_argument(value);
    }
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad numeric value for " + key + ": '" + value + "'");
  }
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(value, &pos);
    if (pos != value.size()) {
      throw std::invalid_argument(value);
    }
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad integer value for " + key + ": '" + value + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(value, &pos);
    if (pos != value.size()) {
      throw std::invalid_argument(value);
    }
    return static_cast<std::uint64_t>(v);
  } catch (const std::exception&) {
    throw ConfigError("bad integer value for " + key + ": '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") {
    return true;
  }
  if (value == "false" || value == "0" || value == "no" || value == "off") {
    return false;
  }
  throw ConfigError("bad boolean value for " + key + ": '" + value + "'");
}

}  // namespace

void RunConfig::validate() const {
  detector_config().validate();
  fsm_config().validate();
  if (timeout_steps < 1) {
    throw ConfigError("timeout_steps must be >= 1");
  }
  if (!(dt_s > 0.0)) {
    throw ConfigError("dt_s must be positive");
  }
  if (start_width_m < 0.0) {
    throw ConfigError("start_width_m must be >= 0");
  }
}

DetectorConfig RunConfig::detector_config() const {
  return DetectorConfig{detect_threshold_init, calib_frames, ref_frames};
}

FsmConfig RunConfig::fsm_config() const {
  FsmConfig fsm;
  fsm.detector = detector_config();
  fsm.close_speed_mps = close_speed_mps;
  fsm.tighten_delta_m = tighten_delta_m;
  fsm.task_speed_mps = task_speed_mps;
  fsm.reverse_on_slip = reverse_on_slip;
  fsm.react_to_slip = react_to_slip;
  return fsm;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "detect_threshold_init") {
    detect_threshold_init = parse_double(key, value);
  } else if (key == "calib_frames") {
    calib_frames = parse_int(key, value);
  } else if (key == "ref_frames") {
    ref_frames = parse_int(key, value);
  } else if (key == "tighten_delta_m") {
    tighten_delta_m = parse_double(key, value);
  } else if (key == "close_speed_mps") {
    close_speed_mps = parse_double(key, value);
  } else if (key == "task_speed_mps") {
    task_speed_mps = parse_double(key, value);
  } else if (key == "reverse_on_slip") {
    reverse_on_slip = parse_bool(key, value);
  } else if (key == "react_to_slip") {
    react_to_slip = parse_bool(key, value);
  } else if (key == "timeout_steps") {
    timeout_steps = parse_int(key, value);
  } else if (key == "dt_s") {
    dt_s = parse_double(key, value);
  } else if (key == "seed") {
    seed = parse_u64(key, value);
  } else if (key == "start_width_m") {
    start_width_m = parse_double(key, value);
  } else if (key == "scenario") {
    scenario = value;
  } else if (key == "archive") {
    archive = value;
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

void RunConfig::merge_stream(std::istream& in, const std::string& origin) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) {
      line.resize(hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": expected 'key = value', got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": empty key");
    }
    try {
      set(key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": " +
                        e.what());
    }
  }
}

void RunConfig::merge_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file '" + path + "'");
  }
  merge_stream(in, path);
}

}  // namespace tgrip
