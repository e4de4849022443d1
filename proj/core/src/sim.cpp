#include "tgrip/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>

namespace tgrip {
namespace {

constexpr double kChannelScale[3] = {0.95, 1.0, 1.05};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double to_unit_open(std::uint64_t bits) {
  // (0,1), never exactly 0 or 1.
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Stateless Gaussian draw keyed on (seed, sensor, step, pixel); rendering
// stays a pure function of the world state.
double gaussian_noise(std::uint64_t seed, int sensor, std::uint32_t step,
                      std::uint32_t pixel) {
  std::uint64_t k = splitmix64(seed ^ (0x632BE59BD9B4E019ULL *
                                       static_cast<std::uint64_t>(sensor + 1)));
  k = splitmix64(k ^ static_cast<std::uint64_t>(step));
  k = splitmix64(k ^ (0x9E3779B97F4A7C15ULL * (pixel + 1ULL)));
  const double u1 = to_unit_open(k);
  const double u2 = to_unit_open(splitmix64(k));
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

double baseline(int sensor, int i, int j, int h, int w) {
  const double phase = sensor == 0 ? 0.0 : 1.3;
  return 0.42 + 0.06 * std::sin(2.0 * std::numbers::pi * j / w + phase) *
                    std::cos(2.0 * std::numbers::pi * i / h);
}

Scenario make_preset(const std::string& name, double width, double softness,
                     double hold_per_m, double load, double detach,
                     double fragile) {
  Scenario sc;
  sc.name = name;
  sc.object.width_free_m = width;
  sc.object.softness = softness;
  sc.object.hold_per_m = hold_per_m;
  sc.object.load_force = load;
  sc.object.detach_travel_m = detach;
  sc.object.fragile_limit = fragile;
  return sc;
}

const std::map<std::string, Scenario>& preset_map() {
  static const std::map<std::string, Scenario> presets = [] {
    std::map<std::string, Scenario> m;
    // width, softness, hold/m, load, detach travel, fragile limit.
    // Loads are spaced so the required compression, and with it the number
    // of tighten cycles, falls off from the rough connector to the glass.
    m["rough_connector"] =
        make_preset("rough_connector", 0.024, 60.0, 2000.0, 10.6, 0.012, 1.0);
    m["smooth_connector"] =
        make_preset("smooth_connector", 0.048, 60.0, 2000.0, 6.6, 0.010, 1.0);
    m["egg"] = make_preset("egg", 0.045, 45.0, 2000.0, 3.2, 0.006, 0.12);
    m["glass"] = make_preset("glass", 0.060, 50.0, 2000.0, 1.0, 0.006, 0.10);
    m["tomato"] = make_preset("tomato", 0.055, 20.0, 1500.0, 3.1, 0.006, 0.20);
    m["white_grape"] =
        make_preset("white_grape", 0.018, 14.0, 1200.0, 5.7, 0.005, 0.55);
    m["black_grape"] =
        make_preset("black_grape", 0.018, 16.0, 1200.0, 6.2, 0.005, 0.55);
    return m;
  }();
  return presets;
}

}  // namespace

void SimObject::validate() const {
  if (!(width_free_m > 0.0) || !(softness > 0.0) || !(hold_per_m > 0.0) ||
      !(load_force > 0.0) || !(detach_travel_m > 0.0) ||
      !(escape_slip_px > 0.0)) {
    throw ConfigError("sim object parameters must all be positive");
  }
  if (!(fragile_limit > 0.0 && fragile_limit <= 1.0)) {
    throw ConfigError("fragile_limit must be in (0,1]");
  }
}

void SimParams::validate() const {
  if (sensor_h < 1 || sensor_w < 1) {
    throw ConfigError("sensor dimensions must be >= 1");
  }
  if (noise_sigma < 0.0 || noise_sigma > 1.0) {
    throw ConfigError("noise_sigma must be in [0,1]");
  }
  if (!(blob_radius_base_px > 0.0) || blob_radius_gain_px < 0.0 ||
      slip_gain_px < 0.0) {
    throw ConfigError("bad blob/slip parameters");
  }
  if (!(reseat_decay >= 0.0 && reseat_decay < 1.0)) {
    throw ConfigError("reseat_decay must be in [0,1)");
  }
  if (!(dt_s > 0.0)) {
    throw ConfigError("dt_s must be positive");
  }
}

void Scenario::validate() const {
  object.validate();
  params.validate();
  if (start_width_m != 0.0 && start_width_m <= object.width_free_m) {
    throw ConfigError("start_width_m must leave the gripper open wider than "
                      "the object");
  }
}

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [name, sc] : preset_map()) {
      v.push_back(name);
    }
    return v;
  }();
  return names;
}

Scenario scenario_preset(const std::string& name) {
  const auto& presets = preset_map();
  const auto it = presets.find(name);
  if (it == presets.end()) {
    std::string known;
    for (const auto& n : scenario_names()) {
      known += known.empty() ? n : ", " + n;
    }
    throw ConfigError("unknown scenario '" + name + "' (known: " + known + ")");
  }
  return it->second;
}

Scenario scenario_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open scenario file '" + path + "'");
  }
  Scenario sc;
  sc.name = path;
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw ConfigError(path + ":" + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) {
      line.resize(hash);
    }
    const auto notspace = [](unsigned char c) { return !std::isspace(c); };
    const auto b = std::find_if(line.begin(), line.end(), notspace);
    const auto e = std::find_if(line.rbegin(), line.rend(), notspace).base();
    if (b >= e) {
      continue;
    }
    const std::string entry(b, e);
    const std::size_t eq = entry.find('=');
    if (eq == std::string::npos) {
      fail("expected 'key = value'");
    }
    auto trim = [](std::string s) {
      const auto nb = s.find_first_not_of(" \t");
      const auto ne = s.find_last_not_of(" \t");
      return nb == std::string::npos ? std::string()
                                     : s.substr(nb, ne - nb + 1);
    };
    const std::string key = trim(entry.substr(0, eq));
    const std::string value = trim(entry.substr(eq + 1));
    try {
      if (key == "name") {
        sc.name = value;
      } else if (key == "width_free_m") {
        sc.object.width_free_m = std::stod(value);
      } else if (key == "softness") {
        sc.object.softness = std::stod(value);
      } else if (key == "hold_per_m") {
        sc.object.hold_per_m = std::stod(value);
      } else if (key == "load_force") {
        sc.object.load_force = std::stod(value);
      } else if (key == "detach_travel_m") {
        sc.object.detach_travel_m = std::stod(value);
      } else if (key == "fragile_limit") {
        sc.object.fragile_limit = std::stod(value);
      } else if (key == "escape_slip_px") {
        sc.object.escape_slip_px = std::stod(value);
      } else if (key == "sensor_h") {
        sc.params.sensor_h = static_cast<std::uint16_t>(std::stoi(value));
      } else if (key == "sensor_w") {
        sc.params.sensor_w = static_cast<std::uint16_t>(std::stoi(value));
      } else if (key == "noise_sigma") {
        sc.params.noise_sigma = std::stod(value);
      } else if (key == "blob_radius_base_px") {
        sc.params.blob_radius_base_px = std::stod(value);
      } else if (key == "blob_radius_gain_px") {
        sc.params.blob_radius_gain_px = std::stod(value);
      } else if (key == "slip_gain_px") {
        sc.params.slip_gain_px = std::stod(value);
      } else if (key == "reseat_decay") {
        sc.params.reseat_decay = std::stod(value);
      } else if (key == "dt_s") {
        sc.params.dt_s = std::stod(value);
      } else if (key == "start_width_m") {
        sc.start_width_m = std::stod(value);
      } else {
        fail("unknown scenario key '" + key + "'");
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      fail("bad value for '" + key + "': '" + value + "'");
    }
  }
  sc.validate();
  return sc;
}

Simulator::Simulator(const Scenario& scenario, std::uint64_t seed)
    : scenario_(scenario), seed_(seed) {
  scenario_.validate();
  width_m_ = scenario_.start_width_m != 0.0
                 ? scenario_.start_width_m
                 : scenario_.object.width_free_m + 0.003;
}

double Simulator::compression_m() const {
  return std::max(0.0, scenario_.object.width_free_m - width_m_);
}

double Simulator::holding_capacity() const {
  return scenario_.object.hold_per_m * compression_m();
}

bool Simulator::object_lost() const {
  return std::max(slip_px_[0], slip_px_[1]) >= scenario_.object.escape_slip_px;
}

double Simulator::blob_value(int s, int i, int j, double imprint) const {
  const SimParams& p = scenario_.params;
  const double ci = (p.sensor_h - 1) / 2.0 + slip_px_[s];
  const double cj = (p.sensor_w - 1) / 2.0;
  const double di = i - ci;
  const double dj = j - cj;
  const double depth = std::min(1.0, imprint);
  const double rho = p.blob_radius_base_px + p.blob_radius_gain_px * depth;
  return depth * std::exp(-(di * di + dj * dj) / (rho * rho));
}

FramePair Simulator::render_frames() const {
  const SimParams& p = scenario_.params;
  const int h = p.sensor_h;
  const int w = p.sensor_w;
  const double imprint = scenario_.object.softness * compression_m();

  FramePair out{TactileFrame{SensorId::S1, step_, ImageRgb(p.sensor_h, p.sensor_w)},
                TactileFrame{SensorId::S2, step_, ImageRgb(p.sensor_h, p.sensor_w)}};

  for (int s = 0; s < 2; ++s) {
    ImageRgb& img = (s == 0 ? out.first : out.second).pixels;
    std::uint32_t pixel = 0;
    for (int i = 0; i < h; ++i) {
      for (int j = 0; j < w; ++j, ++pixel) {
        const double base = baseline(s, i, j, h, w);
        const double blob = imprint > 0.0 ? blob_value(s, i, j, imprint) : 0.0;
        const double noise =
            p.noise_sigma > 0.0
                ? p.noise_sigma * gaussian_noise(seed_, s, step_, pixel)
                : 0.0;
        for (int c = 0; c < 3; ++c) {
          const double v = base * kChannelScale[c] + blob + noise;
          img.at(i, j, c) = std::clamp(v, 0.0, 1.0);
        }
      }
    }
  }
  return out;
}

void Simulator::apply(const GripperCommand& grip, const MotionCommand& motion) {
  const SimObject& obj = scenario_.object;
  const SimParams& p = scenario_.params;

  switch (grip.kind) {
    case GripperCommand::Kind::Close:
      width_m_ -= grip.speed_mps * p.dt_s;
      break;
    case GripperCommand::Kind::Tighten:
      width_m_ -= grip.delta_m;
      break;
    case GripperCommand::Kind::Hold:
      break;
  }
  if (width_m_ <= 0.0) {
    width_m_ = 0.0;
    at_min_ = true;
  }

  const double compression = compression_m();
  if (compression / obj.width_free_m > obj.fragile_limit) {
    damaged_ = true;
  }

  switch (motion.kind) {
    case MotionCommand::Kind::Task: {
      task_pos_m_ += motion.speed_mps * p.dt_s;
      if (compression > 0.0) {
        const double capacity = obj.hold_per_m * compression;
        if (capacity >= obj.load_force) {
          // Grasp holds: the object moves with the gripper.
          pull_progress_m_ += motion.speed_mps * p.dt_s;
          if (pull_progress_m_ >= obj.detach_travel_m) {
            task_complete_ = true;
          }
        } else {
          // Grasp slips: the gripper moves, the object stays.
          const double deficit = obj.load_force - capacity;
          slip_px_[0] += p.slip_gain_px * deficit;
          slip_px_[1] += p.slip_gain_px * deficit;
        }
      }
      break;
    }
    case MotionCommand::Kind::Reverse: {
      task_pos_m_ = std::max(0.0, task_pos_m_ - motion.speed_mps * p.dt_s);
      // Moving back against the task resistance re-seats the object.
      for (double& s : slip_px_) {
        s *= p.reseat_decay;
        if (s < 0.25) {
          s = 0.0;
        }
      }
      break;
    }
    case MotionCommand::Kind::Idle:
      break;
  }

  ++step_;
}

EnvFeedback Simulator::feedback() const {
  EnvFeedback env;
  env.gripper_width_m = width_m_;
  env.gripper_at_min = at_min_;
  env.task_pos_m = task_pos_m_;
  env.task_complete = task_complete_;
  env.object_lost = object_lost();
  env.damaged = damaged_;
  return env;
}

RunReport simulate_run(const RunConfig& config, const Scenario& scenario,
                       const FrameObserver& observer) {
  Scenario sc = scenario;
  if (config.start_width_m != 0.0) {
    sc.start_width_m = config.start_width_m;
  }
  sc.params.dt_s = config.dt_s;
  Simulator sim(sc, config.seed);
  SimFrameSource source(sim);
  SimActuation sink(sim);
  RunConfig cfg = config;
  cfg.scenario = sc.name;
  return run_to_completion(cfg, source, sink, observer);
}

}  // namespace tgrip
