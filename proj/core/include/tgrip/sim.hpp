#pragma once

#include <string>
#include <vector>

#include "tgrip/runner.hpp"

namespace tgrip {

// Parametric object held between two sensorized fingers.
struct SimObject {
  double width_free_m = 0.03;    // width before any compression
  double softness = 40.0;        // imprint intensity per m of compression
  double hold_per_m = 2000.0;    // holding capacity per m of compression
  double load_force = 5.0;       // resistance the task has to overcome
  double detach_travel_m = 0.01; // successful pull distance to complete
  double fragile_limit = 1.0;    // compression fraction that counts as damage
  double escape_slip_px = 32.0;  // blob offset at which the object is lost

  void validate() const;
};

// Render and contact-model knobs shared by the presets.
struct SimParams {
  std::uint16_t sensor_h = 64;
  std::uint16_t sensor_w = 64;
  double noise_sigma = 0.005;        // per-pixel Gaussian, [0,1] units
  double blob_radius_base_px = 2.5;
  double blob_radius_gain_px = 30.0; // radius growth per unit imprint
  double slip_gain_px = 0.25;        // blob shift per force-unit deficit/step
  double reseat_decay = 0.5;         // slip multiplier per reverse step
  double dt_s = 1.0 / 30.0;

  void validate() const;
};

struct Scenario {
  std::string name;
  SimObject object;
  SimParams params;
  double start_width_m = 0.0;  // 0 = object width + 3 mm

  void validate() const;
};

// Built-in presets named after the objects the method was evaluated on:
// rough_connector, smooth_connector, egg, glass, tomato, white_grape,
// black_grape. Parameters are synthetic, tuned so the relative difficulty
// ordering of the presets matches the reported experiments.
const std::vector<std::string>& scenario_names();
Scenario scenario_preset(const std::string& name);

// Same key/value text schema as RunConfig, with scenario keys (see README).
Scenario scenario_from_file(const std::string& path);

// Physics-lite closed-loop world: gripper kinematics, a stick/slip contact
// model, and synthetic tactile frames (baseline texture + Gaussian noise +
// a radial contact blob that grows with compression and shifts with slip).
//
// Rendering is a pure function of (seed, step, world state); stepping the
// world only advances state, so a (seed, command sequence) pair always
// reproduces the same trajectory and frames.
class Simulator {
 public:
  Simulator(const Scenario& scenario, std::uint64_t seed);

  FramePair render_frames() const;
  void apply(const GripperCommand& grip, const MotionCommand& motion);
  EnvFeedback feedback() const;

  // Ground truth for tests and reports.
  double gripper_width_m() const { return width_m_; }
  double compression_m() const;
  double holding_capacity() const;
  double slip_offset_px(SensorId sensor) const {
    return slip_px_[static_cast<int>(sensor)];
  }
  double task_pos_m() const { return task_pos_m_; }
  double pull_progress_m() const { return pull_progress_m_; }
  bool damaged() const { return damaged_; }
  bool object_lost() const;
  bool task_complete() const { return task_complete_; }
  std::uint32_t step_count() const { return step_; }
  const Scenario& scenario() const { return scenario_; }

 private:
  double blob_value(int s, int i, int j, double imprint) const;

  Scenario scenario_;
  std::uint64_t seed_ = 0;
  std::uint32_t step_ = 0;
  double width_m_ = 0.0;
  bool at_min_ = false;
  double task_pos_m_ = 0.0;
  double pull_progress_m_ = 0.0;
  double slip_px_[2] = {0.0, 0.0};
  bool task_complete_ = false;
  bool damaged_ = false;
};

// FrameSource/ActuationSink adapters over one shared Simulator.
class SimFrameSource : public FrameSource {
 public:
  explicit SimFrameSource(Simulator& sim) : sim_(&sim) {}
  std::optional<FramePair> next() override { return sim_->render_frames(); }

 private:
  Simulator* sim_;
};

class SimActuation : public ActuationSink {
 public:
  explicit SimActuation(Simulator& sim) : sim_(&sim) {}
  EnvFeedback apply(const GripperCommand& grip,
                    const MotionCommand& motion) override {
    sim_->apply(grip, motion);
    return sim_->feedback();
  }
  EnvFeedback current() const override { return sim_->feedback(); }

 private:
  Simulator* sim_;
};

// Runs the full closed loop on a scenario. The seed in `config` is the one
// used; config.scenario is only echoed into the report.
RunReport simulate_run(const RunConfig& config, const Scenario& scenario,
                       const FrameObserver& observer = {});

}  // namespace tgrip
