#pragma once

#include <array>
#include <optional>
#include <vector>

#include "tgrip/detector.hpp"

namespace tgrip {

// The seven-state manipulation algorithm plus terminal states:
//   S1 BuildRefEmpty    average N frames per sensor into the empty reference
//   S2 CloseUntilTouch  close the gripper until BOTH sensors report touch
//   S3 BuildRefHolding  re-reference while holding the object
//   S4 Manipulate       task motion; slip watch on EITHER sensor
//   S5 Reverse          undo the motion back to the pre-slip waypoint
//   S6 Tighten          close the grasp by one tighten step
//   S7 RaiseThreshold   double the threshold scale, then back to S3
// Detection runs only in S2 and S4.
enum class ManipPhase : std::uint8_t {
  BuildRefEmpty,
  CloseUntilTouch,
  BuildRefHolding,
  Manipulate,
  Reverse,
  Tighten,
  RaiseThreshold,
  Done,
  Failed,
};

enum class Outcome : std::uint8_t {
  Success,
  ObjectLost,
  GripperExhausted,
  Timeout,
};

const char* to_string(ManipPhase phase);
const char* to_string(Outcome outcome);

struct GripperCommand {
  enum class Kind : std::uint8_t { Hold, Close, Tighten };

  Kind kind = Kind::Hold;
  double speed_mps = 0.0;  // Close
  double delta_m = 0.0;    // Tighten

  static GripperCommand hold() { return {}; }
  static GripperCommand close(double speed_mps);
  static GripperCommand tighten(double delta_m);
};

struct MotionCommand {
  enum class Kind : std::uint8_t { Idle, Task, Reverse };

  Kind kind = Kind::Idle;
  std::array<double, 3> direction{0.0, 0.0, 1.0};  // unit norm for Task
  double speed_mps = 0.0;

  static MotionCommand idle() { return {}; }
  static MotionCommand task(const std::array<double, 3>& direction,
                            double speed_mps);
  static MotionCommand reverse(double speed_mps);
};

// World state as seen by the FSM at the top of a step: the effect of all
// commands applied so far, before this step's commands.
struct EnvFeedback {
  double gripper_width_m = 0.0;
  bool gripper_at_min = false;
  double task_pos_m = 0.0;
  bool task_complete = false;
  bool object_lost = false;
  bool damaged = false;
};

struct FsmConfig {
  DetectorConfig detector;
  double close_speed_mps = 0.0015;
  double tighten_delta_m = 0.001;
  double task_speed_mps = 0.0015;
  std::array<double, 3> task_direction{0.0, 0.0, 1.0};
  bool reverse_on_slip = true;  // skip S5 for non-contact-rich tasks
  bool react_to_slip = true;    // false: log slip events but keep moving

  void validate() const;
};

struct TraceEntry {
  std::uint32_t step = 0;
  ManipPhase phase = ManipPhase::BuildRefEmpty;

  bool operator==(const TraceEntry&) const = default;
};

// Drives two calibrated per-sensor detectors through the manipulation
// algorithm, one frame pair per step. The detection threshold in force is
// always threshold_scale * detect_threshold_init, and the scale doubles on
// every completed slip reaction.
class ManipFsm {
 public:
  struct Commands {
    GripperCommand grip;
    MotionCommand motion;
  };

  // Detectors must be past calibration (BuildingReference phase).
  ManipFsm(const FsmConfig& config, ChangeDetector sensor1,
           ChangeDetector sensor2);

  Commands step(const TactileFrame& f1, const TactileFrame& f2,
                const EnvFeedback& env);

  // Terminates the run from outside (step budget, frame source exhausted).
  void abort_run(Outcome outcome);

  bool terminal() const {
    return phase_ == ManipPhase::Done || phase_ == ManipPhase::Failed;
  }
  ManipPhase phase() const { return phase_; }
  double threshold_scale() const { return threshold_scale_; }
  double detect_threshold() const {
    return threshold_scale_ * config_.detector.detect_threshold_init;
  }
  std::uint32_t slip_count() const { return slip_count_; }
  std::uint32_t steps() const { return step_; }
  Outcome outcome() const;
  std::optional<double> width_at_touch() const { return width_at_touch_; }
  const std::vector<TraceEntry>& trace() const { return trace_; }
  const std::vector<DetectionEvent>& events() const { return events_; }
  const ChangeDetector& detector(SensorId sensor) const;

 private:
  void transition(ManipPhase next);
  void fail(Outcome outcome);

  FsmConfig config_;
  ChangeDetector det1_;
  ChangeDetector det2_;

  ManipPhase phase_ = ManipPhase::BuildRefEmpty;
  double threshold_scale_ = 1.0;  // doubles on every slip reaction
  std::uint32_t slip_count_ = 0;
  std::uint32_t step_ = 0;

  std::array<bool, 2> touch_latched_{false, false};
  std::optional<double> width_at_touch_;
  double waypoint_m_ = 0.0;
  bool need_waypoint_ = false;

  std::optional<Outcome> outcome_;
  std::vector<TraceEntry> trace_;
  std::vector<DetectionEvent> events_;
};

}  // namespace tgrip
