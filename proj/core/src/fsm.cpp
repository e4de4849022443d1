#include "tgrip/fsm.hpp"

#include <cmath>
#include <string>

namespace tgrip {

const char* to_string(ManipPhase phase) {
  switch (phase) {
    case ManipPhase::BuildRefEmpty:
      return "build_ref_empty";
    case ManipPhase::CloseUntilTouch:
      return "close_until_touch";
    case ManipPhase::BuildRefHolding:
      return "build_ref_holding";
    case ManipPhase::Manipulate:
      return "manipulate";
    case ManipPhase::Reverse:
      return "reverse";
    case ManipPhase::Tighten:
      return "tighten";
    case ManipPhase::RaiseThreshold:
      return "raise_threshold";
    case ManipPhase::Done:
      return "done";
    case ManipPhase::Failed:
      return "failed";
  }
  return "?";
}

const char* to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Success:
      return "success";
    case Outcome::ObjectLost:
      return "object_lost";
    case Outcome::GripperExhausted:
      return "gripper_exhausted";
    case Outcome::Timeout:
      return "timeout";
  }
  return "?";
}

GripperCommand GripperCommand::close(double speed_mps) {
  if (!(speed_mps > 0.0)) {
    throw UsageError("close speed must be positive");
  }
  return {Kind::Close, speed_mps, 0.0};
}

GripperCommand GripperCommand::tighten(double delta_m) {
  if (!(delta_m > 0.0)) {
    throw UsageError("tighten delta must be positive");
  }
  return {Kind::Tighten, 0.0, delta_m};
}

MotionCommand MotionCommand::task(const std::array<double, 3>& direction,
                                  double speed_mps) {
  const double norm = std::sqrt(direction[0] * direction[0] +
                                direction[1] * direction[1] +
                                direction[2] * direction[2]);
  if (std::abs(norm - 1.0) > 1e-9) {
    throw UsageError("task direction must have unit norm");
  }
  if (!(speed_mps > 0.0)) {
    throw UsageError("task speed must be positive");
  }
  return {Kind::Task, direction, speed_mps};
}

MotionCommand MotionCommand::reverse(double speed_mps) {
  if (!(speed_mps > 0.0)) {
    throw UsageError("reverse speed must be positive");
  }
  return {Kind::Reverse, {0.0, 0.0, 1.0}, speed_mps};
}

void FsmConfig::validate() const {
  detector.validate();
  if (!(close_speed_mps > 0.0)) {
    throw ConfigError("close_speed_mps must be positive");
  }
  if (!(tighten_delta_m > 0.0)) {
    throw ConfigError("tighten_delta_m must be positive");
  }
  if (!(task_speed_mps > 0.0)) {
    throw ConfigError("task_speed_mps must be positive");
  }
}

ManipFsm::ManipFsm(const FsmConfig& config, ChangeDetector sensor1,
                   ChangeDetector sensor2)
    : config_(config), det1_(std::move(sensor1)), det2_(std::move(sensor2)) {
  config_.validate();
  if (det1_.sensor() != SensorId::S1 || det2_.sensor() != SensorId::S2) {
    throw UsageError("FSM expects detectors for S1 and S2, in that order");
  }
  if (det1_.phase() == DetectPhase::Calibrating ||
      det2_.phase() == DetectPhase::Calibrating) {
    throw UsageError("detectors must be calibrated before the FSM starts");
  }
  trace_.push_back({0, ManipPhase::BuildRefEmpty});
}

void ManipFsm::transition(ManipPhase next) {
  phase_ = next;
  trace_.push_back({step_, next});
}

void ManipFsm::fail(Outcome outcome) {
  outcome_ = outcome;
  transition(ManipPhase::Failed);
}

void ManipFsm::abort_run(Outcome outcome) {
  if (terminal()) {
    return;
  }
  fail(outcome);
}

Outcome ManipFsm::outcome() const {
  if (!outcome_) {
    throw UsageError("outcome requested before the run terminated");
  }
  return *outcome_;
}

const ChangeDetector& ManipFsm::detector(SensorId sensor) const {
  return sensor == SensorId::S1 ? det1_ : det2_;
}

ManipFsm::Commands ManipFsm::step(const TactileFrame& f1,
                                  const TactileFrame& f2,
                                  const EnvFeedback& env) {
  if (terminal()) {
    throw UsageError("step called on a terminated run");
  }
  if (f1.sensor != SensorId::S1 || f2.sensor != SensorId::S2) {
    throw UsageError("step expects frames for S1 and S2, in that order");
  }

  Commands out{GripperCommand::hold(), MotionCommand::idle()};

  switch (phase_) {
    case ManipPhase::BuildRefEmpty: {
      det1_.reference_step(f1);
      det2_.reference_step(f2);
      if (det1_.phase() == DetectPhase::Armed &&
          det2_.phase() == DetectPhase::Armed) {
        transition(ManipPhase::CloseUntilTouch);
      }
      break;
    }

    case ManipPhase::CloseUntilTouch: {
      // A sensor that already touched is frozen; closing continues until
      // the other one fires as well.
      if (!touch_latched_[0]) {
        if (auto ev = det1_.detect_step(f1, detect_threshold())) {
          events_.push_back(*ev);
          touch_latched_[0] = true;
        }
      }
      if (!touch_latched_[1]) {
        if (auto ev = det2_.detect_step(f2, detect_threshold())) {
          events_.push_back(*ev);
          touch_latched_[1] = true;
        }
      }
      if (touch_latched_[0] && touch_latched_[1]) {
        width_at_touch_ = env.gripper_width_m;
        det1_.rearm_for_slip();
        det2_.rearm_for_slip();
        transition(ManipPhase::BuildRefHolding);
        break;
      }
      if (env.gripper_at_min) {
        fail(Outcome::GripperExhausted);
        break;
      }
      out.grip = GripperCommand::close(config_.close_speed_mps);
      break;
    }

    case ManipPhase::BuildRefHolding: {
      det1_.reference_step(f1);
      det2_.reference_step(f2);
      if (det1_.phase() == DetectPhase::Armed &&
          det2_.phase() == DetectPhase::Armed) {
        transition(ManipPhase::Manipulate);
        need_waypoint_ = true;
      }
      break;
    }

    case ManipPhase::Manipulate: {
      if (need_waypoint_) {
        waypoint_m_ = env.task_pos_m;
        need_waypoint_ = false;
      }
      if (env.task_complete) {
        outcome_ = Outcome::Success;
        transition(ManipPhase::Done);
        break;
      }
      if (env.object_lost) {
        fail(Outcome::ObjectLost);
        break;
      }
      auto ev1 = det1_.detect_step(f1, detect_threshold());
      auto ev2 = det2_.detect_step(f2, detect_threshold());
      if (ev1) {
        events_.push_back(*ev1);
      }
      if (ev2) {
        events_.push_back(*ev2);
      }
      if ((ev1 || ev2) && config_.react_to_slip) {
        transition(config_.reverse_on_slip ? ManipPhase::Reverse
                                           : ManipPhase::Tighten);
        break;
      }
      out.motion =
          MotionCommand::task(config_.task_direction, config_.task_speed_mps);
      break;
    }

    case ManipPhase::Reverse: {
      if (env.task_pos_m <= waypoint_m_ + 1e-12) {
        transition(ManipPhase::Tighten);
        break;
      }
      out.motion = MotionCommand::reverse(config_.task_speed_mps);
      break;
    }

    case ManipPhase::Tighten: {
      out.grip = GripperCommand::tighten(config_.tighten_delta_m);
      transition(ManipPhase::RaiseThreshold);
      break;
    }

    case ManipPhase::RaiseThreshold: {
      threshold_scale_ *= 2.0;
      slip_count_ += 1;
      det1_.rearm_for_slip();
      det2_.rearm_for_slip();
      transition(ManipPhase::BuildRefHolding);
      break;
    }

    case ManipPhase::Done:
    case ManipPhase::Failed:
      break;
  }

  ++step_;
  return out;
}

}  // namespace tgrip
