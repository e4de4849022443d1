#include "tgrip/runner.hpp"

#include <algorithm>

namespace tgrip {

LogActuation::LogActuation(double start_width_m, double dt_s) : dt_s_(dt_s) {
  env_.gripper_width_m = start_width_m;
}

EnvFeedback LogActuation::apply(const GripperCommand& grip,
                                const MotionCommand& motion) {
  switch (grip.kind) {
    case GripperCommand::Kind::Close:
      env_.gripper_width_m -= grip.speed_mps * dt_s_;
      break;
    case GripperCommand::Kind::Tighten:
      env_.gripper_width_m -= grip.delta_m;
      break;
    case GripperCommand::Kind::Hold:
      break;
  }
  if (env_.gripper_width_m <= 0.0) {
    env_.gripper_width_m = 0.0;
    env_.gripper_at_min = true;
  }
  switch (motion.kind) {
    case MotionCommand::Kind::Task:
      env_.task_pos_m += motion.speed_mps * dt_s_;
      break;
    case MotionCommand::Kind::Reverse:
      env_.task_pos_m = std::max(0.0, env_.task_pos_m - motion.speed_mps * dt_s_);
      break;
    case MotionCommand::Kind::Idle:
      break;
  }
  log_.push_back({grip, motion});
  return env_;
}

RunReport run_to_completion(const RunConfig& config, FrameSource& source,
                            ActuationSink& sink,
                            const FrameObserver& observer) {
  config.validate();

  RunReport report;
  report.scenario = config.scenario;
  report.seed = config.seed;

  ChangeDetector det1(SensorId::S1, config.detector_config());
  ChangeDetector det2(SensorId::S2, config.detector_config());

  EnvFeedback env = sink.current();

  // Calibration happens before the algorithm starts, with no contact:
  // one baseline frame plus calib_frames difference maxima.
  for (int i = 0; i <= config.calib_frames; ++i) {
    auto frames = source.next();
    if (!frames) {
      report.outcome = Outcome::Timeout;
      report.final_width_m = env.gripper_width_m;
      report.damaged = env.damaged;
      return report;
    }
    if (observer) {
      observer(frames->first, frames->second);
    }
    det1.calibrate_step(frames->first);
    det2.calibrate_step(frames->second);
    env = sink.apply(GripperCommand::hold(), MotionCommand::idle());
  }

  ManipFsm fsm(config.fsm_config(), std::move(det1), std::move(det2));

  while (!fsm.terminal()) {
    if (fsm.steps() >= static_cast<std::uint32_t>(config.timeout_steps)) {
      fsm.abort_run(Outcome::Timeout);
      break;
    }
    auto frames = source.next();
    if (!frames) {
      fsm.abort_run(Outcome::Timeout);
      break;
    }
    if (observer) {
      observer(frames->first, frames->second);
    }
    const auto commands = fsm.step(frames->first, frames->second, env);
    if (fsm.terminal()) {
      break;
    }
    env = sink.apply(commands.grip, commands.motion);
  }

  env = sink.current();
  report.outcome = fsm.outcome();
  report.damaged = env.damaged;
  report.duration_steps = fsm.steps();
  report.duration_s = static_cast<double>(fsm.steps()) * config.dt_s;
  report.final_width_m = env.gripper_width_m;
  if (fsm.width_at_touch()) {
    report.width_at_touch_m = *fsm.width_at_touch();
    if (report.width_at_touch_m > 0.0) {
      report.compression_pct = 100.0 *
                               (report.width_at_touch_m - report.final_width_m) /
                               report.width_at_touch_m;
    }
  }
  report.slip_count = fsm.slip_count();
  report.trace = fsm.trace();
  report.events = fsm.events();
  return report;
}

}  // namespace tgrip
