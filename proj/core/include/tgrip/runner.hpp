#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tgrip/config.hpp"
#include "tgrip/fsm.hpp"

namespace tgrip {

using FramePair = std::pair<TactileFrame, TactileFrame>;

// Produces one frame pair per step; nullopt when exhausted.
class FrameSource {
 public:
  virtual ~FrameSource() = default;
  virtual std::optional<FramePair> next() = 0;
};

// Applies the step's commands and reports the resulting world state.
class ActuationSink {
 public:
  virtual ~ActuationSink() = default;
  virtual EnvFeedback apply(const GripperCommand& grip,
                            const MotionCommand& motion) = 0;
  virtual EnvFeedback current() const = 0;
};

// Log-only sink for replays: integrates gripper width and task position
// from the commands, actuates nothing, never completes the task.
class LogActuation : public ActuationSink {
 public:
  LogActuation(double start_width_m, double dt_s);

  EnvFeedback apply(const GripperCommand& grip,
                    const MotionCommand& motion) override;
  EnvFeedback current() const override { return env_; }

  struct Entry {
    GripperCommand grip;
    MotionCommand motion;
  };
  const std::vector<Entry>& log() const { return log_; }

 private:
  double dt_s_;
  EnvFeedback env_;
  std::vector<Entry> log_;
};

// Per-run metrics and bookkeeping in the shape the experiments report:
// duration, compression relative to the width at touch, slip count.
struct RunReport {
  static constexpr const char* kSchema = "tgrip.run_report/1";

  std::string scenario;
  std::uint64_t seed = 0;
  Outcome outcome = Outcome::Timeout;
  bool damaged = false;
  std::uint32_t duration_steps = 0;
  double duration_s = 0.0;
  double width_at_touch_m = 0.0;  // 0 when touch never latched
  double final_width_m = 0.0;
  double compression_pct = 0.0;
  std::uint32_t slip_count = 0;
  std::vector<TraceEntry> trace;
  std::vector<DetectionEvent> events;

  bool operator==(const RunReport&) const = default;
};

// Optional per-step observer, e.g. an archive recorder dumping the frames
// the run consumed (calibration frames included).
using FrameObserver =
    std::function<void(const TactileFrame&, const TactileFrame&)>;

// Calibrates both detectors (calib_frames + 1 frames), then drives the FSM
// until Done/Failed, the step budget, or source exhaustion (both of which
// count as Timeout).
RunReport run_to_completion(const RunConfig& config, FrameSource& source,
                            ActuationSink& sink,
                            const FrameObserver& observer = {});

}  // namespace tgrip
