#pragma once

#include <optional>
#include <vector>

#include "tgrip/image.hpp"

namespace tgrip {

enum class DetectPhase : std::uint8_t { Calibrating, BuildingReference, Armed };
enum class ChangeKind : std::uint8_t { Touch, Slip };

const char* to_string(DetectPhase phase);
const char* to_string(ChangeKind kind);

struct DetectorConfig {
  double detect_threshold_init = 0.01;  // minimum change ratio to fire
  int calib_frames = 100;               // maxima recorded during calibration
  int ref_frames = 10;                  // frames averaged into a reference

  void validate() const;
};

struct NoiseCalibration {
  SensorId sensor = SensorId::S1;
  double noise_threshold = 0.0;  // clamped value used for binarization
  double raw_mean = 0.0;         // mean of maxima before the floor clamp
  int sample_count = 0;
};

struct DetectionEvent {
  SensorId sensor = SensorId::S1;
  std::uint32_t t = 0;
  ChangeKind kind = ChangeKind::Touch;
  double ratio = 0.0;      // change ratio that fired
  double threshold = 0.0;  // detection threshold in force

  bool operator==(const DetectionEvent&) const = default;
};

// Per-sensor stateful change detector.
//
// Lifecycle: Calibrating (no contact; learns the noise threshold from the
// mean of per-frame maxima of the averaged difference image) ->
// BuildingReference (averages ref_frames frames into the reference) ->
// Armed (binarized difference vs. the reference, intersected over two
// consecutive frames; fires when the change ratio reaches the detection
// threshold). The first change after arming means touch; after
// rearm_for_slip() the reference is rebuilt and further changes mean slip.
//
// The image shape is fixed by the first frame seen; any later mismatch is an
// error, not a resize. One instance per sensor, externally serialized.
class ChangeDetector {
 public:
  // Raw calibration means of exactly zero are clamped to this floor; a zero
  // threshold would binarize noise-free drift to all-ones.
  static constexpr double kNoiseFloor = 1.0 / 255.0;

  ChangeDetector(SensorId sensor, const DetectorConfig& config);

  // Calibration: the first frame becomes the fixed calibration baseline,
  // each following frame records max(channel_mean(abs_diff(frame, base))).
  // Consumes calib_frames + 1 frames, then advances to BuildingReference.
  void calibrate_step(const TactileFrame& frame);

  // Accumulates the running sum; after ref_frames frames the reference is
  // the element-wise mean and the detector is Armed.
  void reference_step(const TactileFrame& frame);

  // One armed step. Returns an event iff the intersection of the current
  // and previous binary difference images has ratio >= detect_threshold.
  // The first armed frame never fires (no previous image yet).
  std::optional<DetectionEvent> detect_step(const TactileFrame& frame,
                                            double detect_threshold);

  // After a confirmed touch: further changes mean slip, and the reference
  // is rebuilt to represent "holding the object".
  void rearm_for_slip();

  // Skips calibration with an externally supplied threshold.
  void set_noise_threshold(double noise_threshold);

  SensorId sensor() const { return sensor_; }
  DetectPhase phase() const { return phase_; }
  ChangeKind change_kind() const { return kind_; }
  double noise_threshold() const { return calibration_.noise_threshold; }
  const NoiseCalibration& calibration() const { return calibration_; }
  const std::vector<double>& calibration_maxima() const { return maxima_; }
  const std::optional<ReferenceImage>& reference() const { return reference_; }
  const std::optional<ImageBinary>& prev_binary() const { return prev_binary_; }
  int frames_accumulated() const;

 private:
  void check_frame(const TactileFrame& frame);

  SensorId sensor_;
  DetectorConfig config_;
  DetectPhase phase_ = DetectPhase::Calibrating;
  ChangeKind kind_ = ChangeKind::Touch;

  std::uint16_t h_ = 0;  // fixed by the first frame
  std::uint16_t w_ = 0;

  std::optional<ImageRgb> calib_base_;
  std::vector<double> maxima_;
  NoiseCalibration calibration_;

  std::optional<ImageRgb> ref_sum_;
  int ref_count_ = 0;
  std::optional<ReferenceImage> reference_;
  std::optional<ImageBinary> prev_binary_;
};

}  // namespace tgrip
