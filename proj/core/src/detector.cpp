#include "tgrip/detector.hpp"

#include <algorithm>
#include <string>

namespace tgrip {

const char* to_string(DetectPhase phase) {
  switch (phase) {
    case DetectPhase::Calibrating:
      return "calibrating";
    case DetectPhase::BuildingReference:
      return "building_reference";
    case DetectPhase::Armed:
      return "armed";
  }
  return "?";
}

const char* to_string(ChangeKind kind) {
  return kind == ChangeKind::Touch ? "touch" : "slip";
}

void DetectorConfig::validate() const {
  if (!(detect_threshold_init > 0.0 && detect_threshold_init <= 1.0)) {
    throw ConfigError("detect_threshold_init must be in (0,1], got " +
                      std::to_string(detect_threshold_init));
  }
  if (calib_frames < 1) {
    throw ConfigError("calib_frames must be >= 1");
  }
  if (ref_frames < 1) {
    throw ConfigError("ref_frames must be >= 1");
  }
}

ChangeDetector::ChangeDetector(SensorId sensor, const DetectorConfig& config)
    : sensor_(sensor), config_(config) {
  config_.validate();
  calibration_.sensor = sensor;
}

void ChangeDetector::check_frame(const TactileFrame& frame) {
  if (frame.sensor != sensor_) {
    throw UsageError(std::string("detector for ") + to_string(sensor_) +
                     " fed a frame from " + to_string(frame.sensor));
  }
  if (frame.pixels.height() == 0 || frame.pixels.width() == 0) {
    throw ShapeError("empty frame");
  }
  if (h_ == 0) {
    h_ = frame.pixels.height();
    w_ = frame.pixels.width();
    return;
  }
  if (frame.pixels.height() != h_ || frame.pixels.width() != w_) {
    throw ShapeError("frame shape " + std::to_string(frame.pixels.height()) +
                     "x" + std::to_string(frame.pixels.width()) +
                     " differs from session shape " + std::to_string(h_) +
                     "x" + std::to_string(w_));
  }
}

void ChangeDetector::calibrate_step(const TactileFrame& frame) {
  if (phase_ != DetectPhase::Calibrating) {
    throw UsageError("calibrate_step called while " +
                     std::string(to_string(phase_)));
  }
  check_frame(frame);

  if (!calib_base_) {
    calib_base_ = frame.pixels;
    return;
  }

  const ImageGray gray = channel_mean(abs_diff(frame.pixels, *calib_base_));
  const auto& d = gray.data();
  maxima_.push_back(*std::max_element(d.begin(), d.end()));

  if (static_cast<int>(maxima_.size()) == config_.calib_frames) {
    double sum = 0.0;
    for (double m : maxima_) {
      sum += m;
    }
    const double raw = sum / static_cast<double>(config_.calib_frames);
    calibration_.raw_mean = raw;
    calibration_.noise_threshold = raw > 0.0 ? raw : kNoiseFloor;
    calibration_.sample_count = static_cast<int>(maxima_.size());
    phase_ = DetectPhase::BuildingReference;
    ref_sum_.reset();
    ref_count_ = 0;
  }
}

void ChangeDetector::reference_step(const TactileFrame& frame) {
  if (phase_ != DetectPhase::BuildingReference) {
    throw UsageError("reference_step called while " +
                     std::string(to_string(phase_)));
  }
  check_frame(frame);

  if (!ref_sum_) {
    ref_sum_ = frame.pixels;
  } else {
    auto& acc = ref_sum_->data();
    const auto& src = frame.pixels.data();
    for (std::size_t k = 0; k < acc.size(); ++k) {
      acc[k] += src[k];
    }
  }
  ++ref_count_;

  if (ref_count_ == config_.ref_frames) {
    ImageRgb mean = *ref_sum_;
    for (double& v : mean.data()) {
      v /= static_cast<double>(config_.ref_frames);
    }
    reference_ = ReferenceImage{sensor_, std::move(mean), ref_count_};
    ref_sum_.reset();
    phase_ = DetectPhase::Armed;
    prev_binary_.reset();
  }
}

std::optional<DetectionEvent> ChangeDetector::detect_step(
    const TactileFrame& frame, double detect_threshold) {
  if (phase_ != DetectPhase::Armed) {
    throw UsageError("detect_step called while " +
                     std::string(to_string(phase_)));
  }
  if (!(detect_threshold > 0.0)) {
    throw UsageError("detect_threshold must be positive");
  }
  check_frame(frame);

  ImageBinary binary = binarize(channel_mean(abs_diff(frame, *reference_)),
                                calibration_.noise_threshold);

  std::optional<DetectionEvent> event;
  if (prev_binary_) {
    const ImageBinary change = change_image(*prev_binary_, binary);
    const double ratio = change_ratio(change);
    if (ratio >= detect_threshold) {
      event = DetectionEvent{sensor_, frame.t, kind_, ratio, detect_threshold};
    }
  }
  prev_binary_ = std::move(binary);
  return event;
}

void ChangeDetector::rearm_for_slip() {
  kind_ = ChangeKind::Slip;
  phase_ = DetectPhase::BuildingReference;
  ref_sum_.reset();
  ref_count_ = 0;
  reference_.reset();
  prev_binary_.reset();
}

void ChangeDetector::set_noise_threshold(double noise_threshold) {
  if (phase_ != DetectPhase::Calibrating) {
    throw UsageError("set_noise_threshold is only valid before calibration");
  }
  if (!(noise_threshold >= 0.0 && noise_threshold <= 1.0)) {
    throw UsageError("noise threshold outside [0,1]");
  }
  calibration_.raw_mean = noise_threshold;
  calibration_.noise_threshold =
      noise_threshold > 0.0 ? noise_threshold : kNoiseFloor;
  calibration_.sample_count = 0;
  phase_ = DetectPhase::BuildingReference;
}

int ChangeDetector::frames_accumulated() const {
  switch (phase_) {
    case DetectPhase::Calibrating:
      return static_cast<int>(maxima_.size());
    case DetectPhase::BuildingReference:
      return ref_count_;
    case DetectPhase::Armed:
      return 0;
  }
  return 0;
}

}  // namespace tgrip
