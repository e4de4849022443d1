#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tgrip/errors.hpp"

namespace tgrip {

enum class SensorId : std::uint8_t { S1 = 0, S2 = 1 };

const char* to_string(SensorId sensor);

// h x w x 3 image, row-major, channel-interleaved, intensities in [0,1].
// Arithmetic is done in double precision throughout; 8-bit inputs are
// normalized by 1/255 at the archive boundary.
class ImageRgb {
 public:
  ImageRgb() = default;
  ImageRgb(std::uint16_t height, std::uint16_t width, double fill = 0.0);

  // Validates every value against [0,1]; throws ValueRangeError otherwise.
  static ImageRgb from_values(std::uint16_t height, std::uint16_t width,
                              std::vector<double> values);

  double at(int i, int j, int c) const {
    return data_[(static_cast<std::size_t>(i) * w_ + j) * 3 + c];
  }
  double& at(int i, int j, int c) {
    return data_[(static_cast<std::size_t>(i) * w_ + j) * 3 + c];
  }

  std::uint16_t height() const { return h_; }
  std::uint16_t width() const { return w_; }
  std::size_t sample_count() const { return data_.size(); }
  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  bool same_shape(const ImageRgb& other) const {
    return h_ == other.h_ && w_ == other.w_;
  }
  bool operator==(const ImageRgb& other) const = default;

 private:
  std::uint16_t h_ = 0;
  std::uint16_t w_ = 0;
  std::vector<double> data_;
};

// h x w single-channel image, values in [0,1].
class ImageGray {
 public:
  ImageGray() = default;
  ImageGray(std::uint16_t height, std::uint16_t width, double fill = 0.0);

  double at(int i, int j) const {
    return data_[static_cast<std::size_t>(i) * w_ + j];
  }
  double& at(int i, int j) {
    return data_[static_cast<std::size_t>(i) * w_ + j];
  }

  std::uint16_t height() const { return h_; }
  std::uint16_t width() const { return w_; }
  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  bool same_shape(const ImageGray& other) const {
    return h_ == other.h_ && w_ == other.w_;
  }
  bool operator==(const ImageGray& other) const = default;

 private:
  std::uint16_t h_ = 0;
  std::uint16_t w_ = 0;
  std::vector<double> data_;
};

// h x w mask whose entries are exactly 0 or 1.
class ImageBinary {
 public:
  ImageBinary() = default;
  ImageBinary(std::uint16_t height, std::uint16_t width, std::uint8_t fill = 0);

  std::uint8_t at(int i, int j) const {
    return data_[static_cast<std::size_t>(i) * w_ + j];
  }
  std::uint8_t& at(int i, int j) {
    return data_[static_cast<std::size_t>(i) * w_ + j];
  }

  std::uint16_t height() const { return h_; }
  std::uint16_t width() const { return w_; }
  const std::vector<std::uint8_t>& data() const { return data_; }
  std::vector<std::uint8_t>& data() { return data_; }

  std::size_t count_ones() const;

  bool same_shape(const ImageBinary& other) const {
    return h_ == other.h_ && w_ == other.w_;
  }
  bool operator==(const ImageBinary& other) const = default;

 private:
  std::uint16_t h_ = 0;
  std::uint16_t w_ = 0;
  std::vector<std::uint8_t> data_;
};

// One normalized image from one sensor at one time step.
struct TactileFrame {
  SensorId sensor = SensorId::S1;
  std::uint32_t t = 0;
  ImageRgb pixels;

  bool operator==(const TactileFrame&) const = default;
};

// Per-sensor baseline image, the element-wise average of `built_from` frames.
struct ReferenceImage {
  SensorId sensor = SensorId::S1;
  ImageRgb pixels;
  int built_from = 0;

  bool operator==(const ReferenceImage&) const = default;
};

// Element-wise |a - b|. Shapes must match.
ImageRgb abs_diff(const ImageRgb& a, const ImageRgb& b);

// Typed variant used by the detection pipeline; additionally requires the
// frame and reference to come from the same sensor.
ImageRgb abs_diff(const TactileFrame& frame, const ReferenceImage& ref);

// Per-pixel mean of the three channels.
ImageGray channel_mean(const ImageRgb& rgb);

// 0 where gray < noise_threshold, 1 otherwise (values equal to the
// threshold map to 1).
ImageBinary binarize(const ImageGray& gray, double noise_threshold);

// Element-wise product of two consecutive binary difference images; ones
// mark pixels that differ from the reference at both steps.
ImageBinary change_image(const ImageBinary& prev, const ImageBinary& curr);

// Fraction of ones, count / (w*h).
double change_ratio(const ImageBinary& c);

}  // namespace tgrip
