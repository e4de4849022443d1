#include "tgrip/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tgrip {

const char* to_string(SensorId sensor) {
  return sensor == SensorId::S1 ? "S1" : "S2";
}

ImageRgb::ImageRgb(std::uint16_t height, std::uint16_t width, double fill)
    : h_(height),
      w_(width),
      data_(static_cast<std::size_t>(height) * width * 3, fill) {}

ImageRgb ImageRgb::from_values(std::uint16_t height, std::uint16_t width,
                               std::vector<double> values) {
  const std::size_t expected = static_cast<std::size_t>(height) * width * 3;
  if (values.size() != expected) {
    throw ShapeError("ImageRgb::from_values: got " +
                     std::to_string(values.size()) + " samples, expected " +
                     std::to_string(expected));
  }
  for (double v : values) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ValueRangeError("pixel value " + std::to_string(v) +
                            " outside [0,1]");
    }
  }
  ImageRgb img;
  img.h_ = height;
  img.w_ = width;
  img.data_ = std::move(values);
  return img;
}

ImageGray::ImageGray(std::uint16_t height, std::uint16_t width, double fill)
    : h_(height),
      w_(width),
      data_(static_cast<std::size_t>(height) * width, fill) {}

ImageBinary::ImageBinary(std::uint16_t height, std::uint16_t width,
                         std::uint8_t fill)
    : h_(height),
      w_(width),
      data_(static_cast<std::size_t>(height) * width, fill) {}

std::size_t ImageBinary::count_ones() const {
  return static_cast<std::size_t>(
      std::count(data_.begin(), data_.end(), std::uint8_t{1}));
}

ImageRgb abs_diff(const ImageRgb& a, const ImageRgb& b) {
  if (!a.same_shape(b)) {
    throw ShapeError("abs_diff: shape mismatch " + std::to_string(a.height()) +
                     "x" + std::to_string(a.width()) + " vs " +
                     std::to_string(b.height()) + "x" +
                     std::to_string(b.width()));
  }
  ImageRgb out(a.height(), a.width());
  const auto& da = a.data();
  const auto& db = b.data();
  auto& dd = out.data();
  for (std::size_t k = 0; k < dd.size(); ++k) {
    dd[k] = std::abs(da[k] - db[k]);
  }
  return out;
}

ImageRgb abs_diff(const TactileFrame& frame, const ReferenceImage& ref) {
  if (frame.sensor != ref.sensor) {
    throw UsageError(std::string("abs_diff: frame from ") +
                     to_string(frame.sensor) + " against reference for " +
                     to_string(ref.sensor));
  }
  return abs_diff(frame.pixels, ref.pixels);
}

ImageGray channel_mean(const ImageRgb& rgb) {
  ImageGray out(rgb.height(), rgb.width());
  for (int i = 0; i < rgb.height(); ++i) {
    for (int j = 0; j < rgb.width(); ++j) {
      out.at(i, j) = (rgb.at(i, j, 0) + rgb.at(i, j, 1) + rgb.at(i, j, 2)) / 3.0;
    }
  }
  return out;
}

ImageBinary binarize(const ImageGray& gray, double noise_threshold) {
  if (!(noise_threshold >= 0.0 && noise_threshold <= 1.0)) {
    throw UsageError("binarize: noise threshold " +
                     std::to_string(noise_threshold) + " outside [0,1]");
  }
  ImageBinary out(gray.height(), gray.width());
  const auto& src = gray.data();
  auto& dst = out.data();
  for (std::size_t k = 0; k < src.size(); ++k) {
    // "below the noise threshold" maps to 0; ties map to 1.
    dst[k] = src[k] < noise_threshold ? 0 : 1;
  }
  return out;
}

ImageBinary change_image(const ImageBinary& prev, const ImageBinary& curr) {
  if (!prev.same_shape(curr)) {
    throw ShapeError("change_image: shape mismatch");
  }
  ImageBinary out(prev.height(), prev.width());
  const auto& dp = prev.data();
  const auto& dc = curr.data();
  auto& dd = out.data();
  for (std::size_t k = 0; k < dd.size(); ++k) {
    dd[k] = static_cast<std::uint8_t>(dp[k] * dc[k]);
  }
  return out;
}

double change_ratio(const ImageBinary& c) {
  const std::size_t total =
      static_cast<std::size_t>(c.height()) * c.width();
  if (total == 0) {
    return 0.0;
  }
  return static_cast<double>(c.count_ones()) / static_cast<double>(total);
}

}  // namespace tgrip
