#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tgrip/runner.hpp"

namespace tgrip {

// TGF1 frame-sequence archive, little-endian throughout.
//
//   offset  size  field
//   0       4     magic "TGF1"
//   4       2     h (u16)
//   6       2     w (u16)
//   8       1     sensor_count (1 or 2)
//   9       1     pixel_format (0 = u8rgb, 1 = f32rgb)
//   10      4     frame_count (u32)
//   14      ...   payload: frames interleaved by time step then sensor,
//                 row-major, channel-interleaved; u8 samples are intensity
//                 * 255, f32 samples are raw intensities.
//
// The payload must hold exactly frame_count * sensor_count * h * w * 3
// samples; anything shorter, longer, or dimensionally impossible is a
// structured parse error naming the byte offset at fault.
enum class PixelFormat : std::uint8_t { U8Rgb = 0, F32Rgb = 1 };

const char* to_string(PixelFormat format);

struct FrameArchive {
  std::uint16_t h = 0;
  std::uint16_t w = 0;
  std::uint8_t sensor_count = 1;
  PixelFormat format = PixelFormat::U8Rgb;
  std::vector<TactileFrame> frames;  // time-major, sensor-minor

  std::uint32_t frame_count() const {
    return sensor_count == 0
               ? 0
               : static_cast<std::uint32_t>(frames.size() / sensor_count);
  }
  const TactileFrame& frame(std::uint32_t t, std::uint8_t sensor) const {
    return frames[static_cast<std::size_t>(t) * sensor_count + sensor];
  }

  bool operator==(const FrameArchive&) const = default;
};

FrameArchive parse_archive(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> serialize_archive(const FrameArchive& archive);

FrameArchive read_archive(const std::string& path);
void write_archive(const FrameArchive& archive, const std::string& path);

// Streams archived frame pairs into a run (requires sensor_count == 2).
class ArchiveFrameSource : public FrameSource {
 public:
  explicit ArchiveFrameSource(FrameArchive archive);
  std::optional<FramePair> next() override;

 private:
  FrameArchive archive_;
  std::uint32_t t_ = 0;
};

// Collects the frame pairs a run consumed, for later export.
class ArchiveRecorder {
 public:
  explicit ArchiveRecorder(PixelFormat format = PixelFormat::F32Rgb)
      : format_(format) {}

  void push(const TactileFrame& f1, const TactileFrame& f2);
  FrameArchive finish() const;
  FrameObserver observer();

 private:
  PixelFormat format_;
  std::uint16_t h_ = 0;
  std::uint16_t w_ = 0;
  std::vector<TactileFrame> frames_;
};

}  // namespace tgrip
