#include "tgrip/archive.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

namespace tgrip {
namespace {

constexpr std::size_t kHeaderSize = 14;
constexpr char kMagic[4] = {'T', 'G', 'F', '1'};

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian platforms are not supported");

std::uint16_t read_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void write_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void write_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
  out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xFF));
  out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xFF));
}

// read_u32 assembles the little-endian bytes into a native value, so the
// bit pattern is already right on either host endianness.
float read_f32(const std::uint8_t* p) {
  std::uint32_t bits = read_u32(p);
  float f;
  std::memcpy(&f, &bits, sizeof(f));
  return f;
}

void write_f32(std::vector<std::uint8_t>& out, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, sizeof(bits));
  write_u32(out, bits);
}

// Total payload bytes, or nullopt on arithmetic overflow.
std::optional<std::uint64_t> payload_bytes(std::uint16_t h, std::uint16_t w,
                                           std::uint8_t sensors,
                                           std::uint32_t frames,
                                           PixelFormat format) {
  const std::uint64_t per_sample = format == PixelFormat::U8Rgb ? 1 : 4;
  // h*w*3*sensors fits easily in 64 bits; the frame multiply can overflow.
  const std::uint64_t per_step = static_cast<std::uint64_t>(h) * w * 3 *
                                 sensors * per_sample;
  if (frames != 0 &&
      per_step > std::numeric_limits<std::uint64_t>::max() / frames) {
    return std::nullopt;
  }
  return per_step * frames;
}

}  // namespace

ArchiveError::ArchiveError(Kind kind, std::uint64_t offset,
                           const std::string& detail)
    : std::runtime_error(std::string("archive error [") + to_string(kind) +
                         "] at byte " + std::to_string(offset) + ": " +
                         detail),
      kind_(kind),
      offset_(offset) {}

const char* to_string(ArchiveError::Kind kind) {
  switch (kind) {
    case ArchiveError::Kind::FileOpen:
      return "file_open";
    case ArchiveError::Kind::BadMagic:
      return "bad_magic";
    case ArchiveError::Kind::TruncatedHeader:
      return "truncated_header";
    case ArchiveError::Kind::ZeroDimension:
      return "zero_dimension";
    case ArchiveError::Kind::InvalidSensorCount:
      return "invalid_sensor_count";
    case ArchiveError::Kind::BadPixelFormat:
      return "bad_pixel_format";
    case ArchiveError::Kind::DimensionOverflow:
      return "dimension_overflow";
    case ArchiveError::Kind::TruncatedPayload:
      return "truncated_payload";
    case ArchiveError::Kind::TrailingBytes:
      return "trailing_bytes";
  }
  return "?";
}

const char* to_string(PixelFormat format) {
  return format == PixelFormat::U8Rgb ? "u8rgb" : "f32rgb";
}

FrameArchive parse_archive(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderSize) {
    throw ArchiveError(ArchiveError::Kind::TruncatedHeader, bytes.size(),
                       "header needs " + std::to_string(kHeaderSize) +
                           " bytes, file has " + std::to_string(bytes.size()));
  }
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw ArchiveError(ArchiveError::Kind::BadMagic, 0,
                       "expected magic \"TGF1\"");
  }
  const std::uint16_t h = read_u16(bytes.data() + 4);
  const std::uint16_t w = read_u16(bytes.data() + 6);
  const std::uint8_t sensors = bytes[8];
  const std::uint8_t format_byte = bytes[9];
  const std::uint32_t frames = read_u32(bytes.data() + 10);

  if (h == 0) {
    throw ArchiveError(ArchiveError::Kind::ZeroDimension, 4, "h == 0");
  }
  if (w == 0) {
    throw ArchiveError(ArchiveError::Kind::ZeroDimension, 6, "w == 0");
  }
  if (sensors < 1 || sensors > 2) {
    throw ArchiveError(ArchiveError::Kind::InvalidSensorCount, 8,
                       "sensor_count " + std::to_string(sensors) +
                           " not in {1,2}");
  }
  if (format_byte > 1) {
    throw ArchiveError(ArchiveError::Kind::BadPixelFormat, 9,
                       "pixel_format byte " + std::to_string(format_byte));
  }
  const PixelFormat format = static_cast<PixelFormat>(format_byte);

  const auto expected = payload_bytes(h, w, sensors, frames, format);
  // Cap at 1 TiB so a corrupt header cannot drive a giant allocation.
  if (!expected || *expected > (1ULL << 40)) {
    throw ArchiveError(ArchiveError::Kind::DimensionOverflow, 10,
                       "declared payload size is implausible");
  }
  const std::uint64_t actual_payload = bytes.size() - kHeaderSize;
  if (actual_payload < *expected) {
    throw ArchiveError(ArchiveError::Kind::TruncatedPayload, bytes.size(),
                       "payload ends at byte " + std::to_string(bytes.size()) +
                           ", expected " +
                           std::to_string(kHeaderSize + *expected));
  }
  if (actual_payload > *expected) {
    throw ArchiveError(ArchiveError::Kind::TrailingBytes,
                       kHeaderSize + *expected,
                       std::to_string(actual_payload - *expected) +
                           " bytes past the declared payload");
  }

  FrameArchive archive;
  archive.h = h;
  archive.w = w;
  archive.sensor_count = sensors;
  archive.format = format;
  archive.frames.reserve(static_cast<std::size_t>(frames) * sensors);

  const std::size_t samples = static_cast<std::size_t>(h) * w * 3;
  const std::uint8_t* p = bytes.data() + kHeaderSize;
  for (std::uint32_t t = 0; t < frames; ++t) {
    for (std::uint8_t s = 0; s < sensors; ++s) {
      std::vector<double> values(samples);
      if (format == PixelFormat::U8Rgb) {
        for (std::size_t k = 0; k < samples; ++k) {
          values[k] = static_cast<double>(p[k]) / 255.0;
        }
        p += samples;
      } else {
        for (std::size_t k = 0; k < samples; ++k) {
          values[k] = static_cast<double>(read_f32(p));
          p += 4;
        }
      }
      TactileFrame frame;
      frame.sensor = static_cast<SensorId>(s);
      frame.t = t;
      frame.pixels = ImageRgb::from_values(h, w, std::move(values));
      archive.frames.push_back(std::move(frame));
    }
  }
  return archive;
}

std::vector<std::uint8_t> serialize_archive(const FrameArchive& archive) {
  if (archive.sensor_count < 1 || archive.sensor_count > 2) {
    throw UsageError("archive sensor_count must be 1 or 2");
  }
  if (archive.frames.size() % archive.sensor_count != 0) {
    throw UsageError("frame list is not a whole number of time steps");
  }
  const std::uint32_t frames = archive.frame_count();

  std::vector<std::uint8_t> out;
  const auto expected =
      payload_bytes(archive.h, archive.w, archive.sensor_count, frames,
                    archive.format);
  out.reserve(kHeaderSize + (expected ? *expected : 0));
  out.insert(out.end(), kMagic, kMagic + 4);
  write_u16(out, archive.h);
  write_u16(out, archive.w);
  out.push_back(archive.sensor_count);
  out.push_back(static_cast<std::uint8_t>(archive.format));
  write_u32(out, frames);

  const std::size_t samples =
      static_cast<std::size_t>(archive.h) * archive.w * 3;
  for (const TactileFrame& frame : archive.frames) {
    if (frame.pixels.height() != archive.h ||
        frame.pixels.width() != archive.w) {
      throw ShapeError("frame shape differs from archive header");
    }
    const auto& data = frame.pixels.data();
    if (archive.format == PixelFormat::U8Rgb) {
      for (std::size_t k = 0; k < samples; ++k) {
        out.push_back(
            static_cast<std::uint8_t>(std::lround(data[k] * 255.0)));
      }
    } else {
      for (std::size_t k = 0; k < samples; ++k) {
        write_f32(out, static_cast<float>(data[k]));
      }
    }
  }
  return out;
}

FrameArchive read_archive(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ArchiveError(ArchiveError::Kind::FileOpen, 0,
                       "cannot open '" + path + "'");
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return parse_archive(bytes);
}

void write_archive(const FrameArchive& archive, const std::string& path) {
  const std::vector<std::uint8_t> bytes = serialize_archive(archive);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw ArchiveError(ArchiveError::Kind::FileOpen, 0,
                       "cannot open '" + path + "' for writing");
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw ArchiveError(ArchiveError::Kind::FileOpen, 0,
                       "short write to '" + path + "'");
  }
}

ArchiveFrameSource::ArchiveFrameSource(FrameArchive archive)
    : archive_(std::move(archive)) {
  if (archive_.sensor_count != 2) {
    throw UsageError("replay needs a 2-sensor archive, got " +
                     std::to_string(archive_.sensor_count));
  }
}

std::optional<FramePair> ArchiveFrameSource::next() {
  if (t_ >= archive_.frame_count()) {
    return std::nullopt;
  }
  FramePair pair{archive_.frame(t_, 0), archive_.frame(t_, 1)};
  ++t_;
  return pair;
}

void ArchiveRecorder::push(const TactileFrame& f1, const TactileFrame& f2) {
  if (h_ == 0) {
    h_ = f1.pixels.height();
    w_ = f1.pixels.width();
  }
  frames_.push_back(f1);
  frames_.push_back(f2);
}

FrameArchive ArchiveRecorder::finish() const {
  FrameArchive archive;
  archive.h = h_;
  archive.w = w_;
  archive.sensor_count = 2;
  archive.format = format_;
  archive.frames = frames_;
  return archive;
}

FrameObserver ArchiveRecorder::observer() {
  return [this](const TactileFrame& f1, const TactileFrame& f2) {
    push(f1, f2);
  };
}

}  // namespace tgrip
