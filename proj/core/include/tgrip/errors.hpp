#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace tgrip {

// Mismatched image shapes (frame vs. reference, binary pair, ...).
class ShapeError : public std::runtime_error {
 public:
  explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

// API misuse: wrong sensor routed to a detector, step called in the wrong
// phase, invalid threshold argument.
class UsageError : public std::logic_error {
 public:
  explicit UsageError(const std::string& what) : std::logic_error(what) {}
};

// Pixel data outside the declared [0,1] range. Raised instead of clamping.
class ValueRangeError : public std::runtime_error {
 public:
  explicit ValueRangeError(const std::string& what)
      : std::runtime_error(what) {}
};

// Malformed run config, scenario file, or unknown preset name.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Structured archive parse failure. `offset` is the byte position at fault.
class ArchiveError : public std::runtime_error {
 public:
  enum class Kind {
    FileOpen,
    BadMagic,
    TruncatedHeader,
    ZeroDimension,
    InvalidSensorCount,
    BadPixelFormat,
    DimensionOverflow,
    TruncatedPayload,
    TrailingBytes,
  };

  ArchiveError(Kind kind, std::uint64_t offset, const std::string& detail);

  Kind kind() const { return kind_; }
  std::uint64_t offset() const { return offset_; }

 private:
  Kind kind_;
  std::uint64_t offset_;
};

const char* to_string(ArchiveError::Kind kind);

}  // namespace tgrip
