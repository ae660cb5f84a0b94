#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "canhmm/errors.hpp"

namespace canhmm {

inline constexpr std::uint32_t kMaxStandardId = 0x7FF;
inline constexpr std::uint32_t kMaxExtendedId = 0x1FFFFFFF;
inline constexpr std::size_t kMaxPayloadBytes = 8;

// One raw bus message.
struct CanFrame {
    double timestamp = 0.0;          // seconds since epoch, fractional
    std::uint32_t id = 0;            // 11-bit, or 29-bit when extended
    bool extended = false;
    std::vector<std::uint8_t> data;  // 0..8 payload bytes

    bool operator==(const CanFrame&) const = default;
};

// Invariant check; empty result means the frame is well formed.
std::vector<std::string> frame_violations(const CanFrame& frame);

// Parses one log line in either supported format, autodetected:
//   format A:  "(<ts>) <iface> <ID>#<HEXDATA>"     e.g. "(1436509052.249713) can0 0D1#11D6"
//   format B:  "<ts>,<id_hex>,<data_hex>"           e.g. "1436509052.249713,0d1,11d6"
// The identifier is treated as extended when its hex text is wider than
// three digits. Throws ParseError / PayloadLengthError.
CanFrame parse_log_line(std::string_view line);

// Renders a frame as a format A line, timestamp at microsecond precision.
// Standard ids print as three hex digits, extended ids as eight, so the
// extended flag survives a round trip.
std::string format_log_line(const CanFrame& frame);

// Reads a whole log, skipping blank lines. Parse failures are rethrown with
// the 1-based line number prepended.
std::vector<CanFrame> read_can_log(std::istream& in);
std::vector<CanFrame> read_can_log_file(const std::string& path);

}  // namespace canhmm
