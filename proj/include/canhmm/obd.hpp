#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "canhmm/frame.hpp"

namespace canhmm {

// The seven sensor channels decoded from diagnostic traffic.
enum class Channel {
    speed,         // km/h
    rpm,           // rev/min
    coolant_temp,  // degrees C
    intake_temp,   // degrees C
    throttle,      // percent
    engine_load,   // percent
    o2_voltage,    // volts
};

inline constexpr std::array<Channel, 7> kAllChannels = {
    Channel::speed,       Channel::rpm,      Channel::coolant_temp, Channel::intake_temp,
    Channel::throttle,    Channel::engine_load, Channel::o2_voltage,
};

const char* channel_name(Channel channel);
const char* channel_unit(Channel channel);
std::optional<Channel> channel_from_name(std::string_view name);

struct ValueRange {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double v) const { return v >= lo && v <= hi; }
};

// Decodable physical range of each channel under its scaling formula.
ValueRange channel_range(Channel channel);

// A decoded physical reading.
struct PidSample {
    Channel channel = Channel::speed;
    double value = 0.0;      // physical units, see channel_unit()
    double timestamp = 0.0;  // seconds
};

// Whether mode-01 responses carry an ISO-TP style length byte before the
// mode byte. Capture tools differ; bare is the default.
enum class PayloadLayout { bare, length_prefixed };

// Decodes a mode-01 diagnostic response into a physical sample.
// Returns nullopt for anything that is not a recognized response (request
// frames, other modes, unsupported parameter ids, unrelated traffic).
// Throws DecodeError when a recognized parameter id arrives with fewer data
// bytes than its scaling formula needs.
//
// Scaling, with A and B the first data bytes after the parameter id:
//   speed = A            rpm = (256A+B)/4      coolant = A-40
//   intake = A-40        throttle = A*100/255  load = A*100/255
//   o2 = A/200
std::optional<PidSample> decode_obd_pid(const CanFrame& frame,
                                        PayloadLayout layout = PayloadLayout::bare);

// Mapping rule for vehicles that broadcast sensor values on proprietary
// identifiers instead of answering diagnostic queries. Extracts a big-endian
// unsigned field and applies value = scale * raw + offset.
struct RawChannelRule {
    std::uint32_t id = 0;
    bool extended = false;
    Channel channel = Channel::speed;
    std::size_t byte_offset = 0;
    std::size_t byte_count = 1;  // 1 or 2
    double scale = 1.0;
    double offset = 0.0;
};

std::optional<PidSample> decode_raw_channel(const CanFrame& frame,
                                            std::span<const RawChannelRule> rules);

// All decodable samples of one channel, in non-decreasing timestamp order.
// Input frames are sorted stably first if needed; equal timestamps keep
// their original relative order.
std::vector<PidSample> extract_channel_series(std::span<const CanFrame> frames, Channel channel,
                                              PayloadLayout layout = PayloadLayout::bare,
                                              std::span<const RawChannelRule> rules = {});

}  // namespace canhmm
