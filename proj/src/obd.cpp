#include "canhmm/obd.hpp"

#include <algorithm>
#include <cstdio>

#include "canhmm/errors.hpp"

namespace canhmm {

namespace {

constexpr std::uint8_t kMode01Response = 0x41;

struct PidSpec {
    std::uint8_t pid;
    Channel channel;
    std::size_t bytes_needed;  // data bytes after the pid
};

constexpr std::array<PidSpec, 7> kPidTable = {{
    {0x04, Channel::engine_load, 1},
    {0x05, Channel::coolant_temp, 1},
    {0x0C, Channel::rpm, 2},
    {0x0D, Channel::speed, 1},
    {0x0F, Channel::intake_temp, 1},
    {0x11, Channel::throttle, 1},
    {0x14, Channel::o2_voltage, 1},
}};

double scale_pid(Channel channel, std::uint8_t a, std::uint8_t b) {
    switch (channel) {
        case Channel::speed: return a;
        case Channel::rpm: return (256.0 * a + b) / 4.0;
        case Channel::coolant_temp: return a - 40.0;
        case Channel::intake_temp: return a - 40.0;
        case Channel::throttle: return a * 100.0 / 255.0;
        case Channel::engine_load: return a * 100.0 / 255.0;
        case Channel::o2_voltage: return a / 200.0;
    }
    throw Error("unreachable channel");
}

}  // namespace

const char* channel_name(Channel channel) {
    switch (channel) {
        case Channel::speed: return "speed";
        case Channel::rpm: return "rpm";
        case Channel::coolant_temp: return "coolant_temp";
        case Channel::intake_temp: return "intake_temp";
        case Channel::throttle: return "throttle";
        case Channel::engine_load: return "engine_load";
        case Channel::o2_voltage: return "o2_voltage";
    }
    return "?";
}

const char* channel_unit(Channel channel) {
    switch (channel) {
        case Channel::speed: return "km/h";
        case Channel::rpm: return "rev/min";
        case Channel::coolant_temp: return "degC";
        case Channel::intake_temp: return "degC";
        case Channel::throttle: return "%";
        case Channel::engine_load: return "%";
        case Channel::o2_voltage: return "V";
    }
    return "?";
}

std::optional<Channel> channel_from_name(std::string_view name) {
    for (const auto channel : kAllChannels) {
        if (name == channel_name(channel)) return channel;
    }
    return std::nullopt;
}

ValueRange channel_range(Channel channel) {
    switch (channel) {
        case Channel::speed: return {0.0, 255.0};
        case Channel::rpm: return {0.0, 16383.75};
        case Channel::coolant_temp: return {-40.0, 215.0};
        case Channel::intake_temp: return {-40.0, 215.0};
        case Channel::throttle: return {0.0, 100.0};
        case Channel::engine_load: return {0.0, 100.0};
        case Channel::o2_voltage: return {0.0, 1.275};
    }
    return {0.0, 0.0};
}

std::optional<PidSample> decode_obd_pid(const CanFrame& frame, PayloadLayout layout) {
    const auto& p = frame.data;
    std::size_t base = 0;
    std::size_t usable = p.size();
    if (layout == PayloadLayout::length_prefixed) {
        if (p.empty() || p[0] < 3) return std::nullopt;
        base = 1;
        // Bytes past the declared length are bus padding.
        usable = std::min<std::size_t>(p.size(), 1 + p[0]);
    }
    if (usable < base + 2) return std::nullopt;
    if (p[base] != kMode01Response) return std::nullopt;

    const std::uint8_t pid = p[base + 1];
    for (const auto& spec : kPidTable) {
        if (spec.pid != pid) continue;
        const std::size_t avail = usable - base - 2;
        if (avail < spec.bytes_needed) {
            char msg[64];
            std::snprintf(msg, sizeof msg, "truncated payload for pid 0x%02X (%s)", pid,
                          channel_name(spec.channel));
            throw DecodeError(msg);
        }
        const std::uint8_t a = p[base + 2];
        const std::uint8_t b = spec.bytes_needed > 1 ? p[base + 3] : 0;
        return PidSample{spec.channel, scale_pid(spec.channel, a, b), frame.timestamp};
    }
    return std::nullopt;  // unsupported pid in otherwise valid response
}

std::optional<PidSample> decode_raw_channel(const CanFrame& frame,
                                            std::span<const RawChannelRule> rules) {
    for (const auto& rule : rules) {
        if (rule.id != frame.id || rule.extended != frame.extended) continue;
        if (rule.byte_count != 1 && rule.byte_count != 2) {
            throw ConfigError("raw channel rule: byte_count must be 1 or 2");
        }
        if (frame.data.size() < rule.byte_offset + rule.byte_count) {
            throw DecodeError("truncated payload for raw channel rule on id " +
                              std::to_string(rule.id));
        }
        std::uint32_t raw = frame.data[rule.byte_offset];
        if (rule.byte_count == 2) raw = (raw << 8) | frame.data[rule.byte_offset + 1];
        return PidSample{rule.channel, rule.scale * raw + rule.offset, frame.timestamp};
    }
    return std::nullopt;
}

std::vector<PidSample> extract_channel_series(std::span<const CanFrame> frames, Channel channel,
                                              PayloadLayout layout,
                                              std::span<const RawChannelRule> rules) {
    std::vector<PidSample> out;
    for (const auto& frame : frames) {
        auto sample = rules.empty() ? std::nullopt : decode_raw_channel(frame, rules);
        if (!sample) sample = decode_obd_pid(frame, layout);
        if (sample && sample->channel == channel) out.push_back(*sample);
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const PidSample& a, const PidSample& b) { return a.timestamp < b.timestamp; });
    return out;
}

}  // namespace canhmm
