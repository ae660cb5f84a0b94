#include "canhmm/inject.hpp"

#include <cmath>

#include "canhmm/errors.hpp"

namespace canhmm {

const char* change_kind_name(ChangeKind kind) {
    switch (kind) {
        case ChangeKind::normal: return "normal";
        case ChangeKind::sudden_increase: return "sudden_increase";
        case ChangeKind::sudden_decrease: return "sudden_decrease";
        case ChangeKind::gradual_increase: return "gradual_increase";
        case ChangeKind::gradual_decrease: return "gradual_decrease";
    }
    return "?";
}

std::optional<ChangeKind> change_kind_from_name(std::string_view name) {
    for (const auto kind : {ChangeKind::normal, ChangeKind::sudden_increase,
                            ChangeKind::sudden_decrease, ChangeKind::gradual_increase,
                            ChangeKind::gradual_decrease}) {
        if (name == change_kind_name(kind)) return kind;
    }
    return std::nullopt;
}

bool is_sudden(ChangeKind kind) {
    return kind == ChangeKind::sudden_increase || kind == ChangeKind::sudden_decrease;
}

std::vector<double> inject_channel(std::span<const double> values, const ChannelChange& change,
                                   std::size_t position, std::size_t duration, ValueRange range) {
    std::vector<double> out(values.begin(), values.end());
    if (change.kind == ChangeKind::normal) return out;

    if (!(change.magnitude > 0.0)) throw Error("inject: magnitude must be positive");
    if (duration < 1) throw Error("inject: duration must be >= 1");
    if (position < 1 || position + duration > values.size() - 1) {
        throw Error("inject: position/duration outside series bounds");
    }

    const bool increase =
        change.kind == ChangeKind::sudden_increase || change.kind == ChangeKind::gradual_increase;
    const double sign = increase ? 1.0 : -1.0;

    if (is_sudden(change.kind)) {
        // Keep stepping by the full magnitude each grid step, then revert.
        for (std::size_t j = 0; j < duration; ++j) {
            out[position + j] += sign * change.magnitude * static_cast<double>(j + 1);
        }
    } else {
        // Ramp to the new level, then hold it for the rest of the series.
        for (std::size_t j = position; j < values.size(); ++j) {
            const double reached = std::min<double>(static_cast<double>(j - position + 1),
                                                    static_cast<double>(duration));
            out[j] += sign * change.magnitude * reached / static_cast<double>(duration);
        }
    }

    for (std::size_t j = position; j < out.size(); ++j) {
        if (!range.contains(out[j])) {
            throw Error("inject: value " + std::to_string(out[j]) + " at step " +
                        std::to_string(j) + " escapes the physical range [" +
                        std::to_string(range.lo) + ", " + std::to_string(range.hi) +
                        "]; choose a magnitude the base series can absorb");
        }
    }
    return out;
}

DriveSeries inject_anomaly(const DriveSeries& base, const AnomalyScenario& scenario) {
    DriveSeries out = base;
    if (scenario.speed.kind != ChangeKind::normal) {
        out.speed = inject_channel(base.speed, scenario.speed, scenario.position,
                                   scenario.duration, channel_range(Channel::speed));
    }
    if (scenario.rpm.kind != ChangeKind::normal) {
        out.rpm = inject_channel(base.rpm, scenario.rpm, scenario.position, scenario.duration,
                                 channel_range(Channel::rpm));
    }
    return out;
}

}  // namespace canhmm
