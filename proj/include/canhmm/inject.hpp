#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "canhmm/simulate.hpp"

namespace canhmm {

// Value-injection shapes, all anchored at a grid `position`:
//
//   sudden_*:  the value steps by +-magnitude per grid step for `duration`
//              steps, then reverts -- a spike. Exactly duration+1 gradients
//              differ from the base series (duration anomalous steps plus
//              the revert).
//   gradual_*: the value ramps by +-magnitude spread evenly over `duration`
//              steps and then holds the new level; exactly `duration`
//              gradients differ, each small.
//   normal:    identity.
enum class ChangeKind {
    normal,
    sudden_increase,
    sudden_decrease,
    gradual_increase,
    gradual_decrease,
};

const char* change_kind_name(ChangeKind kind);
std::optional<ChangeKind> change_kind_from_name(std::string_view name);
bool is_sudden(ChangeKind kind);

struct ChannelChange {
    ChangeKind kind = ChangeKind::normal;
    double magnitude = 0.0;  // physical units, > 0 for non-normal kinds
};

struct AnomalyScenario {
    ChannelChange speed;
    ChannelChange rpm;
    std::size_t position = 0;  // first modified grid index, >= 1
    std::size_t duration = 1;  // steps

    bool is_normal() const {
        return speed.kind == ChangeKind::normal && rpm.kind == ChangeKind::normal;
    }
};

// Applies one channel change. Requires 1 <= position and
// position + duration <= values.size() - 1 so the revert gradient stays in
// bounds. Any modified value escaping the channel's physical range is an
// error: pick a magnitude the base series can absorb.
std::vector<double> inject_channel(std::span<const double> values, const ChannelChange& change,
                                   std::size_t position, std::size_t duration, ValueRange range);

// Applies the scenario to both channels of a drive. Only channels with a
// non-normal kind change; a fully normal scenario returns the input
// bit-exactly.
DriveSeries inject_anomaly(const DriveSeries& base, const AnomalyScenario& scenario);

}  // namespace canhmm
