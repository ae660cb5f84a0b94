#include "canhmm/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "canhmm/errors.hpp"
#include "canhmm/rand.hpp"

namespace canhmm {

namespace {

constexpr double kIdleRpm = 800.0;

// Gear table for the city profile: speed thresholds and rpm-per-km/h ratios.
// Ratios stay <= 80 so that a 3 km/h speed step plus noise moves rpm by at
// most 300; shift drops stay within 800.
struct Gear {
    double up_to;   // km/h
    double ratio;   // rpm per km/h
};
constexpr Gear kCityGears[] = {
    {12.0, 75.0}, {25.0, 52.0}, {40.0, 38.0}, {60.0, 30.0}, {1e9, 24.0},
};

double city_ratio(double speed) {
    for (const auto& gear : kCityGears) {
        if (speed <= gear.up_to) return gear.ratio;
    }
    return kCityGears[4].ratio;
}

// Cruise rides one tall gear; the ratio keeps rpm above 3100 at the 60 km/h
// floor so that large downward rpm injections stay physically decodable.
constexpr double kCruiseRatio = 40.0;

struct SegmentState {
    bool ramping = false;
    double level = 0.0;   // cruise set point
    double target = 0.0;  // ramp destination
    double slope = 0.0;   // km/h per step while ramping
    int remaining = 0;    // cruise steps left
};

}  // namespace

const char* drive_profile_name(DriveProfile profile) {
    switch (profile) {
        case DriveProfile::idle: return "idle";
        case DriveProfile::city: return "city";
        case DriveProfile::cruise: return "cruise";
    }
    return "?";
}

std::optional<DriveProfile> drive_profile_from_name(std::string_view name) {
    if (name == "idle") return DriveProfile::idle;
    if (name == "city") return DriveProfile::city;
    if (name == "cruise") return DriveProfile::cruise;
    return std::nullopt;
}

const std::vector<double>& DriveSeries::channel_values(Channel channel) const {
    if (channel == Channel::speed) return speed;
    if (channel == Channel::rpm) return rpm;
    throw Error(std::string("drive series has no ") + channel_name(channel) + " channel");
}

std::vector<double>& DriveSeries::channel_values(Channel channel) {
    if (channel == Channel::speed) return speed;
    if (channel == Channel::rpm) return rpm;
    throw Error(std::string("drive series has no ") + channel_name(channel) + " channel");
}

DriveSeries simulate_drive(std::size_t steps, std::uint64_t seed, DriveProfile profile, double dt) {
    if (steps < 2) throw Error("simulate_drive: need at least two steps");
    if (!(dt > 0.0)) throw Error("simulate_drive: dt must be positive");

    std::mt19937_64 rng(seed);
    DriveSeries out;
    out.dt = dt;
    out.speed.reserve(steps);
    out.rpm.reserve(steps);

    if (profile == DriveProfile::idle) {
        for (std::size_t t = 0; t < steps; ++t) {
            out.speed.push_back(0.0);
            out.rpm.push_back(kIdleRpm + uniform_in(rng, -25.0, 25.0));
        }
        return out;
    }

    const bool cruise = profile == DriveProfile::cruise;
    const double speed_min = cruise ? 60.0 : 0.0;
    const double speed_max = cruise ? 105.0 : 60.0;

    SegmentState seg;
    seg.level = cruise ? 80.0 : 0.0;
    seg.remaining = cruise ? 30 + static_cast<int>(uniform_int(rng, 0, 20))
                           : 10 + static_cast<int>(uniform_int(rng, 0, 10));
    double v = seg.level;

    auto pick_ramp = [&]() {
        double target;
        do {
            if (!cruise && uniform01(rng) < 0.25) {
                target = 0.0;  // city drives stop now and then
            } else {
                target = uniform_in(rng, cruise ? 62.0 : 10.0, cruise ? 103.0 : speed_max);
            }
        } while (std::abs(target - seg.level) < 8.0);
        seg.target = target;
        seg.slope = uniform_in(rng, 1.0, 2.5);
        seg.ramping = true;
    };

    for (std::size_t t = 0; t < steps; ++t) {
        if (seg.ramping) {
            // Accelerations wobble around their slope like real pedal work;
            // slope + jitter never exceeds the 3 km/h per-step envelope.
            const double gap = seg.target - v;
            if (std::abs(gap) <= seg.slope + 0.45) {
                v = seg.target;
                seg.ramping = false;
                seg.level = seg.target;
                seg.remaining = 20 + static_cast<int>(uniform_int(rng, 0, 40));
            } else {
                v += (gap > 0 ? seg.slope : -seg.slope) + uniform_in(rng, -0.4, 0.4);
            }
        } else {
            if (seg.level > 0.0) v = seg.level + uniform_in(rng, -0.5, 0.5);
            if (--seg.remaining <= 0) pick_ramp();
        }
        v = std::clamp(v, speed_min, speed_max);
        out.speed.push_back(v);

        // Cruise rides a warm engine with little accessory load, so its rpm
        // tracks speed tightly; city traffic is noisier.
        const double noise_amp = cruise ? 10.0 : 30.0;
        const double ratio = cruise ? kCruiseRatio : city_ratio(v);
        double r = v > 0.0 || cruise
                       ? kIdleRpm + ratio * v + uniform_in(rng, -noise_amp, noise_amp)
                       : kIdleRpm + uniform_in(rng, -25.0, 25.0);
        r = std::clamp(r, 0.0, channel_range(Channel::rpm).hi);
        out.rpm.push_back(r);
    }
    return out;
}

UniformSeries to_uniform(const std::vector<double>& values, double t0, double dt) {
    UniformSeries s;
    s.t0 = t0;
    s.dt = dt;
    s.values.reserve(values.size());
    for (const auto v : values) s.values.emplace_back(v);
    return s;
}

std::vector<PidSample> to_samples(Channel channel, const std::vector<double>& values, double t0,
                                  double dt) {
    std::vector<PidSample> out;
    out.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        out.push_back(PidSample{channel, values[i], t0 + dt * static_cast<double>(i)});
    }
    return out;
}

}  // namespace canhmm
