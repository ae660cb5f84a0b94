#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "canhmm/series.hpp"

namespace canhmm {

// Seeded synthetic drives on a uniform grid, standing in for recorded
// vehicle logs. Speed moves as piecewise ramp-and-cruise segments with a
// per-step change of at most 3 km/h; rpm follows speed through a
// gear-dependent affine map plus bounded noise, so consecutive rpm steps
// stay within 300 rev/min except across gear shifts (within 800).
//
//   idle:   parked, speed 0, rpm around 800
//   city:   0-60 km/h with full stops and gear shifts
//   cruise: 60-105 km/h, single gear, never stops; starts with a fixed
//           settling stretch at 80 km/h so encoded streams open calmly
enum class DriveProfile { idle, city, cruise };

const char* drive_profile_name(DriveProfile profile);
std::optional<DriveProfile> drive_profile_from_name(std::string_view name);

struct DriveSeries {
    double t0 = 0.0;
    double dt = 1.0;
    std::vector<double> speed;  // km/h
    std::vector<double> rpm;    // rev/min

    std::size_t size() const { return speed.size(); }
    const std::vector<double>& channel_values(Channel channel) const;
    std::vector<double>& channel_values(Channel channel);
};

// Same seed, same profile -> identical series, on every platform.
DriveSeries simulate_drive(std::size_t steps, std::uint64_t seed, DriveProfile profile,
                           double dt = 1.0);

// Adapters into the encoding pipeline.
UniformSeries to_uniform(const std::vector<double>& values, double t0, double dt);
std::vector<PidSample> to_samples(Channel channel, const std::vector<double>& values, double t0,
                                  double dt);

}  // namespace canhmm
