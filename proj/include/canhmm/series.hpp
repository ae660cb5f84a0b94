#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "canhmm/obd.hpp"

namespace canhmm {

// A channel sampled on a regular time grid. Grid points too far from any
// real sample hold nullopt; downstream encoding treats them as breaks, not
// values to interpolate.
struct UniformSeries {
    double t0 = 0.0;
    double dt = 1.0;
    std::vector<std::optional<double>> values;

    std::size_t size() const { return values.size(); }
    double time_at(std::size_t i) const { return t0 + dt * static_cast<double>(i); }
};

// Snaps an irregular sample series onto the grid t0, t0+dt, ..., <= t1.
// Each grid point takes the nearest-in-time sample, ties resolved toward the
// earlier sample; a grid point farther than gap_limit*dt from every sample
// is marked missing. Requires a non-empty, timestamp-sorted input.
UniformSeries resample(std::span<const PidSample> samples, double dt, double t0, double t1,
                       double gap_limit = 2.0);

// Consecutive first differences of one series, split into independent runs
// wherever a grid point is missing (no difference is ever taken across a
// gap). `start` is the grid index of the run's first point, so values[j]
// spans grid points start+j -> start+j+1.
struct GradientRun {
    std::size_t start = 0;
    std::vector<double> values;
};

// Throws when the series has fewer than two points overall.
std::vector<GradientRun> gradient_runs(const UniformSeries& series);

// Series files: "ts,value" rows, 6-decimal fixed formatting, no header.
void write_series_csv(std::ostream& out, std::span<const PidSample> samples);
void write_series_csv_file(const std::string& path, std::span<const PidSample> samples);
std::vector<PidSample> read_series_csv(std::istream& in, Channel channel);
std::vector<PidSample> read_series_csv_file(const std::string& path, Channel channel);

}  // namespace canhmm
