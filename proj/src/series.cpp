#include "canhmm/series.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include "canhmm/errors.hpp"

namespace canhmm {

UniformSeries resample(std::span<const PidSample> samples, double dt, double t0, double t1,
                       double gap_limit) {
    if (samples.empty()) throw Error("resample: empty series");
    if (!(dt > 0.0)) throw Error("resample: dt must be positive");
    if (t1 < t0) throw Error("resample: t1 < t0");
    if (!std::is_sorted(samples.begin(), samples.end(), [](const auto& a, const auto& b) {
            return a.timestamp < b.timestamp;
        })) {
        throw Error("resample: input series not timestamp-sorted");
    }

    UniformSeries out;
    out.t0 = t0;
    out.dt = dt;
    const auto n = static_cast<std::size_t>(std::floor((t1 - t0) / dt + 1e-9)) + 1;
    out.values.reserve(n);

    std::size_t j = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = t0 + dt * static_cast<double>(i);
        // Strict < keeps the earlier sample on distance ties.
        while (j + 1 < samples.size() &&
               std::abs(samples[j + 1].timestamp - t) < std::abs(samples[j].timestamp - t)) {
            ++j;
        }
        if (std::abs(samples[j].timestamp - t) > gap_limit * dt) {
            out.values.emplace_back(std::nullopt);
        } else {
            out.values.emplace_back(samples[j].value);
        }
    }
    return out;
}

std::vector<GradientRun> gradient_runs(const UniformSeries& series) {
    if (series.size() < 2) throw Error("gradient_runs: need at least two grid points");
    std::vector<GradientRun> runs;
    GradientRun current;
    bool open = false;
    for (std::size_t i = 0; i + 1 < series.size(); ++i) {
        if (series.values[i] && series.values[i + 1]) {
            if (!open) {
                current.start = i;
                current.values.clear();
                open = true;
            }
            current.values.push_back(*series.values[i + 1] - *series.values[i]);
        } else if (open) {
            runs.push_back(std::move(current));
            current = GradientRun{};
            open = false;
        }
    }
    if (open) runs.push_back(std::move(current));
    return runs;
}

void write_series_csv(std::ostream& out, std::span<const PidSample> samples) {
    char buf[64];
    for (const auto& s : samples) {
        std::snprintf(buf, sizeof buf, "%.6f,%.6f\n", s.timestamp, s.value);
        out << buf;
    }
}

void write_series_csv_file(const std::string& path, std::span<const PidSample> samples) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open series file for writing: " + path);
    write_series_csv(out, samples);
}

std::vector<PidSample> read_series_csv(std::istream& in, Channel channel) {
    std::vector<PidSample> out;
    const auto range = channel_range(channel);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view(line);
        while (!view.empty() && (view.back() == '\r' || view.back() == ' ')) view.remove_suffix(1);
        if (view.empty()) continue;
        const auto comma = view.find(',');
        if (comma == std::string_view::npos) {
            throw Error("series line " + std::to_string(line_no) + ": expected ts,value");
        }
        double ts = 0.0, value = 0.0;
        auto r1 = std::from_chars(view.data(), view.data() + comma, ts);
        auto r2 = std::from_chars(view.data() + comma + 1, view.data() + view.size(), value);
        if (r1.ec != std::errc() || r2.ec != std::errc() ||
            r1.ptr != view.data() + comma || r2.ptr != view.data() + view.size()) {
            throw Error("series line " + std::to_string(line_no) + ": bad number");
        }
        if (!range.contains(value)) {
            throw Error("series line " + std::to_string(line_no) + ": " +
                        channel_name(channel) + " value " + std::to_string(value) +
                        " outside decodable range");
        }
        out.push_back(PidSample{channel, value, ts});
    }
    return out;
}

std::vector<PidSample> read_series_csv_file(const std::string& path, Channel channel) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open series file: " + path);
    return read_series_csv(in, channel);
}

}  // namespace canhmm
