#pragma once

#include <cmath>
#include <span>

#include "canhmm/errors.hpp"

namespace canhmm {

// Empirical quantile over an ascending-sorted sample. Uses the convention
// where a cut landing exactly on the boundary between two order statistics
// averages them; otherwise the containing order statistic is returned.
// q = 0 yields the minimum, q -> 1 the maximum.
inline double empirical_quantile(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw Error("empirical_quantile: empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw Error("empirical_quantile: q outside [0,1]");
    const auto n = sorted.size();
    double h = q * static_cast<double>(n);
    // Snap away float fuzz like 1/3 * 3 = 0.999...8 before the boundary test.
    const double hr = std::round(h);
    if (std::abs(h - hr) < 1e-9) h = hr;
    if (h <= 0.0) return sorted.front();
    if (h >= static_cast<double>(n)) return sorted.back();
    const auto i = static_cast<std::size_t>(h);
    if (h == static_cast<double>(i) && i >= 1) {
        return 0.5 * (sorted[i - 1] + sorted[i]);
    }
    return sorted[i];
}

}  // namespace canhmm
