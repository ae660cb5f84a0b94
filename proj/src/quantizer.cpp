#include "canhmm/quantizer.hpp"

#include <algorithm>
#include <cmath>

#include "canhmm/errors.hpp"
#include "canhmm/stats.hpp"

namespace canhmm {

int Quantizer::quantize(double gradient) const {
    if (!std::isfinite(gradient)) throw Error("quantize: gradient must be finite");
    const auto it = std::upper_bound(edges.begin(), edges.end(), gradient);
    return static_cast<int>(it - edges.begin());
}

Quantizer fit_quantizer(Channel channel, std::span<const double> gradients, int bin_count,
                        QuantizerScheme scheme, std::span<const double> fixed_edges) {
    Quantizer q;
    q.channel = channel;

    if (scheme == QuantizerScheme::fixed) {
        if (fixed_edges.empty()) throw ConfigError("fixed quantizer needs at least one edge");
        for (std::size_t i = 0; i < fixed_edges.size(); ++i) {
            if (!std::isfinite(fixed_edges[i])) throw ConfigError("fixed edges must be finite");
            if (i > 0 && !(fixed_edges[i] > fixed_edges[i - 1])) {
                throw ConfigError("fixed edges must be strictly increasing");
            }
        }
        q.edges.assign(fixed_edges.begin(), fixed_edges.end());
        return q;
    }

    if (bin_count < 2) throw Error("fit_quantizer: bin_count must be >= 2");
    if (gradients.empty()) throw Error("fit_quantizer: no training gradients");

    std::vector<double> sorted(gradients.begin(), gradients.end());
    std::sort(sorted.begin(), sorted.end());

    // Antisymmetric combination of each quantile with its mirror keeps the
    // edge set symmetric around zero while preserving order.
    std::vector<double> edges;
    edges.reserve(bin_count - 1);
    for (int k = 1; k < bin_count; ++k) {
        const double lo = empirical_quantile(sorted, static_cast<double>(k) / bin_count);
        const double hi = empirical_quantile(sorted, static_cast<double>(bin_count - k) / bin_count);
        edges.push_back(0.5 * (lo - hi));
    }
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    if (static_cast<int>(edges.size()) != bin_count - 1) {
        throw Error("fit_quantizer: training gradients cannot support " +
                    std::to_string(bin_count) + " bins for " + channel_name(channel) +
                    "; reduce bin_count");
    }
    q.edges = std::move(edges);
    return q;
}

}  // namespace canhmm
