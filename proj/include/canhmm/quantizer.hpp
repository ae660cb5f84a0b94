#pragma once

#include <span>
#include <vector>

#include "canhmm/obd.hpp"

namespace canhmm {

enum class QuantizerScheme { quantile, fixed };

// Maps one channel's gradients onto bin indices. Edges are strictly
// increasing thresholds in physical units per grid step; bin i covers
// [edges[i-1], edges[i]) with virtual edges at +-infinity, so every finite
// gradient lands in exactly one of edges.size()+1 bins.
struct Quantizer {
    Channel channel = Channel::speed;
    std::vector<double> edges;

    int bin_count() const { return static_cast<int>(edges.size()) + 1; }

    // Monotone in the gradient. Throws on NaN / infinity.
    int quantize(double gradient) const;
};

// Builds a quantizer for a channel.
//
// quantile: edges at the k/bin_count sample quantiles of the training
// gradients, made antisymmetric around zero by averaging each quantile
// against its mirror, then deduplicated. Errors out (suggesting a smaller
// bin_count) when the data cannot support the requested number of distinct
// edges.
//
// fixed: takes `fixed_edges` verbatim; the gradients and bin_count arguments
// are ignored. Use this to reserve outer bins beyond the normal dynamics of
// a vehicle so that injected extremes map to symbols never seen in training.
Quantizer fit_quantizer(Channel channel, std::span<const double> gradients, int bin_count,
                        QuantizerScheme scheme, std::span<const double> fixed_edges = {});

}  // namespace canhmm
