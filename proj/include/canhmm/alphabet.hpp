#pragma once

#include <span>
#include <vector>

#include "canhmm/quantizer.hpp"
#include "canhmm/series.hpp"

namespace canhmm {

// Per-channel gradient quantizers plus the joint-symbol encoding. Channel
// order is part of the alphabet: the joint symbol is the mixed-radix
// row-major index with the first channel most significant.
struct ObservationAlphabet {
    std::vector<Quantizer> quantizers;
    double dt = 1.0;  // grid step the gradients are taken over, seconds

    std::size_t channel_count() const { return quantizers.size(); }

    // Product of per-channel bin counts.
    int symbol_count() const;

    // bins -> joint symbol in [0, symbol_count()). One entry per channel,
    // each within its quantizer's range; out-of-range throws.
    int encode_joint(std::span<const int> bins) const;

    // Exact inverse of encode_joint.
    std::vector<int> decode_joint(int symbol) const;
};

// A contiguous stretch of encoded observations. symbols[j] is the joint
// symbol of the gradients spanning grid points start_grid+j -> start_grid+j+1.
struct SymbolRun {
    std::size_t start_grid = 0;
    std::vector<int> symbols;
};

// Encodes aligned per-channel uniform series (one per alphabet channel, same
// grid) into joint symbol runs. A grid point missing on any channel splits
// the output; each contiguous stretch of L complete points yields L-1
// symbols.
std::vector<SymbolRun> encode_sequence(const ObservationAlphabet& alphabet,
                                       std::span<const UniformSeries> series);

std::size_t total_symbols(std::span<const SymbolRun> runs);

// Flattens runs into plain sequences for training.
std::vector<std::vector<int>> run_sequences(std::span<const SymbolRun> runs);

}  // namespace canhmm
