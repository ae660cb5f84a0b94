#include "canhmm/alphabet.hpp"

#include <cmath>

#include "canhmm/errors.hpp"

namespace canhmm {

namespace {
constexpr long kMaxJointSymbols = 1000000;
}

int ObservationAlphabet::symbol_count() const {
    long m = 1;
    for (const auto& q : quantizers) {
        m *= q.bin_count();
        if (m > kMaxJointSymbols) {
            throw Error("alphabet: joint symbol count exceeds " +
                        std::to_string(kMaxJointSymbols) + "; use fewer bins or channels");
        }
    }
    return static_cast<int>(m);
}

int ObservationAlphabet::encode_joint(std::span<const int> bins) const {
    if (bins.size() != quantizers.size()) {
        throw Error("encode_joint: expected one bin per channel");
    }
    long s = 0;
    for (std::size_t c = 0; c < bins.size(); ++c) {
        const int n = quantizers[c].bin_count();
        if (bins[c] < 0 || bins[c] >= n) {
            throw Error("encode_joint: bin " + std::to_string(bins[c]) + " out of range for " +
                        channel_name(quantizers[c].channel));
        }
        s = s * n + bins[c];
    }
    return static_cast<int>(s);
}

std::vector<int> ObservationAlphabet::decode_joint(int symbol) const {
    if (symbol < 0 || symbol >= symbol_count()) {
        throw Error("decode_joint: symbol " + std::to_string(symbol) + " out of range");
    }
    std::vector<int> bins(quantizers.size(), 0);
    long s = symbol;
    for (std::size_t c = quantizers.size(); c-- > 0;) {
        const int n = quantizers[c].bin_count();
        bins[c] = static_cast<int>(s % n);
        s /= n;
    }
    return bins;
}

std::vector<SymbolRun> encode_sequence(const ObservationAlphabet& alphabet,
                                       std::span<const UniformSeries> series) {
    if (series.size() != alphabet.channel_count()) {
        throw Error("encode_sequence: expected one series per alphabet channel");
    }
    if (series.empty()) throw Error("encode_sequence: no channels");
    const auto n = series[0].size();
    for (const auto& s : series) {
        if (s.size() != n || std::abs(s.t0 - series[0].t0) > 1e-9 ||
            std::abs(s.dt - series[0].dt) > 1e-9) {
            throw Error("encode_sequence: channel series are not on the same grid");
        }
    }

    auto complete = [&](std::size_t i) {
        for (const auto& s : series) {
            if (!s.values[i]) return false;
        }
        return true;
    };

    std::vector<SymbolRun> runs;
    SymbolRun current;
    bool open = false;
    std::vector<int> bins(alphabet.channel_count());
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (complete(i) && complete(i + 1)) {
            for (std::size_t c = 0; c < series.size(); ++c) {
                const double g = *series[c].values[i + 1] - *series[c].values[i];
                bins[c] = alphabet.quantizers[c].quantize(g);
            }
            if (!open) {
                current.start_grid = i;
                current.symbols.clear();
                open = true;
            }
            current.symbols.push_back(alphabet.encode_joint(bins));
        } else if (open) {
            runs.push_back(std::move(current));
            current = SymbolRun{};
            open = false;
        }
    }
    if (open) runs.push_back(std::move(current));
    return runs;
}

std::size_t total_symbols(std::span<const SymbolRun> runs) {
    std::size_t n = 0;
    for (const auto& r : runs) n += r.symbols.size();
    return n;
}

std::vector<std::vector<int>> run_sequences(std::span<const SymbolRun> runs) {
    std::vector<std::vector<int>> out;
    out.reserve(runs.size());
    for (const auto& r : runs) out.push_back(r.symbols);
    return out;
}

}  // namespace canhmm
