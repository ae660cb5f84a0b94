#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "canhmm/alphabet.hpp"
#include "canhmm/errors.hpp"

namespace canhmm {

// Discrete-observation hidden Markov model.
//   trans[i][j] = P(state j at t | state i at t-1)
//   emis[i][k]  = P(symbol k | state i)
// The alphabet, when present, records how joint symbols were built and must
// agree with num_symbols.
struct HmmModel {
    int num_states = 0;   // N
    int num_symbols = 0;  // M
    std::vector<double> initial;
    std::vector<std::vector<double>> trans;
    std::vector<std::vector<double>> emis;
    std::optional<ObservationAlphabet> alphabet;
};

// Full invariant check; empty result means valid. Rows of trans/emis and the
// initial distribution must each sum to 1 within 1e-12 with non-negative
// entries; N >= 1, M >= 2; alphabet symbol count must match when embedded.
std::vector<std::string> validate_model(const HmmModel& model);

// Throws ValidationError listing every violation.
void require_valid(const HmmModel& model);

// Result of the scaled forward-backward pass.
//   scaling[t]     = P(o_t | o_0..o_{t-1}), the per-step predictive score
//   posteriors[t]  = P(state | all observations), rows sum to 1
//   log_likelihood = sum of log scaling
// A sequence the model cannot produce yields -inf log likelihood with zero
// scaling from the first impossible step on; posteriors are then all zero.
struct DecodeResult {
    double log_likelihood = 0.0;
    std::vector<double> scaling;
    std::vector<std::vector<double>> posteriors;

    bool impossible() const;
};

struct GeneratedSequence {
    std::vector<int> states;
    std::vector<int> symbols;
};

// Samples a state path from the initial/transition distributions and a
// symbol per state from the emissions. Sampling is pinned: std::mt19937_64
// seeded with `seed`, one uniform draw per state then one per symbol, each
// mapped through a cumulative scan (see rand.hpp). Identical seeds give
// identical output on every platform.
GeneratedSequence hmm_generate(const HmmModel& model, std::size_t length, std::uint64_t seed);

// Supervised estimation from an aligned state/symbol pair: transition and
// emission row counts, normalized. Rows with no visits become uniform.
// pseudocount > 0 adds Laplace smoothing to every count.
HmmModel hmm_estimate(std::span<const int> states, std::span<const int> symbols, int num_states,
                      int num_symbols, double pseudocount = 0.0);

// Scaled forward-backward. Stable for sequences of 1e5+ observations; all
// arithmetic stays on per-step normalized quantities.
DecodeResult hmm_decode(const HmmModel& model, std::span<const int> symbols);

// Most probable state path in log space. Ties break toward the lower state
// index at each backtrack step. Throws ImpossibleSequenceError when no path
// has positive probability.
std::vector<int> hmm_viterbi(const HmmModel& model, std::span<const int> symbols);

struct TrainOptions {
    int num_states = 5;
    int max_iters = 500;
    double tol = 1e-6;  // stop when the log-likelihood improves by less
    int restarts = 5;
    std::uint64_t seed = 0;  // restart r uses seed + r
    double prob_floor = 1e-6;
    std::optional<HmmModel> init;  // used by restart 0 when provided
};

struct TrainResult {
    HmmModel model;
    std::vector<double> loglik_trace;  // winning restart, one entry per evaluation
    std::vector<std::vector<double>> all_traces;
    int restart_index = 0;
    int iterations = 0;  // EM updates performed by the winning restart
};

// Baum-Welch over one or more symbol sequences, expected counts pooled
// across sequences. Each M-step maximizes subject to every probability
// staying >= prob_floor (renormalized water-filling), so unseen symbols keep
// a tiny scorable mass and the per-iteration log-likelihood never decreases.
// With restarts > 1 the restart with the highest final log-likelihood wins.
TrainResult hmm_train(std::span<const std::vector<int>> sequences, int num_symbols,
                      const TrainOptions& options);

}  // namespace canhmm
