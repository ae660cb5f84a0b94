#pragma once

#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "canhmm/hmm.hpp"

namespace canhmm {

// How each observation in a window is scored.
//   predictive:    the forward scaling factor c_t = P(o_t | earlier window
//                  observations) -- the default, and the mode the alert
//                  thresholds are calibrated for.
//   max_posterior: the largest per-time state posterior from a full window
//                  decode; kept as a secondary diagnostic view.
enum class ScoreMode { predictive, max_posterior };

const char* score_mode_name(ScoreMode mode);
std::optional<ScoreMode> score_mode_from_name(std::string_view name);

struct DetectorConfig {
    int window = 10;         // observations per sliding window, >= 2
    double threshold = 0.0;  // alert when a score drops strictly below
    ScoreMode mode = ScoreMode::predictive;
};

// Per-observation scores for one window of symbols. An impossible suffix
// scores 0 from the first impossible observation on; it never throws for
// in-range symbols.
std::vector<double> score_window(const HmmModel& model, std::span<const int> symbols,
                                 ScoreMode mode = ScoreMode::predictive);

// Sliding-window scores over whole validation sequences, pooled, reduced to
// a threshold: tau = margin * (q-quantile of scores); q = 0 uses the
// minimum. Scoring a fresh stream of the same traffic against this tau
// yields no alerts on the validation data itself by construction.
double calibrate_threshold(const HmmModel& model, std::span<const std::vector<int>> sequences,
                           int window, double quantile, double margin = 0.5,
                           ScoreMode mode = ScoreMode::predictive);

struct AnomalyAlert {
    std::size_t index = 0;      // observation position in the stream
    double timestamp = 0.0;     // grid time of the observation's later endpoint
    double score = 0.0;
    double threshold = 0.0;
    std::size_t window_begin = 0;  // stream span the score was conditioned on
    std::size_t window_end = 0;    // == index
    int symbol = -1;
    std::vector<int> channel_bins;  // decoded joint symbol; empty when unknown
    bool unknown_symbol = false;
    ScoreMode mode = ScoreMode::predictive;
};

// Scores each incoming observation against the model in the context of up
// to window-1 previous ones. Every observation is evaluated exactly once,
// as the newest element of its window, so a spike alerts at most once.
// Windows shorter than the configured size (stream start) are scored as-is.
// An out-of-range symbol produces an immediate zero-score alert flagged
// unknown_symbol and clears the context. Memory use is fixed by the window.
class StreamDetector {
public:
    StreamDetector(const HmmModel& model, DetectorConfig config);

    // Feeds one observation; returns the alert it triggered, if any.
    std::optional<AnomalyAlert> push(int symbol, double timestamp);

    // Forgets window context across a stream gap; the position keeps counting.
    void reset();

    std::size_t position() const { return position_; }

private:
    const HmmModel* model_;
    DetectorConfig config_;
    std::deque<int> window_;
    std::size_t position_ = 0;
};

// Batch pass over encoded runs: each run is an independent context (the
// window never spans a gap), observation indices are global across runs.
std::vector<AnomalyAlert> detect_stream(const HmmModel& model, const DetectorConfig& config,
                                        std::span<const SymbolRun> runs, double t0, double dt);

// One alert as a single-line JSON object.
std::string alert_to_json(const AnomalyAlert& alert, const HmmModel& model);

}  // namespace canhmm
