#include "canhmm/detector.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "canhmm/stats.hpp"

namespace canhmm {

const char* score_mode_name(ScoreMode mode) {
    return mode == ScoreMode::predictive ? "predictive" : "max_posterior";
}

std::optional<ScoreMode> score_mode_from_name(std::string_view name) {
    if (name == "predictive") return ScoreMode::predictive;
    if (name == "max_posterior") return ScoreMode::max_posterior;
    return std::nullopt;
}

std::vector<double> score_window(const HmmModel& model, std::span<const int> symbols,
                                 ScoreMode mode) {
    const auto result = hmm_decode(model, symbols);
    if (mode == ScoreMode::predictive) return result.scaling;
    std::vector<double> scores(symbols.size(), 0.0);
    if (result.impossible()) return scores;
    for (std::size_t t = 0; t < symbols.size(); ++t) {
        scores[t] = *std::max_element(result.posteriors[t].begin(), result.posteriors[t].end());
    }
    return scores;
}

double calibrate_threshold(const HmmModel& model, std::span<const std::vector<int>> sequences,
                           int window, double quantile, double margin, ScoreMode mode) {
    if (window < 2) throw Error("calibrate_threshold: window must be >= 2");
    if (!(quantile >= 0.0 && quantile < 1.0)) {
        throw Error("calibrate_threshold: quantile must be in [0,1)");
    }
    if (!(margin > 0.0)) throw Error("calibrate_threshold: margin must be positive");

    std::vector<double> scores;
    for (const auto& seq : sequences) {
        for (std::size_t t = 0; t < seq.size(); ++t) {
            const std::size_t lo = t + 1 >= static_cast<std::size_t>(window) ? t + 1 - window : 0;
            const std::span<const int> slice(seq.data() + lo, t - lo + 1);
            scores.push_back(score_window(model, slice, mode).back());
        }
    }
    if (scores.empty()) throw Error("calibrate_threshold: no scorable windows");
    std::sort(scores.begin(), scores.end());
    return empirical_quantile(scores, quantile) * margin;
}

StreamDetector::StreamDetector(const HmmModel& model, DetectorConfig config)
    : model_(&model), config_(config) {
    require_valid(model);
    if (config_.window < 2) throw Error("detector window must be >= 2");
    if (!(config_.threshold > 0.0 && config_.threshold <= 1.0)) {
        throw Error("detector threshold must be in (0, 1]");
    }
}

void StreamDetector::reset() { window_.clear(); }

std::optional<AnomalyAlert> StreamDetector::push(int symbol, double timestamp) {
    const std::size_t index = position_++;

    if (symbol < 0 || symbol >= model_->num_symbols) {
        AnomalyAlert alert;
        alert.index = index;
        alert.timestamp = timestamp;
        alert.score = 0.0;
        alert.threshold = config_.threshold;
        alert.window_begin = index - window_.size();
        alert.window_end = index;
        alert.symbol = symbol;
        alert.unknown_symbol = true;
        alert.mode = config_.mode;
        window_.clear();  // context after corrupt input is meaningless
        return alert;
    }

    window_.push_back(symbol);
    while (window_.size() > static_cast<std::size_t>(config_.window)) window_.pop_front();

    const std::vector<int> symbols(window_.begin(), window_.end());
    const double score = score_window(*model_, symbols, config_.mode).back();

    if (!(score < config_.threshold)) return std::nullopt;

    AnomalyAlert alert;
    alert.index = index;
    alert.timestamp = timestamp;
    alert.score = score;
    alert.threshold = config_.threshold;
    alert.window_begin = index + 1 - window_.size();
    alert.window_end = index;
    alert.symbol = symbol;
    if (model_->alphabet) alert.channel_bins = model_->alphabet->decode_joint(symbol);
    alert.mode = config_.mode;
    return alert;
}

std::vector<AnomalyAlert> detect_stream(const HmmModel& model, const DetectorConfig& config,
                                        std::span<const SymbolRun> runs, double t0, double dt) {
    StreamDetector detector(model, config);
    std::vector<AnomalyAlert> alerts;
    for (const auto& run : runs) {
        detector.reset();
        for (std::size_t j = 0; j < run.symbols.size(); ++j) {
            const double ts = t0 + dt * static_cast<double>(run.start_grid + j + 1);
            if (auto alert = detector.push(run.symbols[j], ts)) {
                alerts.push_back(std::move(*alert));
            }
        }
    }
    return alerts;
}

std::string alert_to_json(const AnomalyAlert& alert, const HmmModel& model) {
    nlohmann::ordered_json doc;
    doc["t"] = alert.index;
    doc["ts"] = alert.timestamp;
    doc["score"] = alert.score;
    doc["threshold"] = alert.threshold;
    doc["window"] = {alert.window_begin, alert.window_end};
    auto channels = nlohmann::ordered_json::object();
    if (model.alphabet && !alert.channel_bins.empty()) {
        for (std::size_t c = 0; c < alert.channel_bins.size(); ++c) {
            const auto name =
                std::string(channel_name(model.alphabet->quantizers[c].channel)) + "_bin";
            channels[name] = alert.channel_bins[c];
        }
    }
    doc["channels"] = std::move(channels);
    doc["symbol"] = alert.symbol;
    if (alert.unknown_symbol) doc["unknown_symbol"] = true;
    doc["mode"] = score_mode_name(alert.mode);
    return doc.dump();
}

}  // namespace canhmm
