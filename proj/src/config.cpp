#include "canhmm/config.hpp"

#include <fstream>

#include <json.hpp>

#include "canhmm/errors.hpp"

namespace canhmm {

namespace {

using nlohmann::json;

[[noreturn]] void bad_key(const std::string& where, const std::string& what) {
    throw ConfigError("config " + where + ": " + what);
}

Channel parse_channel(const json& v, const std::string& where) {
    if (!v.is_string()) bad_key(where, "expected a channel name");
    const auto channel = channel_from_name(v.get<std::string>());
    if (!channel) bad_key(where, "unknown channel " + v.dump());
    return *channel;
}

template <typename T>
void take(const json& obj, const char* key, T& out, const std::string& where) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const std::exception& e) {
        bad_key(where + "." + key, e.what());
    }
}

void take_channel_map(const json& obj, const char* key, std::map<Channel, std::string>& out,
                      const std::string& where) {
    if (!obj.contains(key)) return;
    const auto& m = obj.at(key);
    if (!m.is_object()) bad_key(where + "." + key, "expected an object of channel -> path");
    for (const auto& [name, value] : m.items()) {
        const auto channel = channel_from_name(name);
        if (!channel) bad_key(where + "." + key, "unknown channel " + name);
        if (!value.is_string()) bad_key(where + "." + key, "path must be a string");
        out[*channel] = value.get<std::string>();
    }
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config file is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config root must be an object");

    RunConfig config;

    if (doc.contains("channels")) {
        config.channels.clear();
        for (const auto& v : doc.at("channels")) {
            config.channels.push_back(parse_channel(v, "channels"));
        }
        if (config.channels.empty()) bad_key("channels", "must not be empty");
    }
    take(doc, "dt", config.dt, "");
    take(doc, "gap_limit", config.gap_limit, "");
    if (doc.contains("payload_layout")) {
        const auto name = doc.at("payload_layout").get<std::string>();
        if (name == "bare") {
            config.payload_layout = PayloadLayout::bare;
        } else if (name == "length_prefixed") {
            config.payload_layout = PayloadLayout::length_prefixed;
        } else {
            bad_key("payload_layout", "expected bare or length_prefixed");
        }
    }
    if (doc.contains("raw_id_rules")) {
        for (const auto& r : doc.at("raw_id_rules")) {
            RawChannelRule rule;
            rule.id = r.at("id").get<std::uint32_t>();
            take(r, "extended", rule.extended, "raw_id_rules");
            rule.channel = parse_channel(r.at("channel"), "raw_id_rules.channel");
            take(r, "byte_offset", rule.byte_offset, "raw_id_rules");
            take(r, "byte_count", rule.byte_count, "raw_id_rules");
            take(r, "scale", rule.scale, "raw_id_rules");
            take(r, "offset", rule.offset, "raw_id_rules");
            if (rule.byte_count != 1 && rule.byte_count != 2) {
                bad_key("raw_id_rules", "byte_count must be 1 or 2");
            }
            config.raw_id_rules.push_back(rule);
        }
    }

    if (doc.contains("quantizer")) {
        const auto& q = doc.at("quantizer");
        if (q.contains("scheme")) {
            const auto name = q.at("scheme").get<std::string>();
            if (name == "quantile") {
                config.quantizer.scheme = QuantizerScheme::quantile;
            } else if (name == "fixed") {
                config.quantizer.scheme = QuantizerScheme::fixed;
            } else {
                bad_key("quantizer.scheme", "expected quantile or fixed");
            }
        }
        take(q, "bins", config.quantizer.bins, "quantizer");
        if (q.contains("edges")) {
            for (const auto& [name, edges] : q.at("edges").items()) {
                const auto channel = channel_from_name(name);
                if (!channel) bad_key("quantizer.edges", "unknown channel " + name);
                config.quantizer.edges[*channel] = edges.get<std::vector<double>>();
            }
        }
        if (config.quantizer.bins < 2) bad_key("quantizer.bins", "must be >= 2");
    }

    if (doc.contains("hmm")) {
        const auto& h = doc.at("hmm");
        take(h, "states", config.hmm.states, "hmm");
        take(h, "restarts", config.hmm.restarts, "hmm");
        take(h, "seed", config.hmm.seed, "hmm");
        take(h, "max_iters", config.hmm.max_iters, "hmm");
        take(h, "tol", config.hmm.tol, "hmm");
        take(h, "prob_floor", config.hmm.prob_floor, "hmm");
        if (config.hmm.states < 1) bad_key("hmm.states", "must be >= 1");
        if (config.hmm.restarts < 1) bad_key("hmm.restarts", "must be >= 1");
        if (config.hmm.max_iters < 1) bad_key("hmm.max_iters", "must be >= 1");
        if (!(config.hmm.tol > 0)) bad_key("hmm.tol", "must be positive");
    }

    if (doc.contains("detector")) {
        const auto& d = doc.at("detector");
        take(d, "window", config.detector.window, "detector");
        take(d, "quantile", config.detector.quantile, "detector");
        take(d, "margin", config.detector.margin, "detector");
        if (d.contains("score_mode")) {
            const auto mode = score_mode_from_name(d.at("score_mode").get<std::string>());
            if (!mode) bad_key("detector.score_mode", "expected predictive or max_posterior");
            config.detector.mode = *mode;
        }
        if (d.contains("threshold") && !d.at("threshold").is_null()) {
            config.detector.threshold = d.at("threshold").get<double>();
            if (!(*config.detector.threshold > 0.0 && *config.detector.threshold <= 1.0)) {
                bad_key("detector.threshold", "must be in (0, 1]");
            }
        }
        if (config.detector.window < 2) bad_key("detector.window", "must be >= 2");
        if (!(config.detector.quantile >= 0.0 && config.detector.quantile < 1.0)) {
            bad_key("detector.quantile", "must be in [0, 1)");
        }
        if (!(config.detector.margin > 0.0)) bad_key("detector.margin", "must be positive");
    }

    if (doc.contains("simulate")) {
        const auto& s = doc.at("simulate");
        if (s.contains("profile")) {
            const auto profile = drive_profile_from_name(s.at("profile").get<std::string>());
            if (!profile) bad_key("simulate.profile", "expected idle, city, or cruise");
            config.simulate.profile = *profile;
        }
        take(s, "steps", config.simulate.steps, "simulate");
        take(s, "seed", config.simulate.seed, "simulate");
        if (config.simulate.steps < 2) bad_key("simulate.steps", "must be >= 2");
    }

    if (doc.contains("evaluate")) {
        const auto& e = doc.at("evaluate");
        take(e, "mode", config.evaluate.mode, "evaluate");
        if (config.evaluate.mode != "table1" && config.evaluate.mode != "table2" &&
            config.evaluate.mode != "matrix") {
            bad_key("evaluate.mode", "expected table1, table2, or matrix");
        }
        take(e, "train_steps", config.evaluate.train_steps, "evaluate");
        take(e, "val_steps", config.evaluate.val_steps, "evaluate");
        take(e, "base_steps", config.evaluate.base_steps, "evaluate");
        take(e, "train_seed", config.evaluate.train_seed, "evaluate");
        take(e, "val_seed", config.evaluate.val_seed, "evaluate");
        take(e, "base_seed", config.evaluate.base_seed, "evaluate");
        take(e, "position", config.evaluate.position, "evaluate");
        take(e, "sudden_duration", config.evaluate.sudden_duration, "evaluate");
        take(e, "gradual_duration", config.evaluate.gradual_duration, "evaluate");
        take(e, "speed_magnitude", config.evaluate.speed_magnitude, "evaluate");
        take(e, "rpm_magnitude", config.evaluate.rpm_magnitude, "evaluate");
        take(e, "matrix", config.evaluate.matrix, "evaluate");
    }

    if (doc.contains("inject")) {
        const auto& i = doc.at("inject");
        auto take_kind = [&](const char* key, ChangeKind& out) {
            if (!i.contains(key)) return;
            const auto kind = change_kind_from_name(i.at(key).get<std::string>());
            if (!kind) bad_key(std::string("inject.") + key, "unknown change kind");
            out = *kind;
        };
        take_kind("speed_kind", config.inject.speed_kind);
        take_kind("rpm_kind", config.inject.rpm_kind);
        take(i, "speed_magnitude", config.inject.speed_magnitude, "inject");
        take(i, "rpm_magnitude", config.inject.rpm_magnitude, "inject");
        take(i, "position", config.inject.position, "inject");
        take(i, "duration", config.inject.duration, "inject");
    }

    if (doc.contains("io")) {
        const auto& io = doc.at("io");
        take(io, "logs", config.io.logs, "io");
        take_channel_map(io, "series", config.io.series, "io");
        take(io, "input", config.io.input, "io");
        take_channel_map(io, "calibration_series", config.io.calibration_series, "io");
        take(io, "calibration_logs", config.io.calibration_logs, "io");
        take(io, "model", config.io.model, "io");
        take(io, "alerts", config.io.alerts, "io");
        take(io, "report", config.io.report, "io");
        take(io, "out_dir", config.io.out_dir, "io");
        take(io, "plot_data", config.io.plot_data, "io");
    }

    if (!(config.dt > 0.0)) bad_key("dt", "must be positive");
    if (!(config.gap_limit > 0.0)) bad_key("gap_limit", "must be positive");
    return config;
}

TableEvalConfig table_eval_config(const RunConfig& config) {
    TableEvalConfig out;
    out.profile = config.simulate.profile;
    out.train_steps = config.evaluate.train_steps;
    out.val_steps = config.evaluate.val_steps;
    out.base_steps = config.evaluate.base_steps;
    out.train_seed = config.evaluate.train_seed;
    out.val_seed = config.evaluate.val_seed;
    out.base_seed = config.evaluate.base_seed;
    out.dt = config.dt;
    if (auto it = config.quantizer.edges.find(Channel::speed); it != config.quantizer.edges.end()) {
        out.speed_edges = it->second;
    }
    if (auto it = config.quantizer.edges.find(Channel::rpm); it != config.quantizer.edges.end()) {
        out.rpm_edges = it->second;
    }
    out.states = config.hmm.states;
    out.restarts = config.hmm.restarts;
    out.hmm_seed = config.hmm.seed;
    out.max_iters = config.hmm.max_iters;
    out.tol = config.hmm.tol;
    out.prob_floor = config.hmm.prob_floor;
    out.window = config.detector.window;
    out.quantile = config.detector.quantile;
    out.margin = config.detector.margin;
    out.threshold = config.detector.threshold;
    out.mode = config.detector.mode;
    out.position = config.evaluate.position;
    out.sudden_duration = config.evaluate.sudden_duration;
    out.gradual_duration = config.evaluate.gradual_duration;
    out.speed_magnitude = config.evaluate.speed_magnitude;
    out.rpm_magnitude = config.evaluate.rpm_magnitude;
    return out;
}

}  // namespace canhmm
