// canhmm: learns a hidden Markov model of normal vehicle telemetry from CAN
// bus logs and flags anomalous states online by sliding-window probability
// scoring. Subcommands cover the whole loop: simulate, train, inject,
// detect, evaluate, inspect-model.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "canhmm/commands.hpp"
#include "canhmm/errors.hpp"

using namespace canhmm;

namespace {

struct CliOverrides {
    std::optional<std::string> config_path;
    std::optional<std::vector<std::string>> logs;
    std::optional<std::vector<std::string>> series;  // channel=path
    std::optional<std::vector<std::string>> calibration_series;
    std::optional<std::string> input;
    std::optional<std::string> model;
    std::optional<std::string> alerts;
    std::optional<std::string> report;
    std::optional<std::string> out_dir;
    std::optional<bool> plot_data;
    std::optional<double> threshold;
    std::optional<int> window;
    std::optional<double> quantile;
    std::optional<double> margin;
    std::optional<std::string> score_mode;
    std::optional<int> states;
    std::optional<int> restarts;
    std::optional<std::uint64_t> hmm_seed;
    std::optional<std::string> scheme;
    std::optional<int> bins;
    std::optional<double> dt;
    std::optional<std::string> profile;
    std::optional<std::size_t> steps;
    std::optional<std::uint64_t> sim_seed;
    std::optional<std::string> eval_mode;
    std::optional<std::string> matrix;
    std::optional<std::uint64_t> train_seed, val_seed, base_seed;
    std::optional<std::string> speed_kind, rpm_kind;
    std::optional<double> speed_magnitude, rpm_magnitude;
    std::optional<std::size_t> position, duration;
};

std::map<Channel, std::string> parse_channel_paths(const std::vector<std::string>& entries) {
    std::map<Channel, std::string> out;
    for (const auto& entry : entries) {
        const auto eq = entry.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("expected channel=path, got: " + entry);
        }
        const auto channel = channel_from_name(entry.substr(0, eq));
        if (!channel) throw ConfigError("unknown channel in: " + entry);
        out[*channel] = entry.substr(eq + 1);
    }
    return out;
}

RunConfig assemble(const CliOverrides& cli) {
    RunConfig config;
    if (cli.config_path) config = load_run_config(*cli.config_path);

    if (cli.logs) config.io.logs = *cli.logs;
    if (cli.series) config.io.series = parse_channel_paths(*cli.series);
    if (cli.calibration_series) {
        config.io.calibration_series = parse_channel_paths(*cli.calibration_series);
    }
    if (cli.input) config.io.input = *cli.input;
    if (cli.model) config.io.model = *cli.model;
    if (cli.alerts) config.io.alerts = *cli.alerts;
    if (cli.report) config.io.report = *cli.report;
    if (cli.out_dir) config.io.out_dir = *cli.out_dir;
    if (cli.plot_data) config.io.plot_data = *cli.plot_data;

    if (cli.threshold) config.detector.threshold = *cli.threshold;
    if (cli.window) config.detector.window = *cli.window;
    if (cli.quantile) config.detector.quantile = *cli.quantile;
    if (cli.margin) config.detector.margin = *cli.margin;
    if (cli.score_mode) {
        const auto mode = score_mode_from_name(*cli.score_mode);
        if (!mode) throw ConfigError("unknown score mode: " + *cli.score_mode);
        config.detector.mode = *mode;
    }

    if (cli.states) config.hmm.states = *cli.states;
    if (cli.restarts) config.hmm.restarts = *cli.restarts;
    if (cli.hmm_seed) config.hmm.seed = *cli.hmm_seed;

    if (cli.scheme) {
        if (*cli.scheme == "quantile") {
            config.quantizer.scheme = QuantizerScheme::quantile;
        } else if (*cli.scheme == "fixed") {
            config.quantizer.scheme = QuantizerScheme::fixed;
        } else {
            throw ConfigError("unknown quantizer scheme: " + *cli.scheme);
        }
    }
    if (cli.bins) config.quantizer.bins = *cli.bins;
    if (cli.dt) config.dt = *cli.dt;

    if (cli.profile) {
        const auto profile = drive_profile_from_name(*cli.profile);
        if (!profile) throw ConfigError("unknown profile: " + *cli.profile);
        config.simulate.profile = *profile;
    }
    if (cli.steps) config.simulate.steps = *cli.steps;
    if (cli.sim_seed) config.simulate.seed = *cli.sim_seed;

    if (cli.eval_mode) config.evaluate.mode = *cli.eval_mode;
    if (cli.matrix) config.evaluate.matrix = *cli.matrix;
    if (cli.train_seed) config.evaluate.train_seed = *cli.train_seed;
    if (cli.val_seed) config.evaluate.val_seed = *cli.val_seed;
    if (cli.base_seed) config.evaluate.base_seed = *cli.base_seed;

    auto kind_of = [](const std::string& name) {
        const auto kind = change_kind_from_name(name);
        if (!kind) throw ConfigError("unknown change kind: " + name);
        return *kind;
    };
    if (cli.speed_kind) config.inject.speed_kind = kind_of(*cli.speed_kind);
    if (cli.rpm_kind) config.inject.rpm_kind = kind_of(*cli.rpm_kind);
    if (cli.speed_magnitude) config.inject.speed_magnitude = *cli.speed_magnitude;
    if (cli.rpm_magnitude) config.inject.rpm_magnitude = *cli.rpm_magnitude;
    if (cli.position) config.inject.position = *cli.position;
    if (cli.duration) config.inject.duration = *cli.duration;
    return config;
}

void add_common(CLI::App* cmd, CliOverrides& cli) {
    cmd->add_option("--config", cli.config_path, "JSON config file; flags override its keys");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hidden Markov model anomaly detection for CAN bus telemetry"};
    app.require_subcommand(1);

    CliOverrides cli;

    auto* train = app.add_subcommand("train", "fit a model from logs or series files");
    add_common(train, cli);
    train->add_option("--logs", cli.logs, "CAN log files (format A or CSV)");
    train->add_option("--series", cli.series, "per-channel CSV inputs, channel=path");
    train->add_option("--model", cli.model, "model output path");
    train->add_option("--report", cli.report, "training report JSON path");
    train->add_option("--states", cli.states, "hidden state count");
    train->add_option("--restarts", cli.restarts, "training restarts");
    train->add_option("--seed", cli.hmm_seed, "training seed");
    train->add_option("--scheme", cli.scheme, "quantizer scheme: quantile or fixed");
    train->add_option("--bins", cli.bins, "bins per channel for the quantile scheme");
    train->add_option("--dt", cli.dt, "resampling grid step, seconds");

    auto* detect = app.add_subcommand("detect", "score a stream and emit alerts");
    add_common(detect, cli);
    detect->add_option("--model", cli.model, "trained model file");
    detect->add_option("--input", cli.input, "CAN log path, or - for stdin");
    detect->add_option("--series", cli.series, "per-channel CSV inputs, channel=path");
    detect->add_option("--alerts", cli.alerts, "alert JSONL output, - for stdout");
    detect->add_option("--threshold", cli.threshold, "explicit alert threshold");
    detect->add_option("--calibration-series", cli.calibration_series,
                       "normal data to calibrate the threshold on, channel=path");
    detect->add_option("--window", cli.window, "sliding window length");
    detect->add_option("--quantile", cli.quantile, "calibration quantile");
    detect->add_option("--margin", cli.margin, "calibration margin");
    detect->add_option("--score-mode", cli.score_mode, "predictive or max_posterior");

    auto* evaluate = app.add_subcommand("evaluate", "reproduce the scenario tables");
    add_common(evaluate, cli);
    evaluate->add_option("--mode", cli.eval_mode, "table1, table2, or matrix");
    evaluate->add_option("--out-dir", cli.out_dir, "directory for CSV/JSON reports");
    evaluate->add_option("--matrix", cli.matrix, "scenario matrix CSV (mode=matrix)");
    evaluate->add_option("--model", cli.model, "model file (mode=matrix)");
    evaluate->add_option("--threshold", cli.threshold, "explicit alert threshold");
    evaluate->add_option("--calibration-series", cli.calibration_series,
                         "normal data to calibrate the threshold on, channel=path");
    evaluate->add_option("--train-seed", cli.train_seed, "training drive seed");
    evaluate->add_option("--val-seed", cli.val_seed, "calibration drive seed");
    evaluate->add_option("--base-seed", cli.base_seed, "injection drive seed");
    evaluate->add_flag("--plot-data", cli.plot_data, "emit t,value,is_injected CSVs");

    auto* simulate = app.add_subcommand("simulate", "generate a synthetic drive");
    add_common(simulate, cli);
    simulate->add_option("--steps", cli.steps, "grid steps to generate");
    simulate->add_option("--seed", cli.sim_seed, "simulation seed");
    simulate->add_option("--profile", cli.profile, "idle, city, or cruise");
    simulate->add_option("--out-dir", cli.out_dir, "output directory for series CSVs");
    simulate->add_option("--series", cli.series, "explicit output paths, channel=path");
    simulate->add_option("--dt", cli.dt, "grid step, seconds");

    auto* inject = app.add_subcommand("inject", "inject an anomaly into a drive");
    add_common(inject, cli);
    inject->add_option("--series", cli.series, "base series inputs, channel=path");
    inject->add_option("--steps", cli.steps, "simulated base length when no series given");
    inject->add_option("--seed", cli.sim_seed, "simulated base seed");
    inject->add_option("--profile", cli.profile, "simulated base profile");
    inject->add_option("--speed-kind", cli.speed_kind, "speed change kind");
    inject->add_option("--speed-magnitude", cli.speed_magnitude, "speed change, km/h");
    inject->add_option("--rpm-kind", cli.rpm_kind, "rpm change kind");
    inject->add_option("--rpm-magnitude", cli.rpm_magnitude, "rpm change, rev/min");
    inject->add_option("--position", cli.position, "grid index of the injection");
    inject->add_option("--duration", cli.duration, "injection duration, steps");
    inject->add_option("--out-dir", cli.out_dir, "output directory");
    inject->add_flag("--plot-data", cli.plot_data, "also write t,value,is_injected CSVs");

    auto* inspect = app.add_subcommand("inspect-model", "print a model's parameters");
    add_common(inspect, cli);
    inspect->add_option("--model", cli.model, "model file");

    CLI11_PARSE(app, argc, argv);

    try {
        const auto config = assemble(cli);
        if (train->parsed()) return cmd_train(config);
        if (detect->parsed()) return cmd_detect(config);
        if (evaluate->parsed()) return cmd_evaluate(config);
        if (simulate->parsed()) return cmd_simulate(config);
        if (inject->parsed()) return cmd_inject(config);
        if (inspect->parsed()) return cmd_inspect_model(config);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitConfig;
}
