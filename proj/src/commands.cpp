#include "canhmm/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "canhmm/errors.hpp"

namespace canhmm {

namespace fs = std::filesystem;

namespace {

using ChannelSeries = std::map<Channel, std::vector<PidSample>>;

// Loads the configured channels from per-channel CSVs or CAN logs.
ChannelSeries load_channels(const RunConfig& config, std::span<const Channel> channels,
                            const std::map<Channel, std::string>& series_paths,
                            std::span<const std::string> log_paths) {
    ChannelSeries out;
    if (!series_paths.empty()) {
        for (const auto channel : channels) {
            const auto it = series_paths.find(channel);
            if (it == series_paths.end()) {
                throw ConfigError(std::string("no series file configured for channel ") +
                                  channel_name(channel));
            }
            out[channel] = read_series_csv_file(it->second, channel);
        }
        return out;
    }
    if (log_paths.empty()) {
        throw ConfigError("no input: configure io.series or io.logs");
    }
    std::vector<CanFrame> frames;
    for (const auto& path : log_paths) {
        auto part = read_can_log_file(path);
        frames.insert(frames.end(), part.begin(), part.end());
    }
    for (const auto channel : channels) {
        out[channel] =
            extract_channel_series(frames, channel, config.payload_layout, config.raw_id_rules);
    }
    return out;
}

// Channels resampled onto a shared grid covering the overlap of all inputs.
std::vector<UniformSeries> resample_channels(const RunConfig& config,
                                             std::span<const Channel> channels,
                                             const ChannelSeries& series) {
    double t0 = -std::numeric_limits<double>::infinity();
    double t1 = std::numeric_limits<double>::infinity();
    for (const auto channel : channels) {
        const auto& samples = series.at(channel);
        if (samples.empty()) {
            throw Error(std::string("no observations: channel ") + channel_name(channel) +
                        " has no decodable samples");
        }
        t0 = std::max(t0, samples.front().timestamp);
        t1 = std::min(t1, samples.back().timestamp);
    }
    if (t1 < t0) throw Error("no observations: channel series do not overlap in time");
    std::vector<UniformSeries> out;
    out.reserve(channels.size());
    for (const auto channel : channels) {
        out.push_back(resample(series.at(channel), config.dt, t0, t1, config.gap_limit));
    }
    return out;
}

ObservationAlphabet build_alphabet(const RunConfig& config, std::span<const Channel> channels,
                                   std::span<const UniformSeries> uniform) {
    ObservationAlphabet alphabet;
    alphabet.dt = config.dt;
    for (std::size_t c = 0; c < channels.size(); ++c) {
        const auto channel = channels[c];
        if (config.quantizer.scheme == QuantizerScheme::fixed) {
            const auto it = config.quantizer.edges.find(channel);
            if (it == config.quantizer.edges.end()) {
                throw ConfigError(std::string("fixed quantizer needs edges for channel ") +
                                  channel_name(channel));
            }
            alphabet.quantizers.push_back(
                fit_quantizer(channel, {}, 0, QuantizerScheme::fixed, it->second));
        } else {
            std::vector<double> gradients;
            for (const auto& run : gradient_runs(uniform[c])) {
                gradients.insert(gradients.end(), run.values.begin(), run.values.end());
            }
            if (gradients.empty()) {
                throw Error(std::string("no observations: channel ") + channel_name(channel) +
                            " yields no gradients");
            }
            alphabet.quantizers.push_back(fit_quantizer(channel, gradients, config.quantizer.bins,
                                                        QuantizerScheme::quantile));
        }
    }
    return alphabet;
}

void ensure_parent_dir(const std::string& path) {
    const auto parent = fs::path(path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
}

std::ofstream open_output(const std::string& path) {
    ensure_parent_dir(path);
    std::ofstream out(path);
    if (!out) throw Error("cannot open output file: " + path);
    return out;
}

void print_edges(std::ostream& out, const ObservationAlphabet& alphabet) {
    out << "channel        bins  edges\n";
    for (const auto& q : alphabet.quantizers) {
        char head[40];
        std::snprintf(head, sizeof head, "%-14s %4d  ", channel_name(q.channel), q.bin_count());
        out << head;
        for (std::size_t i = 0; i < q.edges.size(); ++i) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%s%.6g", i ? ", " : "", q.edges[i]);
            out << buf;
        }
        out << "\n";
    }
}

double resolve_threshold(const RunConfig& config, const HmmModel& model) {
    if (config.detector.threshold) return *config.detector.threshold;
    if (config.io.calibration_series.empty() && config.io.calibration_logs.empty()) {
        throw ConfigError(
            "no threshold: set detector.threshold or provide io.calibration_series / "
            "io.calibration_logs to calibrate against");
    }
    std::vector<Channel> channels;
    for (const auto& q : model.alphabet->quantizers) channels.push_back(q.channel);
    const auto series = load_channels(config, channels, config.io.calibration_series,
                                      config.io.calibration_logs);
    RunConfig grid_config = config;
    grid_config.dt = model.alphabet->dt;
    const auto uniform = resample_channels(grid_config, channels, series);
    const auto runs = encode_sequence(*model.alphabet, uniform);
    return calibrate_threshold(model, run_sequences(runs), config.detector.window,
                               config.detector.quantile, config.detector.margin,
                               config.detector.mode);
}

}  // namespace

int cmd_train(const RunConfig& config) {
    if (config.channels.empty()) throw ConfigError("channels must not be empty");
    if (config.io.model.empty()) throw ConfigError("io.model output path is required");

    const auto series = load_channels(config, config.channels, config.io.series, config.io.logs);
    const auto uniform = resample_channels(config, config.channels, series);
    const auto alphabet = build_alphabet(config, config.channels, uniform);
    const auto runs = encode_sequence(alphabet, uniform);
    const auto sequences = run_sequences(runs);
    if (total_symbols(runs) == 0) throw Error("no observations after encoding");

    TrainOptions options;
    options.num_states = config.hmm.states;
    options.max_iters = config.hmm.max_iters;
    options.tol = config.hmm.tol;
    options.restarts = config.hmm.restarts;
    options.seed = config.hmm.seed;
    options.prob_floor = config.hmm.prob_floor;
    auto trained = hmm_train(sequences, alphabet.symbol_count(), options);
    trained.model.alphabet = alphabet;

    const TrainingMeta meta{config.hmm.seed, trained.iterations, trained.loglik_trace.back()};
    ensure_parent_dir(config.io.model);
    save_model_file(config.io.model, trained.model, meta);

    if (!config.io.report.empty()) {
        nlohmann::ordered_json report;
        report["symbols"] = alphabet.symbol_count();
        report["observations"] = total_symbols(runs);
        report["sequences"] = sequences.size();
        report["restart_index"] = trained.restart_index;
        report["iterations"] = trained.iterations;
        report["final_loglik"] = trained.loglik_trace.back();
        report["loglik_trace"] = trained.loglik_trace;
        auto out = open_output(config.io.report);
        out << report.dump(2) << "\n";
    }

    std::cout << "trained " << config.hmm.states << "-state model over "
              << alphabet.symbol_count() << " symbols from " << total_symbols(runs)
              << " observations (" << sequences.size() << " sequences)\n";
    print_edges(std::cout, alphabet);
    std::cout << "restart " << trained.restart_index << ", " << trained.iterations
              << " iterations, final log-likelihood " << trained.loglik_trace.back() << "\n"
              << "model written to " << config.io.model << "\n";
    return kExitOk;
}

int cmd_detect(const RunConfig& config) {
    if (config.io.model.empty()) throw ConfigError("io.model is required");
    const auto loaded = load_model_file(config.io.model);
    const auto& model = loaded.model;
    if (!model.alphabet) throw ConfigError("model file has no alphabet; cannot encode input");

    std::vector<Channel> channels;
    for (const auto& q : model.alphabet->quantizers) channels.push_back(q.channel);

    // Input: per-channel series files, a log file, or stdin ("-").
    ChannelSeries series;
    if (!config.io.series.empty()) {
        series = load_channels(config, channels, config.io.series, {});
    } else if (!config.io.input.empty()) {
        std::vector<CanFrame> frames;
        if (config.io.input == "-") {
            frames = read_can_log(std::cin);
        } else {
            frames = read_can_log_file(config.io.input);
        }
        for (const auto channel : channels) {
            series[channel] = extract_channel_series(frames, channel, config.payload_layout,
                                                     config.raw_id_rules);
        }
    } else {
        throw ConfigError("no input: configure io.series or io.input");
    }
    for (const auto channel : channels) {
        if (series[channel].empty()) {
            throw ConfigError(std::string("schema mismatch: model requires channel ") +
                              channel_name(channel) + " but the input has no samples for it");
        }
    }

    RunConfig grid_config = config;
    grid_config.dt = model.alphabet->dt;  // the model's grid wins
    const auto uniform = resample_channels(grid_config, channels, series);
    const auto runs = encode_sequence(*model.alphabet, uniform);

    DetectorConfig detector;
    detector.window = config.detector.window;
    detector.mode = config.detector.mode;
    detector.threshold = resolve_threshold(config, model);

    const double t0 = uniform.empty() ? 0.0 : uniform[0].t0;
    const auto alerts = detect_stream(model, detector, runs, t0, model.alphabet->dt);

    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!config.io.alerts.empty() && config.io.alerts != "-") {
        file = open_output(config.io.alerts);
        out = &file;
    }
    for (const auto& alert : alerts) *out << alert_to_json(alert, model) << "\n";

    std::cerr << "scored " << total_symbols(runs) << " observations with threshold "
              << detector.threshold << ": " << alerts.size() << " alert(s)\n";
    return alerts.empty() ? kExitOk : kExitAlerts;
}

namespace {

void write_outcome_files(const RunConfig& config, const TableOutcome& outcome,
                         const TableEvalConfig& eval_config) {
    const auto dir = fs::path(config.io.out_dir);
    fs::create_directories(dir);
    if (outcome.mode == "table1") {
        auto csv = open_output((dir / "table1.csv").string());
        write_table1_csv(csv, outcome.sections.at(0), outcome.sections.at(1));
    } else if (outcome.mode == "table2") {
        auto csv = open_output((dir / "table2.csv").string());
        write_table2_csv(csv, outcome.sections.at(0));
    }
    auto report = open_output((dir / "report.json").string());
    write_report_json(report, outcome, eval_config);

    if (config.io.plot_data) {
        const auto base = simulate_drive(eval_config.base_steps, eval_config.base_seed,
                                         eval_config.profile, eval_config.dt);
        for (const auto& section : outcome.sections) {
            for (const auto& r : section.results) {
                const auto injected = inject_anomaly(base, r.row.scenario);
                for (const auto channel : section.channels) {
                    const auto name = outcome.mode + "_row" + std::to_string(r.row.no) + "_" +
                                      channel_name(channel) + ".csv";
                    auto plot = open_output((dir / name).string());
                    write_plot_csv(plot, base, injected, channel);
                }
            }
        }
    }
}

void print_outcome(const TableOutcome& outcome) {
    for (const auto& section : outcome.sections) {
        std::cout << "section";
        for (const auto channel : section.channels) std::cout << " " << channel_name(channel);
        char buf[64];
        std::snprintf(buf, sizeof buf, " (threshold %.3e):\n", section.threshold);
        std::cout << buf;
        for (const auto& r : section.results) {
            std::cout << "  row " << r.row.no << " "
                      << change_kind_name(r.row.scenario.speed.kind) << "/"
                      << change_kind_name(r.row.scenario.rpm.kind) << " alert="
                      << (r.alert_fired ? "True" : "False") << " expected="
                      << (r.expected ? "True" : "False") << " "
                      << (r.pass ? "pass" : "FAIL") << "\n";
        }
    }
    std::cout << (outcome.all_pass ? "all rows match the expected alert pattern\n"
                                   : "MISMATCH: some rows deviate from the expected pattern\n");
}

}  // namespace

int cmd_evaluate(const RunConfig& config) {
    if (config.io.out_dir.empty()) throw ConfigError("io.out_dir is required for evaluate");
    const auto eval_config = table_eval_config(config);

    TableOutcome outcome;
    if (config.evaluate.mode == "table1") {
        outcome = evaluate_table1(eval_config);
    } else if (config.evaluate.mode == "table2") {
        outcome = evaluate_table2(eval_config);
    } else {  // matrix
        if (config.io.model.empty()) throw ConfigError("matrix mode requires io.model");
        if (config.evaluate.matrix.empty()) throw ConfigError("matrix mode requires evaluate.matrix");
        const auto rows = read_matrix_csv_file(config.evaluate.matrix);
        auto loaded = load_model_file(config.io.model);
        if (!loaded.model.alphabet) throw ConfigError("matrix mode needs a model with an alphabet");

        const auto base = simulate_drive(config.evaluate.base_steps, config.evaluate.base_seed,
                                         config.simulate.profile, config.dt);
        DetectorConfig detector;
        detector.window = config.detector.window;
        detector.mode = config.detector.mode;
        detector.threshold = resolve_threshold(config, loaded.model);

        TableSection section;
        for (const auto& q : loaded.model.alphabet->quantizers) {
            section.channels.push_back(q.channel);
        }
        section.threshold = detector.threshold;
        section.final_loglik = loaded.meta.final_loglik;
        section.results = run_scenario_matrix(loaded.model, detector, base, rows);
        section.model = std::move(loaded.model);

        outcome.mode = "matrix";
        outcome.all_pass = true;
        for (const auto& r : section.results) outcome.all_pass = outcome.all_pass && r.pass;
        outcome.metrics = confusion_metrics(section.results);
        outcome.sections.push_back(std::move(section));

        const auto dir = fs::path(config.io.out_dir);
        fs::create_directories(dir);
        auto csv = open_output((dir / "matrix_results.csv").string());
        write_matrix_results_csv(csv, outcome.sections[0].results);
        auto report = open_output((dir / "report.json").string());
        write_report_json(report, outcome, eval_config);
        print_outcome(outcome);
        return outcome.all_pass ? kExitOk : kExitFailure;
    }

    write_outcome_files(config, outcome, eval_config);
    print_outcome(outcome);
    return outcome.all_pass ? kExitOk : kExitFailure;
}

int cmd_simulate(const RunConfig& config) {
    if (config.io.out_dir.empty() && config.io.series.empty()) {
        throw ConfigError("simulate needs io.out_dir or io.series output paths");
    }
    const auto drive = simulate_drive(config.simulate.steps, config.simulate.seed,
                                      config.simulate.profile, config.dt);
    for (const auto channel : {Channel::speed, Channel::rpm}) {
        std::string path;
        if (const auto it = config.io.series.find(channel); it != config.io.series.end()) {
            path = it->second;
        } else {
            path = (fs::path(config.io.out_dir) / (std::string(channel_name(channel)) + ".csv"))
                       .string();
        }
        ensure_parent_dir(path);
        write_series_csv_file(path,
                              to_samples(channel, drive.channel_values(channel), drive.t0,
                                         drive.dt));
        std::cout << channel_name(channel) << " -> " << path << "\n";
    }
    return kExitOk;
}

int cmd_inject(const RunConfig& config) {
    if (config.io.out_dir.empty()) throw ConfigError("inject needs io.out_dir");

    AnomalyScenario scenario;
    scenario.speed = {config.inject.speed_kind, config.inject.speed_magnitude};
    scenario.rpm = {config.inject.rpm_kind, config.inject.rpm_magnitude};
    scenario.position = config.inject.position;
    scenario.duration = config.inject.duration;

    // Base drive: configured series files when present, else simulation.
    DriveSeries base;
    if (!config.io.series.empty()) {
        const std::vector<Channel> channels = {Channel::speed, Channel::rpm};
        const auto series = load_channels(config, channels, config.io.series, {});
        const auto uniform = resample_channels(config, channels, series);
        base.t0 = uniform[0].t0;
        base.dt = config.dt;
        for (std::size_t i = 0; i < uniform[0].size(); ++i) {
            if (!uniform[0].values[i] || !uniform[1].values[i]) {
                throw Error("inject: input series have gaps; provide gap-free uniform series");
            }
            base.speed.push_back(*uniform[0].values[i]);
            base.rpm.push_back(*uniform[1].values[i]);
        }
    } else {
        base = simulate_drive(config.simulate.steps, config.simulate.seed,
                              config.simulate.profile, config.dt);
    }

    const auto injected = inject_anomaly(base, scenario);
    const auto dir = fs::path(config.io.out_dir);
    fs::create_directories(dir);
    for (const auto channel : {Channel::speed, Channel::rpm}) {
        const auto path = dir / (std::string(channel_name(channel)) + ".csv");
        write_series_csv_file(path.string(),
                              to_samples(channel, injected.channel_values(channel), injected.t0,
                                         injected.dt));
        std::cout << channel_name(channel) << " -> " << path.string() << "\n";
        if (config.io.plot_data) {
            const auto plot_path = dir / (std::string(channel_name(channel)) + "_plot.csv");
            auto plot = open_output(plot_path.string());
            write_plot_csv(plot, base, injected, channel);
            std::cout << channel_name(channel) << " plot -> " << plot_path.string() << "\n";
        }
    }
    return kExitOk;
}

int cmd_inspect_model(const RunConfig& config) {
    if (config.io.model.empty()) throw ConfigError("io.model is required");
    const auto loaded = load_model_file(config.io.model);
    const auto& model = loaded.model;

    std::cout << "states " << model.num_states << ", symbols " << model.num_symbols << "\n";
    std::cout << "training: seed " << loaded.meta.seed << ", " << loaded.meta.iterations
              << " iterations, final log-likelihood " << loaded.meta.final_loglik << "\n";
    if (model.alphabet) {
        std::cout << "grid dt " << model.alphabet->dt << " s\n";
        print_edges(std::cout, *model.alphabet);
    }
    char buf[32];
    std::cout << "initial:";
    for (const auto v : model.initial) {
        std::snprintf(buf, sizeof buf, " %.4f", v);
        std::cout << buf;
    }
    std::cout << "\ntransitions:\n";
    for (const auto& row : model.trans) {
        std::cout << " ";
        for (const auto v : row) {
            std::snprintf(buf, sizeof buf, " %.4f", v);
            std::cout << buf;
        }
        std::cout << "\n";
    }
    if (model.num_symbols <= 32) {
        std::cout << "emissions:\n";
        for (const auto& row : model.emis) {
            std::cout << " ";
            for (const auto v : row) {
                std::snprintf(buf, sizeof buf, " %.4f", v);
                std::cout << buf;
            }
            std::cout << "\n";
        }
    } else {
        std::cout << "emissions: " << model.num_states << "x" << model.num_symbols
                  << " matrix (per-state top symbols):\n";
        for (int i = 0; i < model.num_states; ++i) {
            std::vector<int> order(model.num_symbols);
            for (int k = 0; k < model.num_symbols; ++k) order[k] = k;
            std::partial_sort(order.begin(), order.begin() + 3, order.end(),
                              [&](int a, int b) { return model.emis[i][a] > model.emis[i][b]; });
            std::cout << "  state " << i << ":";
            for (int k = 0; k < 3; ++k) {
                std::snprintf(buf, sizeof buf, " %d(%.3f)", order[k], model.emis[i][order[k]]);
                std::cout << buf;
            }
            std::cout << "\n";
        }
    }
    return kExitOk;
}

}  // namespace canhmm
