#include "canhmm/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "canhmm/errors.hpp"

namespace canhmm {

namespace {

AnomalyScenario single_channel_scenario(Channel channel, ChangeKind kind, double magnitude,
                                        std::size_t position, std::size_t duration) {
    AnomalyScenario s;
    ChannelChange change{kind, kind == ChangeKind::normal ? 0.0 : magnitude};
    if (channel == Channel::speed) {
        s.speed = change;
    } else if (channel == Channel::rpm) {
        s.rpm = change;
    } else {
        throw Error("table scenarios support speed and rpm only");
    }
    s.position = position;
    s.duration = duration;
    return s;
}

std::vector<UniformSeries> drive_to_series(const DriveSeries& drive,
                                           std::span<const Channel> channels) {
    std::vector<UniformSeries> out;
    out.reserve(channels.size());
    for (const auto channel : channels) {
        out.push_back(to_uniform(drive.channel_values(channel), drive.t0, drive.dt));
    }
    return out;
}

std::string bool_name(bool v) { return v ? "True" : "False"; }

// Glyph-free kind labels for the result tables.
std::string kind_label(ChangeKind kind) { return change_kind_name(kind); }

nlohmann::ordered_json scenario_json(const ScenarioResult& r) {
    nlohmann::ordered_json row;
    row["no"] = r.row.no;
    row["speed_kind"] = change_kind_name(r.row.scenario.speed.kind);
    row["speed_magnitude"] = r.row.scenario.speed.magnitude;
    row["rpm_kind"] = change_kind_name(r.row.scenario.rpm.kind);
    row["rpm_magnitude"] = r.row.scenario.rpm.magnitude;
    row["position"] = r.row.scenario.position;
    row["duration"] = r.row.scenario.duration;
    row["expected_alert"] = r.expected;
    row["alert_fired"] = r.alert_fired;
    row["stray_alerts"] = r.stray_alerts;
    row["pass"] = r.pass;
    if (r.first_alert_index) {
        row["first_alert_index"] = *r.first_alert_index;
        row["first_alert_score"] = r.first_alert_score;
    } else {
        row["first_alert_index"] = nullptr;
    }
    row["observations"] = r.observations;
    return row;
}

}  // namespace

std::vector<MatrixRow> table1_rows(Channel channel, double magnitude, std::size_t position,
                                   std::size_t sudden_duration, std::size_t gradual_duration) {
    const struct {
        ChangeKind kind;
        bool expected;
    } layout[] = {
        {ChangeKind::gradual_increase, false},
        {ChangeKind::gradual_decrease, false},
        {ChangeKind::sudden_increase, true},
        {ChangeKind::sudden_decrease, true},
        {ChangeKind::normal, false},
    };
    std::vector<MatrixRow> rows;
    int no = 1;
    for (const auto& [kind, expected] : layout) {
        const auto duration = is_sudden(kind) ? sudden_duration : gradual_duration;
        rows.push_back(MatrixRow{
            no++, single_channel_scenario(channel, kind, magnitude, position, duration), expected});
    }
    return rows;
}

std::vector<MatrixRow> table2_rows(double speed_magnitude, double rpm_magnitude,
                                   std::size_t position, std::size_t duration) {
    const struct {
        ChangeKind speed;
        ChangeKind rpm;
        bool expected;
    } layout[] = {
        {ChangeKind::sudden_increase, ChangeKind::sudden_increase, true},
        {ChangeKind::sudden_increase, ChangeKind::sudden_decrease, true},
        {ChangeKind::sudden_decrease, ChangeKind::sudden_increase, true},
        {ChangeKind::sudden_decrease, ChangeKind::sudden_decrease, true},
        {ChangeKind::sudden_increase, ChangeKind::normal, true},
        {ChangeKind::sudden_decrease, ChangeKind::normal, true},
        {ChangeKind::normal, ChangeKind::sudden_increase, true},
        {ChangeKind::normal, ChangeKind::sudden_decrease, true},
        {ChangeKind::normal, ChangeKind::normal, false},
    };
    std::vector<MatrixRow> rows;
    int no = 1;
    for (const auto& [speed_kind, rpm_kind, expected] : layout) {
        AnomalyScenario s;
        s.speed = {speed_kind, speed_kind == ChangeKind::normal ? 0.0 : speed_magnitude};
        s.rpm = {rpm_kind, rpm_kind == ChangeKind::normal ? 0.0 : rpm_magnitude};
        s.position = position;
        s.duration = duration;
        rows.push_back(MatrixRow{no++, s, expected});
    }
    return rows;
}

std::vector<ScenarioResult> run_scenario_matrix(const HmmModel& model,
                                                const DetectorConfig& config,
                                                const DriveSeries& base,
                                                std::span<const MatrixRow> rows) {
    if (!model.alphabet) throw Error("run_scenario_matrix: model has no embedded alphabet");
    std::vector<Channel> channels;
    for (const auto& q : model.alphabet->quantizers) channels.push_back(q.channel);

    std::vector<ScenarioResult> results;
    results.reserve(rows.size());
    for (const auto& row : rows) {
        ScenarioResult r;
        r.row = row;
        r.expected = row.expected_alert;

        DriveSeries injected;
        try {
            injected = inject_anomaly(base, row.scenario);
        } catch (const Error& e) {
            throw Error("scenario row " + std::to_string(row.no) + ": " + e.what());
        }

        const auto series = drive_to_series(injected, channels);
        const auto runs = encode_sequence(*model.alphabet, series);
        r.observations = total_symbols(runs);
        r.alerts = detect_stream(model, config, runs, injected.t0, injected.dt);

        const bool injected_row = !row.scenario.is_normal();
        if (injected_row) {
            r.window_lo = row.scenario.position - 1;
            r.window_hi = std::min(row.scenario.position + row.scenario.duration + 1,
                                   r.observations > 0 ? r.observations - 1 : 0);
        }
        for (const auto& alert : r.alerts) {
            const bool inside =
                injected_row && alert.index >= r.window_lo && alert.index <= r.window_hi;
            if (inside) {
                if (!r.alert_fired) {
                    r.first_alert_index = alert.index;
                    r.first_alert_score = alert.score;
                }
                r.alert_fired = true;
                ++r.window_alerts;
            } else {
                ++r.stray_alerts;
            }
        }
        if (!r.first_alert_index && !r.alerts.empty()) {
            r.first_alert_index = r.alerts.front().index;
            r.first_alert_score = r.alerts.front().score;
        }
        r.pass = r.alert_fired == r.expected && r.stray_alerts == 0;
        results.push_back(std::move(r));
    }
    return results;
}

ConfusionMetrics confusion_metrics(std::span<const ScenarioResult> results) {
    ConfusionMetrics m;
    for (const auto& r : results) {
        const bool positive_span = r.expected && !r.row.scenario.is_normal();
        std::size_t window_size = 0;
        std::size_t false_alerts = r.stray_alerts;
        if (positive_span) {
            window_size = r.window_hi - r.window_lo + 1;
            if (r.alert_fired) {
                m.true_positives += window_size;
            } else {
                m.false_negatives += window_size;
            }
        } else {
            false_alerts += r.window_alerts;  // alerts on tolerated injections
        }
        const std::size_t clean = r.observations - window_size;
        m.false_positives += false_alerts;
        m.true_negatives += clean - std::min(clean, false_alerts);
    }
    const auto tp = static_cast<double>(m.true_positives);
    const auto fp = static_cast<double>(m.false_positives);
    const auto tn = static_cast<double>(m.true_negatives);
    const auto fn = static_cast<double>(m.false_negatives);
    m.precision = tp + fp > 0 ? tp / (tp + fp) : 1.0;
    m.recall = tp + fn > 0 ? tp / (tp + fn) : 1.0;
    m.false_positive_rate = fp + tn > 0 ? fp / (fp + tn) : 0.0;
    return m;
}

std::size_t calm_anchor(const DriveSeries& drive, std::size_t requested, std::size_t pre,
                        std::size_t post) {
    const auto n = drive.size();
    if (n < pre + post + 2) throw Error("calm_anchor: drive too short");
    auto quiet = [&](std::size_t p) {
        if (p < pre || p + post >= n) return false;
        double lo = drive.speed[p - pre], hi = lo;
        for (std::size_t i = p - pre; i <= p + post; ++i) {
            lo = std::min(lo, drive.speed[i]);
            hi = std::max(hi, drive.speed[i]);
        }
        return hi - lo <= 3.0;
    };
    for (std::size_t offset = 0; offset < n; ++offset) {
        if (requested >= offset && quiet(requested - offset)) return requested - offset;
        if (quiet(requested + offset)) return requested + offset;
    }
    throw Error("calm_anchor: the base drive has no quiet stretch to inject into");
}

TableSection evaluate_channels(const TableEvalConfig& config, std::vector<Channel> channels,
                               std::span<const MatrixRow> rows) {
    const auto train = simulate_drive(config.train_steps, config.train_seed, config.profile,
                                      config.dt);
    const auto val = simulate_drive(config.val_steps, config.val_seed, config.profile, config.dt);
    const auto base = simulate_drive(config.base_steps, config.base_seed, config.profile,
                                     config.dt);

    ObservationAlphabet alphabet;
    alphabet.dt = config.dt;
    for (const auto channel : channels) {
        const auto& edges =
            channel == Channel::speed ? config.speed_edges : config.rpm_edges;
        alphabet.quantizers.push_back(
            fit_quantizer(channel, {}, 0, QuantizerScheme::fixed, edges));
    }

    const auto train_runs = encode_sequence(alphabet, drive_to_series(train, channels));
    const auto train_sequences = run_sequences(train_runs);
    if (train_sequences.empty()) throw Error("evaluate: no training observations");

    TrainOptions options;
    options.num_states = config.states;
    options.max_iters = config.max_iters;
    options.tol = config.tol;
    options.restarts = config.restarts;
    options.seed = config.hmm_seed;
    options.prob_floor = config.prob_floor;
    auto trained = hmm_train(train_sequences, alphabet.symbol_count(), options);
    trained.model.alphabet = alphabet;

    TableSection section;
    section.channels = std::move(channels);
    section.final_loglik = trained.loglik_trace.back();
    section.restart_index = trained.restart_index;
    section.iterations = trained.iterations;

    DetectorConfig detector;
    detector.window = config.window;
    detector.mode = config.mode;
    if (config.threshold) {
        detector.threshold = *config.threshold;
    } else {
        const auto val_runs = encode_sequence(*trained.model.alphabet,
                                              drive_to_series(val, section.channels));
        detector.threshold = calibrate_threshold(trained.model, run_sequences(val_runs),
                                                 config.window, config.quantile, config.margin,
                                                 config.mode);
    }
    section.threshold = detector.threshold;

    // Anchor every row on the same quiet stretch of the base drive.
    const auto anchor = calm_anchor(base, config.position,
                                    static_cast<std::size_t>(config.window) + 2,
                                    config.gradual_duration + 4);
    std::vector<MatrixRow> anchored(rows.begin(), rows.end());
    for (auto& row : anchored) row.scenario.position = anchor;

    section.results = run_scenario_matrix(trained.model, detector, base, anchored);
    section.model = std::move(trained.model);
    return section;
}

namespace {

TableOutcome finish_outcome(std::string mode, std::vector<TableSection> sections) {
    TableOutcome outcome;
    outcome.mode = std::move(mode);
    outcome.sections = std::move(sections);
    std::vector<ScenarioResult> pooled;
    outcome.all_pass = true;
    for (const auto& section : outcome.sections) {
        for (const auto& r : section.results) {
            outcome.all_pass = outcome.all_pass && r.pass;
            pooled.push_back(r);
        }
    }
    outcome.metrics = confusion_metrics(pooled);
    return outcome;
}

}  // namespace

TableOutcome evaluate_table1(const TableEvalConfig& config) {
    std::vector<TableSection> sections;
    sections.push_back(evaluate_channels(
        config, {Channel::speed},
        table1_rows(Channel::speed, config.speed_magnitude, config.position,
                    config.sudden_duration, config.gradual_duration)));
    sections.push_back(evaluate_channels(
        config, {Channel::rpm},
        table1_rows(Channel::rpm, config.rpm_magnitude, config.position, config.sudden_duration,
                    config.gradual_duration)));
    return finish_outcome("table1", std::move(sections));
}

TableOutcome evaluate_table2(const TableEvalConfig& config) {
    std::vector<TableSection> sections;
    sections.push_back(evaluate_channels(
        config, {Channel::speed, Channel::rpm},
        table2_rows(config.speed_magnitude, config.rpm_magnitude, config.position,
                    config.sudden_duration)));
    return finish_outcome("table2", std::move(sections));
}

std::vector<MatrixRow> read_matrix_csv(std::istream& in) {
    std::vector<MatrixRow> rows;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        if (!header_seen) {
            header_seen = true;
            if (line.find("no,") == 0) continue;  // header row
        }
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 8) {
            throw Error("matrix line " + std::to_string(line_no) + ": expected 8 fields, got " +
                        std::to_string(fields.size()));
        }
        try {
            MatrixRow row;
            row.no = std::stoi(fields[0]);
            const auto speed_kind = change_kind_from_name(fields[1]);
            const auto rpm_kind = change_kind_from_name(fields[3]);
            if (!speed_kind || !rpm_kind) throw Error("unknown change kind");
            row.scenario.speed = {*speed_kind, std::stod(fields[2])};
            row.scenario.rpm = {*rpm_kind, std::stod(fields[4])};
            row.scenario.position = static_cast<std::size_t>(std::stoul(fields[5]));
            row.scenario.duration = static_cast<std::size_t>(std::stoul(fields[6]));
            if (fields[7] != "true" && fields[7] != "false") throw Error("expected true/false");
            row.expected_alert = fields[7] == "true";
            rows.push_back(std::move(row));
        } catch (const std::exception& e) {
            throw Error("matrix line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return rows;
}

std::vector<MatrixRow> read_matrix_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open matrix file: " + path);
    return read_matrix_csv(in);
}

void write_table1_csv(std::ostream& out, const TableSection& speed_section,
                      const TableSection& rpm_section) {
    if (speed_section.results.size() != rpm_section.results.size()) {
        throw Error("table1 sections have mismatched row counts");
    }
    out << "no,type,speed_alert,speed_result,rpm_alert,rpm_result\n";
    for (std::size_t i = 0; i < speed_section.results.size(); ++i) {
        const auto& s = speed_section.results[i];
        const auto& r = rpm_section.results[i];
        const auto kind = s.row.scenario.speed.kind;
        out << s.row.no << ',' << kind_label(kind) << ',' << bool_name(s.alert_fired) << ','
            << (s.pass ? "pass" : "FAIL") << ',' << bool_name(r.alert_fired) << ','
            << (r.pass ? "pass" : "FAIL") << '\n';
    }
}

void write_table2_csv(std::ostream& out, const TableSection& joint_section) {
    out << "no,speed,rpm,alert_status,result\n";
    for (const auto& r : joint_section.results) {
        out << r.row.no << ',' << kind_label(r.row.scenario.speed.kind) << ','
            << kind_label(r.row.scenario.rpm.kind) << ',' << bool_name(r.alert_fired) << ','
            << (r.pass ? "pass" : "FAIL") << '\n';
    }
}

void write_matrix_results_csv(std::ostream& out, std::span<const ScenarioResult> results) {
    out << "no,speed,rpm,alert_status,expected,result,first_alert,stray_alerts\n";
    for (const auto& r : results) {
        out << r.row.no << ',' << kind_label(r.row.scenario.speed.kind) << ','
            << kind_label(r.row.scenario.rpm.kind) << ',' << bool_name(r.alert_fired) << ','
            << bool_name(r.expected) << ',' << (r.pass ? "pass" : "FAIL") << ',';
        if (r.first_alert_index) {
            out << *r.first_alert_index;
        } else {
            out << "-";
        }
        out << ',' << r.stray_alerts << '\n';
    }
}

void write_report_json(std::ostream& out, const TableOutcome& outcome,
                       const TableEvalConfig& config) {
    nlohmann::ordered_json doc;
    doc["mode"] = outcome.mode;
    doc["all_pass"] = outcome.all_pass;

    nlohmann::ordered_json cfg;
    cfg["profile"] = drive_profile_name(config.profile);
    cfg["train_steps"] = config.train_steps;
    cfg["val_steps"] = config.val_steps;
    cfg["base_steps"] = config.base_steps;
    cfg["train_seed"] = config.train_seed;
    cfg["val_seed"] = config.val_seed;
    cfg["base_seed"] = config.base_seed;
    cfg["dt"] = config.dt;
    cfg["speed_edges"] = config.speed_edges;
    cfg["rpm_edges"] = config.rpm_edges;
    cfg["states"] = config.states;
    cfg["restarts"] = config.restarts;
    cfg["hmm_seed"] = config.hmm_seed;
    cfg["max_iters"] = config.max_iters;
    cfg["tol"] = config.tol;
    cfg["prob_floor"] = config.prob_floor;
    cfg["window"] = config.window;
    cfg["quantile"] = config.quantile;
    cfg["margin"] = config.margin;
    cfg["score_mode"] = score_mode_name(config.mode);
    cfg["position"] = config.position;
    cfg["sudden_duration"] = config.sudden_duration;
    cfg["gradual_duration"] = config.gradual_duration;
    cfg["speed_magnitude"] = config.speed_magnitude;
    cfg["rpm_magnitude"] = config.rpm_magnitude;
    doc["config"] = std::move(cfg);

    auto sections = nlohmann::ordered_json::array();
    for (const auto& section : outcome.sections) {
        nlohmann::ordered_json s;
        auto names = nlohmann::ordered_json::array();
        for (const auto channel : section.channels) names.push_back(channel_name(channel));
        s["channels"] = std::move(names);
        s["threshold"] = section.threshold;
        s["final_loglik"] = section.final_loglik;
        s["restart_index"] = section.restart_index;
        s["iterations"] = section.iterations;
        auto rows = nlohmann::ordered_json::array();
        for (const auto& r : section.results) rows.push_back(scenario_json(r));
        s["rows"] = std::move(rows);
        sections.push_back(std::move(s));
    }
    doc["sections"] = std::move(sections);

    doc["metrics"] = {{"true_positives", outcome.metrics.true_positives},
                      {"false_positives", outcome.metrics.false_positives},
                      {"true_negatives", outcome.metrics.true_negatives},
                      {"false_negatives", outcome.metrics.false_negatives},
                      {"precision", outcome.metrics.precision},
                      {"recall", outcome.metrics.recall},
                      {"false_positive_rate", outcome.metrics.false_positive_rate}};
    out << doc.dump(2) << "\n";
}

void write_plot_csv(std::ostream& out, const DriveSeries& base, const DriveSeries& injected,
                    Channel channel) {
    const auto& a = base.channel_values(channel);
    const auto& b = injected.channel_values(channel);
    if (a.size() != b.size()) throw Error("plot: base and injected series differ in length");
    char buf[80];
    out << "t,value,is_injected\n";
    for (std::size_t i = 0; i < a.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.6f,%.6f,%d\n", base.t0 + base.dt * static_cast<double>(i),
                      b[i], a[i] != b[i] ? 1 : 0);
        out << buf;
    }
}

}  // namespace canhmm
