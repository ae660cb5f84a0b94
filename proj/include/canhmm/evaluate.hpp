#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "canhmm/detector.hpp"
#include "canhmm/inject.hpp"
#include "canhmm/model_io.hpp"

namespace canhmm {

struct MatrixRow {
    int no = 0;
    AnomalyScenario scenario;
    bool expected_alert = false;
};

// The five single-channel scenarios, applied to one channel: gradual
// increase, gradual decrease, sudden increase, sudden decrease, unmodified.
// Only the sudden rows are expected to alert.
std::vector<MatrixRow> table1_rows(Channel channel, double magnitude, std::size_t position,
                                   std::size_t sudden_duration, std::size_t gradual_duration);

// The nine joint (speed, rpm) scenarios: every combination of sudden
// increase / sudden decrease / unmodified per channel. All eight injected
// combinations are expected to alert; the fully unmodified row is not.
std::vector<MatrixRow> table2_rows(double speed_magnitude, double rpm_magnitude,
                                   std::size_t position, std::size_t duration);

struct ScenarioResult {
    MatrixRow row;
    bool expected = false;
    bool alert_fired = false;        // any alert inside the tolerance window
    std::size_t window_alerts = 0;   // alerts inside the tolerance window
    std::size_t stray_alerts = 0;    // alerts anywhere else
    bool pass = false;               // fired == expected, and no strays
    std::optional<std::size_t> first_alert_index;
    double first_alert_score = 0.0;
    std::size_t observations = 0;
    // Tolerance window in observation indices; meaningful only for injected
    // scenarios. The injection's gradients span [position-1, position+duration-1];
    // one step of slack is allowed at each end.
    std::size_t window_lo = 0;
    std::size_t window_hi = 0;
    std::vector<AnomalyAlert> alerts;
};

// Injects each row into the base drive, encodes it with the model's
// alphabet, runs the detector, and scores the row. Rows are independent;
// results come back in row order. A row whose scenario cannot be
// constructed aborts with the row number in the error.
std::vector<ScenarioResult> run_scenario_matrix(const HmmModel& model,
                                                const DetectorConfig& config,
                                                const DriveSeries& base,
                                                std::span<const MatrixRow> rows);

// Observation-level confusion counts. Positive observations are the
// tolerance windows of scenarios expected to alert; a window that produced
// at least one alert counts fully as true positives (detecting a spike once
// is detecting it), a missed window fully as false negatives. Every other
// observation is negative, and any alert there counts individually as a
// false positive -- including alerts on injections the detector is supposed
// to tolerate.
struct ConfusionMetrics {
    std::size_t true_positives = 0;
    std::size_t false_positives = 0;
    std::size_t true_negatives = 0;
    std::size_t false_negatives = 0;
    double precision = 1.0;
    double recall = 1.0;
    double false_positive_rate = 0.0;
};

ConfusionMetrics confusion_metrics(std::span<const ScenarioResult> results);

// Everything needed to reproduce the single- and multi-observation tables
// from seeded simulation: train on one drive, calibrate on a second,
// inject into a third.
struct TableEvalConfig {
    DriveProfile profile = DriveProfile::cruise;
    std::size_t train_steps = 8000;
    std::size_t val_steps = 5200;
    std::size_t base_steps = 600;
    std::uint64_t train_seed = 101;
    std::uint64_t val_seed = 102;
    std::uint64_t base_seed = 103;
    double dt = 1.0;

    std::vector<double> speed_edges = {-10.0, -2.0, 2.0, 10.0};
    std::vector<double> rpm_edges = {-400.0, -60.0, 60.0, 400.0};

    int states = 5;
    int restarts = 5;
    std::uint64_t hmm_seed = 7;
    int max_iters = 500;
    double tol = 1e-6;
    double prob_floor = 1e-6;

    int window = 10;
    double quantile = 0.0;
    double margin = 0.5;
    std::optional<double> threshold;  // overrides calibration when set
    ScoreMode mode = ScoreMode::predictive;

    // Requested injection anchor. The evaluation snaps it to the nearest
    // quiet stretch of the base drive (see calm_anchor), so the injected
    // shape is not confounded with a maneuver the drive was already making.
    std::size_t position = 250;
    std::size_t sudden_duration = 1;
    std::size_t gradual_duration = 20;
    double speed_magnitude = 50.0;
    double rpm_magnitude = 3000.0;
};

// Nearest index to `requested` where the drive's speed stays within a 3 km/h
// band over [index - pre, index + post] -- a cruise stretch. Errors out when
// the drive has no such stretch.
std::size_t calm_anchor(const DriveSeries& drive, std::size_t requested, std::size_t pre,
                        std::size_t post);

struct TableSection {
    std::vector<Channel> channels;  // the model's channels
    double threshold = 0.0;
    double final_loglik = 0.0;
    int restart_index = 0;
    int iterations = 0;
    HmmModel model;
    std::vector<ScenarioResult> results;
};

struct TableOutcome {
    std::string mode;  // "table1" or "table2"
    std::vector<TableSection> sections;
    ConfusionMetrics metrics;
    bool all_pass = false;
};

// Trains a model over `channels` on the simulated training drive, calibrates
// the threshold on the validation drive, and runs the given rows against the
// base drive.
TableSection evaluate_channels(const TableEvalConfig& config, std::vector<Channel> channels,
                               std::span<const MatrixRow> rows);

TableOutcome evaluate_table1(const TableEvalConfig& config);
TableOutcome evaluate_table2(const TableEvalConfig& config);

// Matrix file: CSV with header
//   no,speed_kind,speed_magnitude,rpm_kind,rpm_magnitude,position,duration,expected
// kinds as in change_kind_name, expected true/false.
std::vector<MatrixRow> read_matrix_csv(std::istream& in);
std::vector<MatrixRow> read_matrix_csv_file(const std::string& path);

// Result tables, mirroring the layout of the published evaluations.
void write_table1_csv(std::ostream& out, const TableSection& speed_section,
                      const TableSection& rpm_section);
void write_table2_csv(std::ostream& out, const TableSection& joint_section);
void write_matrix_results_csv(std::ostream& out, std::span<const ScenarioResult> results);
void write_report_json(std::ostream& out, const TableOutcome& outcome,
                       const TableEvalConfig& config);

// Plot data for one channel of one scenario: t,value,is_injected rows.
void write_plot_csv(std::ostream& out, const DriveSeries& base, const DriveSeries& injected,
                    Channel channel);

}  // namespace canhmm
