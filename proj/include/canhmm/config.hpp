#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "canhmm/evaluate.hpp"

namespace canhmm {

// One declarative file per experiment. Every key has a default; command-line
// flags override file values. See the README for the full schema.
struct RunConfig {
    std::vector<Channel> channels = {Channel::speed, Channel::rpm};
    double dt = 1.0;
    double gap_limit = 2.0;
    PayloadLayout payload_layout = PayloadLayout::bare;
    std::vector<RawChannelRule> raw_id_rules;

    struct QuantizerConfig {
        QuantizerScheme scheme = QuantizerScheme::quantile;
        int bins = 5;
        std::map<Channel, std::vector<double>> edges;  // required per channel when fixed
    } quantizer;

    struct HmmConfig {
        int states = 5;
        int restarts = 5;
        std::uint64_t seed = 7;
        int max_iters = 500;
        double tol = 1e-6;
        double prob_floor = 1e-6;
    } hmm;

    struct DetectorSettings {
        int window = 10;
        double quantile = 0.0;
        double margin = 0.5;
        ScoreMode mode = ScoreMode::predictive;
        std::optional<double> threshold;  // explicit tau; otherwise calibrate
    } detector;

    struct SimulateConfig {
        DriveProfile profile = DriveProfile::cruise;
        std::size_t steps = 600;
        std::uint64_t seed = 5;
    } simulate;

    struct EvaluateConfig {
        std::string mode = "table1";  // table1 | table2 | matrix
        std::size_t train_steps = 8000;
        std::size_t val_steps = 5200;
        std::size_t base_steps = 600;
        std::uint64_t train_seed = 101;
        std::uint64_t val_seed = 102;
        std::uint64_t base_seed = 103;
        std::size_t position = 250;
        std::size_t sudden_duration = 1;
        std::size_t gradual_duration = 20;
        double speed_magnitude = 50.0;
        double rpm_magnitude = 3000.0;
        std::string matrix;  // CSV path for mode=matrix
    } evaluate;

    struct InjectConfig {
        ChangeKind speed_kind = ChangeKind::normal;
        double speed_magnitude = 50.0;
        ChangeKind rpm_kind = ChangeKind::normal;
        double rpm_magnitude = 3000.0;
        std::size_t position = 250;
        std::size_t duration = 1;
    } inject;

    struct IoConfig {
        std::vector<std::string> logs;                // CAN log inputs for train
        std::map<Channel, std::string> series;        // per-channel CSV inputs
        std::string input;                            // detect input: log path or "-"
        std::map<Channel, std::string> calibration_series;
        std::vector<std::string> calibration_logs;
        std::string model;        // model file path
        std::string alerts;       // alert JSONL output, "-" for stdout
        std::string report;       // train/detect report JSON
        std::string out_dir;      // evaluate/simulate/inject output directory
        bool plot_data = false;   // emit t,value,is_injected CSVs
    } io;
};

RunConfig load_run_config(const std::string& path);

// Table evaluation fixture assembled from a run config.
TableEvalConfig table_eval_config(const RunConfig& config);

}  // namespace canhmm
