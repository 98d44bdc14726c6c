// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <fedqt/fed.hpp>
#include <fedqt/gwdata.hpp>
#include <fedqt/rnn.hpp>

namespace fedqt::experiment {

/// Flat key=value experiment description. Every field has a documented
/// default; parsers reject unknown or duplicate keys so config typos fail
/// loudly instead of silently running the wrong experiment.
struct ExperimentConfig {
    std::string model = "qtlstm"; // lstm | qlstm | qtlstm
    int rounds = 100;
    int clients = 4;
    int local_epochs = 1;
    double learning_rate = 0.01;
    int batch_size = 0; // 0 = one full-shard step per epoch
    bool parallel_clients = false;
    std::uint64_t seed = 1;
    int qt_layers = 10;
    int hidden_size = 20;       // lstm / qtlstm hidden width
    int qlstm_hidden_size = 4;  // qlstm hidden width (one qubit per unit)
    int qlstm_layers = 10;      // variational layers per qlstm gate
    int lookback = 8;
    int setting = 1; // waveform preset, 1..3
    std::string out_dir = "out";
};

/// Parses `key = value` lines (blank lines and `#` comments ignored).
/// Throws std::invalid_argument naming the offending key/line on unknown
/// keys, duplicates, malformed values, or out-of-range settings.
ExperimentConfig parse_config_text(const std::string &text);

/// Reads and parses a config file; throws std::runtime_error if unreadable.
ExperimentConfig load_config(const std::string &path);

std::string to_string(rnn::ModelKind kind);
rnn::ModelKind model_kind_from_string(const std::string &name);

/// Assembles the model description the config selects.
rnn::ModelSpec model_spec(const ExperimentConfig &config);

/// Assembles the federation loop description the config selects.
fed::FedConfig fed_config(const ExperimentConfig &config);

struct TrainResult {
    std::vector<fed::RoundRecord> history;
    fed::ParamBundle final_bundle;
    gwdata::SeriesDataset dataset;
};

/// Synthesizes the configured waveform, windows it, and runs the
/// federated loop end to end.
TrainResult run_experiment(const ExperimentConfig &config);

struct SweepRow {
    int layers = 0;
    std::int64_t quantum_params = 0;
    double final_train_loss = 0.0;
    double final_test_loss = 0.0;
};

/// Reruns the experiment for each generator depth (generated-weight model
/// only) and collects the final-round losses.
std::vector<SweepRow> run_sweep(const ExperimentConfig &config,
                                const std::vector<int> &layer_list);

/// `round,train_loss,test_loss`, one row per round, 17 significant digits.
void write_history_csv(const std::string &path,
                       const std::vector<fed::RoundRecord> &history);

/// `t,truth,prediction` over every window of the full series (open-loop:
/// each prediction sees true history only).
void write_prediction_csv(const std::string &path, const rnn::ModelSpec &spec,
                          const fed::ParamBundle &bundle,
                          const gwdata::SeriesDataset &dataset);

/// One-line header "<kind> <length>" followed by one decimal per line,
/// 17 significant digits so doubles round-trip exactly.
void write_model_file(const std::string &path, const fed::ParamBundle &bundle);
fed::ParamBundle read_model_file(const std::string &path);

/// `layers,quantum_params,final_train_loss,final_test_loss`.
void write_sweep_csv(const std::string &path,
                     const std::vector<SweepRow> &rows);

} // namespace fedqt::experiment
