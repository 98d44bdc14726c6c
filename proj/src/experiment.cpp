// SPDX-License-Identifier: Apache-2.0
#include <fedqt/experiment.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fedqt::experiment {

namespace {

std::string_view trim(std::string_view text) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t'))
        text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t'))
        text.remove_suffix(1);
    return text;
}

[[noreturn]] void bad_key(const std::string &key, const std::string &reason) {
    throw std::invalid_argument("config key '" + key + "': " + reason);
}

long long parse_int(const std::string &key, std::string_view value) {
    long long parsed = 0;
    auto [end, ec] =
        std::from_chars(value.data(), value.data() + value.size(), parsed);
    if (ec != std::errc{} || end != value.data() + value.size())
        bad_key(key, "expected an integer, got '" + std::string(value) + "'");
    return parsed;
}

std::uint64_t parse_uint(const std::string &key, std::string_view value) {
    std::uint64_t parsed = 0;
    auto [end, ec] =
        std::from_chars(value.data(), value.data() + value.size(), parsed);
    if (ec != std::errc{} || end != value.data() + value.size())
        bad_key(key, "expected a non-negative integer, got '" +
                         std::string(value) + "'");
    return parsed;
}

double parse_double(const std::string &key, std::string_view value) {
    double parsed = 0.0;
    auto [end, ec] =
        std::from_chars(value.data(), value.data() + value.size(), parsed);
    if (ec != std::errc{} || end != value.data() + value.size() ||
        !std::isfinite(parsed))
        bad_key(key, "expected a finite number, got '" + std::string(value) +
                         "'");
    return parsed;
}

bool parse_bool(const std::string &key, std::string_view value) {
    if (value == "0" || value == "false")
        return false;
    if (value == "1" || value == "true")
        return true;
    bad_key(key, "expected 0/1/true/false, got '" + std::string(value) + "'");
}

int parse_positive(const std::string &key, std::string_view value) {
    long long parsed = parse_int(key, value);
    if (parsed < 1)
        bad_key(key, "must be >= 1");
    return static_cast<int>(parsed);
}

void validate(const ExperimentConfig &config) {
    try {
        model_kind_from_string(config.model);
    } catch (const std::invalid_argument &) {
        bad_key("model", "must be lstm, qlstm, or qtlstm, got '" +
                             config.model + "'");
    }
    if (config.learning_rate < 0.0)
        bad_key("learning_rate", "must be >= 0");
    if (config.batch_size < 0)
        bad_key("batch_size", "must be >= 0");
    if (config.setting < 1 || config.setting > 3)
        bad_key("setting", "must be 1, 2, or 3");
    if (config.out_dir.empty())
        bad_key("out_dir", "must be non-empty");
}

std::ofstream open_for_write(const std::string &path) {
    std::ofstream file(path, std::ios::binary);
    if (!file)
        throw std::runtime_error("cannot write '" + path + "'");
    return file;
}

void write_row(std::ofstream &file, const char *format, auto... values) {
    char buffer[160];
    std::snprintf(buffer, sizeof buffer, format, values...);
    file << buffer;
}

} // namespace

ExperimentConfig parse_config_text(const std::string &text) {
    ExperimentConfig config;
    std::set<std::string> seen;

    std::istringstream lines(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(lines, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        if (auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;

        auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw std::invalid_argument("config line " +
                                        std::to_string(line_no) +
                                        ": expected key=value");
        std::string key(trim(line.substr(0, eq)));
        std::string_view value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("config line " +
                                        std::to_string(line_no) +
                                        ": empty key");
        if (!seen.insert(key).second)
            throw std::invalid_argument("duplicate config key '" + key + "'");

        if (key == "model")
            config.model = std::string(value);
        else if (key == "rounds")
            config.rounds = parse_positive(key, value);
        else if (key == "clients")
            config.clients = parse_positive(key, value);
        else if (key == "local_epochs")
            config.local_epochs = parse_positive(key, value);
        else if (key == "learning_rate")
            config.learning_rate = parse_double(key, value);
        else if (key == "batch_size")
            config.batch_size = static_cast<int>(parse_int(key, value));
        else if (key == "parallel_clients")
            config.parallel_clients = parse_bool(key, value);
        else if (key == "seed")
            config.seed = parse_uint(key, value);
        else if (key == "qt_layers")
            config.qt_layers = parse_positive(key, value);
        else if (key == "hidden_size")
            config.hidden_size = parse_positive(key, value);
        else if (key == "qlstm_hidden_size")
            config.qlstm_hidden_size = parse_positive(key, value);
        else if (key == "qlstm_layers")
            config.qlstm_layers = parse_positive(key, value);
        else if (key == "lookback")
            config.lookback = parse_positive(key, value);
        else if (key == "setting")
            config.setting = static_cast<int>(parse_int(key, value));
        else if (key == "out_dir")
            config.out_dir = std::string(value);
        else
            throw std::invalid_argument("unknown config key '" + key + "'");
    }

    validate(config);
    return config;
}

ExperimentConfig load_config(const std::string &path) {
    std::ifstream file(path, std::ios::binary);
    if (!file)
        throw std::runtime_error("cannot open config file '" + path + "'");
    std::ostringstream text;
    text << file.rdbuf();
    return parse_config_text(text.str());
}

std::string to_string(rnn::ModelKind kind) {
    switch (kind) {
    case rnn::ModelKind::kLstm:
        return "lstm";
    case rnn::ModelKind::kQlstm:
        return "qlstm";
    case rnn::ModelKind::kQtLstm:
        return "qtlstm";
    }
    throw std::invalid_argument("unknown model kind");
}

rnn::ModelKind model_kind_from_string(const std::string &name) {
    if (name == "lstm")
        return rnn::ModelKind::kLstm;
    if (name == "qlstm")
        return rnn::ModelKind::kQlstm;
    if (name == "qtlstm")
        return rnn::ModelKind::kQtLstm;
    throw std::invalid_argument("unknown model kind '" + name + "'");
}

rnn::ModelSpec model_spec(const ExperimentConfig &config) {
    rnn::ModelSpec spec;
    spec.kind = model_kind_from_string(config.model);
    spec.lstm.hidden_size = config.hidden_size;
    spec.lstm.lookback = config.lookback;
    spec.qlstm.hidden_size = config.qlstm_hidden_size;
    spec.qlstm.n_layers = config.qlstm_layers;
    spec.qlstm.lookback = config.lookback;
    spec.qt_layers = config.qt_layers;
    return spec;
}

fed::FedConfig fed_config(const ExperimentConfig &config) {
    fed::FedConfig fc;
    fc.rounds = config.rounds;
    fc.clients = config.clients;
    fc.local_epochs = config.local_epochs;
    fc.batch_size = config.batch_size;
    fc.parallel_clients = config.parallel_clients;
    fc.seed = config.seed;
    fc.optimizer.learning_rate = config.learning_rate;
    fc.model = model_spec(config);
    return fc;
}

TrainResult run_experiment(const ExperimentConfig &config) {
    gwdata::WaveformSpec waveform = gwdata::default_spec(config.setting);
    waveform.seed = config.seed;
    Eigen::VectorXd series = gwdata::synthesize(waveform);
    gwdata::SeriesDataset dataset =
        gwdata::make_dataset(series, config.lookback);

    fed::FederationResult outcome =
        fed::run_federation(fed_config(config), dataset.train, dataset.test);
    return TrainResult{std::move(outcome.history),
                       std::move(outcome.final_bundle), std::move(dataset)};
}

std::vector<SweepRow> run_sweep(const ExperimentConfig &config,
                                const std::vector<int> &layer_list) {
    if (layer_list.empty())
        throw std::invalid_argument("layer list must be non-empty");
    if (model_kind_from_string(config.model) != rnn::ModelKind::kQtLstm)
        throw std::invalid_argument(
            "the layer sweep requires model=qtlstm, got '" + config.model +
            "'");
    for (int layers : layer_list)
        if (layers < 1)
            throw std::invalid_argument("layer counts must be >= 1");

    std::vector<SweepRow> rows;
    rows.reserve(layer_list.size());
    for (int layers : layer_list) {
        ExperimentConfig point = config;
        point.qt_layers = layers;
        TrainResult result = run_experiment(point);
        SweepRow row;
        row.layers = layers;
        row.quantum_params = model_spec(point).quantum_param_count();
        row.final_train_loss = result.history.back().train_loss;
        row.final_test_loss = result.history.back().test_loss;
        rows.push_back(row);
    }
    return rows;
}

void write_history_csv(const std::string &path,
                       const std::vector<fed::RoundRecord> &history) {
    std::ofstream file = open_for_write(path);
    file << "round,train_loss,test_loss\n";
    for (const fed::RoundRecord &record : history)
        write_row(file, "%d,%.17g,%.17g\n", record.round, record.train_loss,
                  record.test_loss);
    if (!file.flush())
        throw std::runtime_error("failed writing '" + path + "'");
}

void write_prediction_csv(const std::string &path, const rnn::ModelSpec &spec,
                          const fed::ParamBundle &bundle,
                          const gwdata::SeriesDataset &dataset) {
    if (bundle.kind != spec.kind)
        throw std::invalid_argument("bundle kind does not match model spec");
    rnn::Predictor predictor =
        rnn::Predictor::materialize(spec, bundle.values);

    std::ofstream file = open_for_write(path);
    file << "t,truth,prediction\n";
    for (const rnn::Batch *batch : {&dataset.train, &dataset.test})
        for (const gwdata::Window &window : *batch)
            write_row(file, "%lld,%.17g,%.17g\n",
                      static_cast<long long>(window.target_index),
                      dataset.series(window.target_index),
                      predictor.predict(window.inputs));
    if (!file.flush())
        throw std::runtime_error("failed writing '" + path + "'");
}

void write_model_file(const std::string &path,
                      const fed::ParamBundle &bundle) {
    std::ofstream file = open_for_write(path);
    file << to_string(bundle.kind) << ' ' << bundle.values.size() << '\n';
    for (Eigen::Index i = 0; i < bundle.values.size(); ++i)
        write_row(file, "%.17g\n", bundle.values(i));
    if (!file.flush())
        throw std::runtime_error("failed writing '" + path + "'");
}

fed::ParamBundle read_model_file(const std::string &path) {
    std::ifstream file(path, std::ios::binary);
    if (!file)
        throw std::runtime_error("cannot open model file '" + path + "'");

    std::string header;
    if (!std::getline(file, header))
        throw std::runtime_error("model file '" + path + "' is empty");
    std::istringstream head(header);
    std::string kind_name;
    Eigen::Index count = -1;
    if (!(head >> kind_name >> count) || count < 0)
        throw std::runtime_error("model file '" + path +
                                 "' has a malformed header");

    fed::ParamBundle bundle;
    bundle.kind = model_kind_from_string(kind_name);
    bundle.values.resize(count);
    for (Eigen::Index i = 0; i < count; ++i) {
        std::string line;
        if (!std::getline(file, line))
            throw std::runtime_error("model file '" + path +
                                     "' ends after " + std::to_string(i) +
                                     " of " + std::to_string(count) +
                                     " values");
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        double parsed = 0.0;
        auto [end, ec] =
            std::from_chars(line.data(), line.data() + line.size(), parsed);
        if (ec != std::errc{} || end != line.data() + line.size())
            throw std::runtime_error("model file '" + path +
                                     "': bad value on line " +
                                     std::to_string(i + 2));
        bundle.values(i) = parsed;
    }
    return bundle;
}

void write_sweep_csv(const std::string &path,
                     const std::vector<SweepRow> &rows) {
    std::ofstream file = open_for_write(path);
    file << "layers,quantum_params,final_train_loss,final_test_loss\n";
    for (const SweepRow &row : rows)
        write_row(file, "%d,%lld,%.17g,%.17g\n", row.layers,
                  static_cast<long long>(row.quantum_params),
                  row.final_train_loss, row.final_test_loss);
    if (!file.flush())
        throw std::runtime_error("failed writing '" + path + "'");
}

} // namespace fedqt::experiment
