// SPDX-License-Identifier: Apache-2.0
#include <fedqt/cli.hpp>

#include <cstdint>
#include <exception>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <fedqt/experiment.hpp>
#include <fedqt/gwdata.hpp>

namespace fedqt::cli {

namespace {

namespace fs = std::filesystem;

/// Optional command-line overrides layered on top of a config file.
struct Overrides {
    std::string out_dir;
    std::string model;
    int setting = 0;
    std::uint64_t seed = 0;
    CLI::Option *out_opt = nullptr;
    CLI::Option *model_opt = nullptr;
    CLI::Option *setting_opt = nullptr;
    CLI::Option *seed_opt = nullptr;

    void add_to(CLI::App &cmd, bool with_model) {
        out_opt = cmd.add_option("--out", out_dir,
                                 "Output directory (overrides out_dir)");
        setting_opt =
            cmd.add_option("--setting", setting, "Waveform setting override")
                ->check(CLI::Range(1, 3));
        seed_opt = cmd.add_option("--seed", seed, "Seed override");
        if (with_model)
            model_opt = cmd.add_option("--model", model,
                                       "Model override (lstm|qlstm|qtlstm)");
    }

    void apply(experiment::ExperimentConfig &config) const {
        if (out_opt->count())
            config.out_dir = out_dir;
        if (setting_opt->count())
            config.setting = setting;
        if (seed_opt->count())
            config.seed = seed;
        if (model_opt && model_opt->count()) {
            experiment::model_kind_from_string(model); // validate early
            config.model = model;
        }
    }
};

experiment::ExperimentConfig resolved_config(const std::string &config_path,
                                             const Overrides &overrides) {
    experiment::ExperimentConfig config =
        config_path.empty() ? experiment::ExperimentConfig{}
                            : experiment::load_config(config_path);
    overrides.apply(config);
    return config;
}

fs::path prepare_out_dir(const std::string &out_dir) {
    fs::path dir(out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw std::runtime_error("cannot create output directory '" +
                                 out_dir + "': " + ec.message());
    return dir;
}

void run_train(const experiment::ExperimentConfig &config,
               std::ostream &out) {
    fs::path dir = prepare_out_dir(config.out_dir);
    experiment::TrainResult result = experiment::run_experiment(config);

    fs::path history_path = dir / "history.csv";
    fs::path prediction_path = dir / "prediction.csv";
    fs::path model_path = dir / "model.txt";
    experiment::write_history_csv(history_path.string(), result.history);
    experiment::write_prediction_csv(prediction_path.string(),
                                     experiment::model_spec(config),
                                     result.final_bundle, result.dataset);
    experiment::write_model_file(model_path.string(), result.final_bundle);

    const fed::RoundRecord &last = result.history.back();
    out << "model=" << config.model << " rounds=" << result.history.size()
        << " final_train_loss=" << last.train_loss
        << " final_test_loss=" << last.test_loss << '\n';
    out << "wrote " << history_path.string() << '\n';
    out << "wrote " << prediction_path.string() << '\n';
    out << "wrote " << model_path.string() << '\n';
}

void run_sweep_cmd(const experiment::ExperimentConfig &config,
                   const std::vector<int> &layers, std::ostream &out) {
    fs::path dir = prepare_out_dir(config.out_dir);
    std::vector<experiment::SweepRow> rows =
        experiment::run_sweep(config, layers);

    fs::path sweep_path = dir / "sweep.csv";
    experiment::write_sweep_csv(sweep_path.string(), rows);
    for (const experiment::SweepRow &row : rows)
        out << "layers=" << row.layers
            << " quantum_params=" << row.quantum_params
            << " final_train_loss=" << row.final_train_loss
            << " final_test_loss=" << row.final_test_loss << '\n';
    out << "wrote " << sweep_path.string() << '\n';
}

} // namespace

int run_cli(int argc, const char *const *argv, std::ostream &out,
            std::ostream &err) {
    CLI::App app{"Federated training of LSTM forecasters whose weights are "
                 "generated by a compact quantum circuit"};
    app.require_subcommand(1);

    // synth
    CLI::App *synth = app.add_subcommand(
        "synth", "Write a synthetic chirp-plus-ringdown series as CSV");
    int synth_setting = 1;
    std::string synth_out = "out";
    synth->add_option("--setting", synth_setting, "Waveform setting (1-3)")
        ->check(CLI::Range(1, 3));
    synth->add_option("--out", synth_out, "Output directory");
    synth->callback([&] {
        fs::path dir = prepare_out_dir(synth_out);
        fs::path path = dir / "series.csv";
        gwdata::save_series_csv(
            path.string(),
            gwdata::synthesize(gwdata::default_spec(synth_setting)));
        out << "wrote " << path.string() << '\n';
    });

    // params
    CLI::App *params = app.add_subcommand(
        "params", "Print trainable-parameter counts for a model");
    std::string params_model = "qtlstm";
    int params_layers = 10;
    params->add_option("--model", params_model,
                       "Model kind (lstm|qlstm|qtlstm)");
    params->add_option("--layers", params_layers, "Generator layers")
        ->check(CLI::PositiveNumber);
    params->callback([&] {
        experiment::ExperimentConfig config;
        config.model = params_model;
        config.qt_layers = params_layers;
        rnn::ModelSpec spec = experiment::model_spec(config);
        out << "model=" << params_model
            << " classical=" << spec.classical_param_count()
            << " quantum=" << spec.quantum_param_count()
            << " total=" << spec.param_count() << '\n';
    });

    // train
    CLI::App *train = app.add_subcommand(
        "train", "Run a federated training experiment and write its files");
    std::string train_config;
    Overrides train_overrides;
    train->add_option("--config", train_config, "key=value config file")
        ->check(CLI::ExistingFile);
    train_overrides.add_to(*train, /*with_model=*/true);
    train->callback([&] {
        run_train(resolved_config(train_config, train_overrides), out);
    });

    // sweep
    CLI::App *sweep = app.add_subcommand(
        "sweep", "Train the generated-weight model across generator depths");
    std::string sweep_config;
    std::vector<int> sweep_layers;
    Overrides sweep_overrides;
    sweep->add_option("--config", sweep_config, "key=value config file")
        ->check(CLI::ExistingFile);
    sweep->add_option("--layers", sweep_layers,
                      "Comma-separated generator depths (default 1,2,4,6,8,10)")
        ->delimiter(',');
    sweep_overrides.add_to(*sweep, /*with_model=*/false);
    sweep->callback([&] {
        std::vector<int> layers =
            sweep_layers.empty() ? std::vector<int>{1, 2, 4, 6, 8, 10}
                                 : sweep_layers;
        run_sweep_cmd(resolved_config(sweep_config, sweep_overrides), layers,
                      out);
    });

    try {
        app.parse(argc, argv);
        return 0;
    } catch (const CLI::ParseError &e) {
        return app.exit(e, out, err) == 0 ? 0 : 1;
    } catch (const std::invalid_argument &e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
}

} // namespace fedqt::cli
