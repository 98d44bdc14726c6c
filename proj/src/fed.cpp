// SPDX-License-Identifier: Apache-2.0
#include <fedqt/fed.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <future>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fedqt::fed {

namespace {

void check_optimizer(const OptimizerConfig &opt) {
    if (!(opt.learning_rate >= 0.0))
        throw std::invalid_argument("learning_rate must be >= 0");
    if (!(opt.beta1 >= 0.0 && opt.beta1 < 1.0))
        throw std::invalid_argument("beta1 must lie in [0, 1)");
    if (!(opt.beta2 >= 0.0 && opt.beta2 < 1.0))
        throw std::invalid_argument("beta2 must lie in [0, 1)");
    if (!(opt.epsilon > 0.0))
        throw std::invalid_argument("epsilon must be > 0");
}

void check_bundle(const rnn::ModelSpec &spec, const ParamBundle &bundle) {
    if (bundle.kind != spec.kind)
        throw std::invalid_argument("bundle kind does not match model spec");
    if (bundle.values.size() != spec.param_count())
        throw std::invalid_argument("bundle has " +
                                    std::to_string(bundle.values.size()) +
                                    " values, model expects " +
                                    std::to_string(spec.param_count()));
}

void check_loop(const FedConfig &config) {
    check_optimizer(config.optimizer);
    if (config.rounds < 1)
        throw std::invalid_argument("rounds must be >= 1");
    if (config.clients < 1)
        throw std::invalid_argument("clients must be >= 1");
    if (config.local_epochs < 1)
        throw std::invalid_argument("local_epochs must be >= 1");
    if (config.batch_size < 0)
        throw std::invalid_argument("batch_size must be >= 0");
}

/// Sums values[lo, hi) by splitting the range in half, so the floating-
/// point evaluation tree is a balanced binary tree fixed by the sorted
/// client order (and, for identical addends and power-of-two counts, the
/// sum is exactly count * value, making the mean exactly idempotent).
Eigen::VectorXd pairwise_sum(const std::vector<const Eigen::VectorXd *> &v,
                             std::size_t lo, std::size_t hi) {
    if (hi - lo == 1)
        return *v[lo];
    std::size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

FederationResult run_loop(const FedConfig &config,
                          const std::vector<rnn::Batch> &shards,
                          const rnn::Batch &train_eval,
                          const rnn::Batch &test_set) {
    check_loop(config);
    if (shards.size() != static_cast<std::size_t>(config.clients))
        throw std::invalid_argument("expected one shard per client");
    for (const rnn::Batch &shard : shards)
        if (shard.empty())
            throw std::invalid_argument("every client needs at least one "
                                        "training window");
    if (train_eval.empty() || test_set.empty())
        throw std::invalid_argument("evaluation sets must be non-empty");

    const rnn::ModelSpec &spec = config.model;
    ParamBundle global{spec.kind, spec.init_params(config.seed)};

    auto train_client = [&](int round, int client,
                            const ParamBundle &bundle) -> ParamBundle {
        Rng stream(client_stream_seed(config.seed, round, client));
        ParamBundle update = local_train(
            spec, bundle, shards[static_cast<std::size_t>(client)],
            config.local_epochs, config.batch_size, config.optimizer, stream);
        if (!update.values.allFinite())
            throw std::runtime_error(
                "non-finite parameters in round " + std::to_string(round) +
                ", client " + std::to_string(client));
        return update;
    };

    FederationResult result;
    result.history.reserve(static_cast<std::size_t>(config.rounds));

    for (int round = 0; round < config.rounds; ++round) {
        std::vector<ClientUpdate> updates;
        updates.reserve(static_cast<std::size_t>(config.clients));
        if (config.parallel_clients) {
            std::vector<std::future<ParamBundle>> pending;
            pending.reserve(static_cast<std::size_t>(config.clients));
            for (int client = 0; client < config.clients; ++client)
                pending.push_back(std::async(std::launch::async, train_client,
                                             round, client,
                                             std::cref(global)));
            // Collecting in client order keeps both the aggregation inputs
            // and any propagated exception deterministic.
            for (int client = 0; client < config.clients; ++client)
                updates.push_back(ClientUpdate{
                    client, pending[static_cast<std::size_t>(client)].get()});
        } else {
            for (int client = 0; client < config.clients; ++client)
                updates.push_back(
                    ClientUpdate{client, train_client(round, client, global)});
        }

        global = fedavg(updates);
        double train_loss = rnn::dataset_loss(spec, global.values, train_eval);
        double test_loss = rnn::dataset_loss(spec, global.values, test_set);
        if (!std::isfinite(train_loss) || !std::isfinite(test_loss))
            throw std::runtime_error(
                "non-finite loss after aggregation in round " +
                std::to_string(round));
        result.history.push_back(RoundRecord{round, train_loss, test_loss});
    }
    result.final_bundle = std::move(global);
    return result;
}

} // namespace

std::vector<rnn::Batch> partition(const rnn::Batch &dataset, int clients,
                                  std::uint64_t seed) {
    if (clients < 1)
        throw std::invalid_argument("clients must be >= 1");
    if (dataset.size() < static_cast<std::size_t>(clients))
        throw std::invalid_argument(
            "dataset has " + std::to_string(dataset.size()) +
            " windows, fewer than " + std::to_string(clients) + " clients");

    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(order);

    std::vector<rnn::Batch> shards(static_cast<std::size_t>(clients));
    for (std::size_t i = 0; i < order.size(); ++i)
        shards[i % static_cast<std::size_t>(clients)].push_back(
            dataset[order[i]]);
    return shards;
}

ParamBundle local_train(const rnn::ModelSpec &spec, const ParamBundle &bundle,
                        const rnn::Batch &shard, int epochs, int batch_size,
                        const OptimizerConfig &optimizer, Rng &stream) {
    check_optimizer(optimizer);
    check_bundle(spec, bundle);
    if (epochs < 1)
        throw std::invalid_argument("epochs must be >= 1");
    if (batch_size < 0)
        throw std::invalid_argument("batch_size must be >= 0");
    if (shard.empty())
        throw std::invalid_argument("shard is empty");

    Eigen::VectorXd params = bundle.values;
    Eigen::VectorXd m = Eigen::VectorXd::Zero(params.size());
    Eigen::VectorXd v = Eigen::VectorXd::Zero(params.size());
    int step = 0;

    auto adam_step = [&](const rnn::Batch &batch) {
        Eigen::VectorXd g = rnn::loss_gradient(spec, params, batch);
        ++step;
        m = optimizer.beta1 * m + (1.0 - optimizer.beta1) * g;
        v = (optimizer.beta2 * v.array() +
             (1.0 - optimizer.beta2) * g.array().square())
                .matrix();
        double m_scale = 1.0 - std::pow(optimizer.beta1, step);
        double v_scale = 1.0 - std::pow(optimizer.beta2, step);
        params.array() -=
            optimizer.learning_rate * (m.array() / m_scale) /
            ((v.array() / v_scale).sqrt() + optimizer.epsilon);
    };

    for (int epoch = 0; epoch < epochs; ++epoch) {
        if (batch_size == 0) {
            adam_step(shard);
        } else {
            std::vector<std::size_t> order(shard.size());
            std::iota(order.begin(), order.end(), std::size_t{0});
            stream.shuffle(order);
            for (std::size_t start = 0; start < order.size();
                 start += static_cast<std::size_t>(batch_size)) {
                std::size_t stop =
                    std::min(order.size(),
                             start + static_cast<std::size_t>(batch_size));
                rnn::Batch batch;
                batch.reserve(stop - start);
                for (std::size_t i = start; i < stop; ++i)
                    batch.push_back(shard[order[i]]);
                adam_step(batch);
            }
        }
    }
    return ParamBundle{spec.kind, std::move(params)};
}

ParamBundle fedavg(const std::vector<ClientUpdate> &updates) {
    if (updates.empty())
        throw std::invalid_argument("fedavg needs at least one update");

    std::vector<const ClientUpdate *> sorted;
    sorted.reserve(updates.size());
    for (const ClientUpdate &u : updates)
        sorted.push_back(&u);
    std::sort(sorted.begin(), sorted.end(),
              [](const ClientUpdate *a, const ClientUpdate *b) {
                  return a->client_id < b->client_id;
              });
    for (std::size_t i = 1; i < sorted.size(); ++i)
        if (sorted[i]->client_id == sorted[i - 1]->client_id)
            throw std::invalid_argument("duplicate client id " +
                                        std::to_string(sorted[i]->client_id));

    const ParamBundle &first = sorted.front()->bundle;
    std::vector<const Eigen::VectorXd *> values;
    values.reserve(sorted.size());
    for (const ClientUpdate *u : sorted) {
        if (u->bundle.kind != first.kind ||
            u->bundle.values.size() != first.values.size())
            throw std::invalid_argument(
                "cannot average heterogeneous bundles");
        values.push_back(&u->bundle.values);
    }

    Eigen::VectorXd mean = pairwise_sum(values, 0, values.size()) /
                           static_cast<double>(values.size());
    return ParamBundle{first.kind, std::move(mean)};
}

std::uint64_t client_stream_seed(std::uint64_t seed, int round, int client) {
    return mix_seed(seed, static_cast<std::uint64_t>(round),
                    static_cast<std::uint64_t>(client));
}

FederationResult run_federation(const FedConfig &config,
                                const rnn::Batch &train_set,
                                const rnn::Batch &test_set) {
    check_loop(config);
    std::vector<rnn::Batch> shards =
        partition(train_set, config.clients, config.seed);
    return run_loop(config, shards, train_set, test_set);
}

FederationResult run_federation_with_shards(
    const FedConfig &config, const std::vector<rnn::Batch> &shards,
    const rnn::Batch &train_eval, const rnn::Batch &test_set) {
    return run_loop(config, shards, train_eval, test_set);
}

FederationResult run_centralized(const FedConfig &config,
                                 const rnn::Batch &train_set,
                                 const rnn::Batch &test_set) {
    FedConfig one = config;
    one.clients = 1;
    return run_loop(one, {train_set}, train_set, test_set);
}

} // namespace fedqt::fed
