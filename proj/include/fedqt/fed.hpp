// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include <fedqt/rng.hpp>
#include <fedqt/rnn.hpp>

namespace fedqt::fed {

/// Adam-style adaptive step; moments are created fresh for every local
/// training call rather than surviving across rounds.
struct OptimizerConfig {
    double learning_rate = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct FedConfig {
    int rounds = 100;
    int clients = 4;
    int local_epochs = 1;
    int batch_size = 0; // 0 = one full-shard step per epoch
    bool parallel_clients = false;
    std::uint64_t seed = 1;
    OptimizerConfig optimizer;
    rnn::ModelSpec model;
};

/// The only object that crosses the client/server boundary: a flat
/// parameter vector tagged with its model kind. Raw windows never do.
struct ParamBundle {
    rnn::ModelKind kind = rnn::ModelKind::kQtLstm;
    Eigen::VectorXd values;
};

struct ClientUpdate {
    int client_id = 0;
    ParamBundle bundle;
};

struct RoundRecord {
    int round = 0;
    double train_loss = 0.0;
    double test_loss = 0.0;
};

struct FederationResult {
    std::vector<RoundRecord> history;
    ParamBundle final_bundle;
};

/// Seeded shuffle followed by round-robin assignment: shard sizes differ
/// by at most one, shards are disjoint and jointly exhaustive.
std::vector<rnn::Batch> partition(const rnn::Batch &dataset, int clients,
                                  std::uint64_t seed);

/// Runs `epochs` passes of Adam steps over the shard (one full-shard step
/// per epoch unless batch_size splits it; minibatch order is drawn from
/// the caller-provided stream) and returns the updated bundle.
ParamBundle local_train(const rnn::ModelSpec &spec, const ParamBundle &bundle,
                        const rnn::Batch &shard, int epochs, int batch_size,
                        const OptimizerConfig &optimizer, Rng &stream);

/// Elementwise mean. Updates are first sorted by client id and then summed
/// pairwise, so the result is bitwise independent of argument order.
ParamBundle fedavg(const std::vector<ClientUpdate> &updates);

/// Deterministic per-client stream: the same (seed, round, client) triple
/// yields the same draws whether clients run serially or in parallel.
std::uint64_t client_stream_seed(std::uint64_t seed, int round, int client);

/// Full orchestration: per round, broadcast the global bundle, train every
/// client on its shard, average, and evaluate the aggregate on the full
/// train and test sets. Aborts with a diagnostic naming the round (and
/// client, where attributable) if anything goes non-finite.
FederationResult run_federation(const FedConfig &config,
                                const rnn::Batch &train_set,
                                const rnn::Batch &test_set);

/// Same loop with caller-supplied shards (they need not partition the
/// evaluation set; overlapping shards model replicated-data studies).
FederationResult run_federation_with_shards(
    const FedConfig &config, const std::vector<rnn::Batch> &shards,
    const rnn::Batch &train_eval, const rnn::Batch &test_set);

/// One node training on the full dataset with the same per-round stream
/// and evaluation as the federated loop — the degenerate-federation
/// reference path.
FederationResult run_centralized(const FedConfig &config,
                                 const rnn::Batch &train_set,
                                 const rnn::Batch &test_set);

} // namespace fedqt::fed
