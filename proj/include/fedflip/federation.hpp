#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fedflip/adversary.hpp"
#include "fedflip/dataset.hpp"
#include "fedflip/metrics.hpp"
#include "fedflip/nn.hpp"

namespace fedflip {

struct HyperParams {
    double learning_rate = 0.01;
    double momentum = 0.9;
    int batch_size = 32;
    int comm_rounds = 100;
    int n_clients = 10;
    int local_epochs = 1;
    int num_classes = kNumClasses;
    int input_dim = kInputDim;
    std::vector<int> hidden_dims = {200, 200, 200};

    void validate() const;
    MlpConfig mlp_config() const { return {input_dim, hidden_dims, num_classes}; }
};

struct RoundRecord {
    int round = 0;  // 1-based
    double global_loss = 0.0;
    double global_accuracy = 0.0;
};

struct RunResult {
    ModelParams final_params;
    std::vector<RoundRecord> history;  // one record per communication round
    ClassificationReport report;
    double initial_loss = 0.0;      // round-0 evaluation, before any training
    double initial_accuracy = 0.0;
};

// One client's round: copy the global model, reset velocity, run local_epochs
// of mini-batch momentum SGD over seeded batches. Epoch e draws its batch
// order from derive_seed(round_seed, e).
ModelParams local_train(const ModelParams& global, const ClientShard& shard,
                        const HyperParams& hp, std::uint64_t round_seed);

// Per-coordinate weighted mean with weights normalized to sum 1; aggregation
// order is a left fold in the given (ascending client) order. The result is
// clamped to the coordinate-wise envelope of the inputs: the exact mean lies
// inside it, rounding may spill an ulp outside, and the clamp also makes
// averaging identical models exact.
ModelParams fed_average(const std::vector<ModelParams>& locals,
                        const std::vector<double>& weights);

// FedAvg for hp.comm_rounds rounds over the given shards. If an attack is
// present the malicious shard is flipped once before round 1. Each round all
// clients train from the current global model (client seed =
// derive_seed(seed, kRoundStream, round, client_id)), the results are
// averaged by shard size, and the new global model is evaluated on `test`.
// `threads` caps client-level parallelism; 0 means worker_threads(). Results
// are bit-identical for any thread count.
RunResult run_federated(const std::vector<ClientShard>& train_shards,
                        const LabeledDataset& test, const HyperParams& hp,
                        const std::optional<AttackSpec>& attack, std::uint64_t seed,
                        int threads = 0);

// Matched centralized baseline: same model, optimizer and round schedule, but
// the whole training set is one shard and the batch size is
// hp.batch_size * hp.n_clients, so one round sees as many samples as all
// federated clients together. An attack flips p% of the whole training set.
RunResult run_centralized(const LabeledDataset& train, const LabeledDataset& test,
                          const HyperParams& hp, const std::optional<AttackSpec>& attack,
                          std::uint64_t seed, int threads = 0);

}  // namespace fedflip
