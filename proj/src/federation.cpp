#include "fedflip/federation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "fedflip/errors.hpp"
#include "fedflip/parallel.hpp"
#include "fedflip/rng.hpp"

namespace fedflip {

namespace {

constexpr std::size_t kEvalChunk = 512;

struct Evaluation {
    double loss = 0.0;
    double accuracy = 0.0;
    std::vector<int> preds;
};

// Chunked forward pass over the test set; chunking is fixed so the summation
// order never depends on the thread budget.
Evaluation evaluate(const ModelParams& params, const LabeledDataset& test) {
    Evaluation ev;
    ev.preds.reserve(test.size());
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < test.size(); start += kEvalChunk) {
        const std::size_t len = std::min(kEvalChunk, test.size() - start);
        Matrix chunk(len, test.features.cols());
        std::copy(test.features.row(start), test.features.row(start) + len * test.features.cols(),
                  chunk.row(0));
        const Matrix probs = forward(params, chunk);
        for (std::size_t r = 0; r < len; ++r) {
            const double* row = probs.row(r);
            int best = 0;
            for (std::size_t c = 1; c < probs.cols(); ++c) {
                if (row[c] > row[best]) best = static_cast<int>(c);
            }
            ev.preds.push_back(best);
            if (best == test.labels[start + r]) ++correct;
            loss_sum -= std::log(std::max(row[test.labels[start + r]], 1e-12));
        }
    }
    ev.loss = loss_sum / static_cast<double>(test.size());
    ev.accuracy = static_cast<double>(correct) / static_cast<double>(test.size());
    return ev;
}

std::vector<std::string> index_class_names(int num_classes) {
    std::vector<std::string> names;
    names.reserve(num_classes);
    for (int c = 0; c < num_classes; ++c) names.push_back(std::to_string(c));
    return names;
}

RunResult run_rounds(const std::vector<ClientShard>& shards, const LabeledDataset& test,
                     const HyperParams& hp, std::uint64_t seed, int threads) {
    if (threads <= 0) threads = worker_threads();

    RunResult result;
    ModelParams global = init_params(hp.mlp_config(), derive_seed(seed, kInitStream));
    {
        const Evaluation ev = evaluate(global, test);
        result.initial_loss = ev.loss;
        result.initial_accuracy = ev.accuracy;
    }

    std::vector<double> weights(shards.size());
    for (std::size_t i = 0; i < shards.size(); ++i) {
        weights[i] = static_cast<double>(shards[i].data.size());
    }

    std::vector<ModelParams> locals(shards.size());
    Evaluation ev;
    result.history.reserve(hp.comm_rounds);
    for (int round = 1; round <= hp.comm_rounds; ++round) {
        parallel_for(shards.size(), threads, [&](std::size_t i) {
            locals[i] = local_train(global, shards[i], hp,
                                    derive_seed(seed, kRoundStream, round, i));
        });
        global = fed_average(locals, weights);
        ev = evaluate(global, test);
        result.history.push_back({round, ev.loss, ev.accuracy});
    }

    result.report = report(confusion(ev.preds, test.labels, hp.num_classes),
                           index_class_names(hp.num_classes));
    result.final_params = std::move(global);
    return result;
}

}  // namespace

void HyperParams::validate() const {
    std::string bad;
    if (learning_rate < 0.0) bad = "learning_rate must be >= 0";
    else if (momentum < 0.0 || momentum >= 1.0) bad = "momentum must be in [0, 1)";
    else if (batch_size < 1) bad = "batch_size must be positive";
    else if (comm_rounds < 1) bad = "comm_rounds must be positive";
    else if (n_clients < 1) bad = "num_clients must be positive";
    else if (local_epochs < 1) bad = "local_epochs must be positive";
    if (!bad.empty()) throw ConfigError("HyperParams: " + bad);
    mlp_config().validate();
}

ModelParams local_train(const ModelParams& global, const ClientShard& shard,
                        const HyperParams& hp, std::uint64_t round_seed) {
    ModelParams params = global;
    OptimizerState state = make_optimizer(params, hp.learning_rate, hp.momentum);
    for (int epoch = 0; epoch < hp.local_epochs; ++epoch) {
        for (const Batch& batch : batches(shard, hp.batch_size, derive_seed(round_seed, epoch))) {
            const BackwardResult back = backward(params, batch);
            sgd_step_inplace(params, back.grads, state);
        }
    }
    return params;
}

ModelParams fed_average(const std::vector<ModelParams>& locals,
                        const std::vector<double>& weights) {
    if (locals.empty()) throw ShapeError("fed_average: no models to aggregate");
    if (weights.size() != locals.size()) {
        throw ShapeError("fed_average: weight count does not match model count");
    }
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw ShapeError("fed_average: negative weight");
        total += w;
    }
    if (!(total > 0.0)) throw ShapeError("fed_average: weights sum to zero");

    const std::size_t n_layers = locals.front().layers.size();
    for (const ModelParams& m : locals) {
        bool ok = m.layers.size() == n_layers;
        for (std::size_t l = 0; ok && l < n_layers; ++l) {
            ok = m.layers[l].weights.rows() == locals.front().layers[l].weights.rows() &&
                 m.layers[l].weights.cols() == locals.front().layers[l].weights.cols() &&
                 m.layers[l].biases.size() == locals.front().layers[l].biases.size();
        }
        if (!ok) throw ShapeError("fed_average: models are not shape-identical");
    }

    ModelParams out = locals.front();
    for (std::size_t l = 0; l < n_layers; ++l) {
        auto average = [&](auto get) {
            auto& dst = get(out.layers[l]);
            for (std::size_t i = 0; i < dst.size(); ++i) {
                double acc = 0.0, lo = get(locals.front().layers[l])[i], hi = lo;
                for (std::size_t m = 0; m < locals.size(); ++m) {
                    const double v = get(locals[m].layers[l])[i];
                    acc += weights[m] * v;
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
                dst[i] = std::clamp(acc / total, lo, hi);
            }
        };
        average([](auto& layer) -> auto& { return layer.weights.data(); });
        average([](auto& layer) -> auto& { return layer.biases; });
    }
    return out;
}

RunResult run_federated(const std::vector<ClientShard>& train_shards,
                        const LabeledDataset& test, const HyperParams& hp,
                        const std::optional<AttackSpec>& attack, std::uint64_t seed,
                        int threads) {
    hp.validate();
    if (train_shards.size() != static_cast<std::size_t>(hp.n_clients)) {
        std::ostringstream msg;
        msg << "run_federated: " << train_shards.size() << " shards for " << hp.n_clients
            << " clients";
        throw ShapeError(msg.str());
    }
    if (attack && attack->malicious_client >= hp.n_clients) {
        std::ostringstream msg;
        msg << "run_federated: malicious_client " << attack->malicious_client
            << " out of range for " << hp.n_clients << " clients";
        throw ConfigError(msg.str());
    }

    std::vector<ClientShard> shards = train_shards;
    if (attack) {
        shards[attack->malicious_client] =
            flip_labels(shards[attack->malicious_client], *attack, hp.num_classes).poisoned;
    }
    return run_rounds(shards, test, hp, seed, threads);
}

RunResult run_centralized(const LabeledDataset& train, const LabeledDataset& test,
                          const HyperParams& hp, const std::optional<AttackSpec>& attack,
                          std::uint64_t seed, int threads) {
    hp.validate();
    ClientShard whole{0, train};
    if (attack) {
        whole = flip_labels(whole, *attack, hp.num_classes).poisoned;
    }
    HyperParams central = hp;
    central.batch_size = hp.batch_size * hp.n_clients;
    central.n_clients = 1;
    return run_rounds({std::move(whole)}, test, central, seed, threads);
}

}  // namespace fedflip
