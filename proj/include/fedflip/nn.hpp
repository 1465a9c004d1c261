#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "fedflip/matrix.hpp"

namespace fedflip {

// Network shape: input_dim -> hidden_dims... -> num_classes.
// Hidden layers use ReLU, the output layer softmax.
struct MlpConfig {
    int input_dim = 784;
    std::vector<int> hidden_dims = {200, 200, 200};
    int num_classes = 7;

    void validate() const;

    // (fan_in, fan_out) per layer, chained through the hidden dims
    std::vector<std::pair<int, int>> layer_shapes() const;
};

// One dense layer worth of tensors. Reused for parameters, gradients and
// optimizer velocity, which are shape-identical by construction.
struct LayerTensors {
    Matrix weights;               // fan_in x fan_out
    std::vector<double> biases;   // fan_out

    bool operator==(const LayerTensors&) const = default;
};

struct ModelParams {
    std::vector<LayerTensors> layers;

    bool operator==(const ModelParams&) const = default;
};

struct Gradients {
    std::vector<LayerTensors> layers;
};

// Classical momentum: v <- momentum * v - lr * g; theta <- theta + v.
struct OptimizerState {
    std::vector<LayerTensors> velocity;
    double learning_rate = 0.01;
    double momentum = 0.9;
};

struct Batch {
    Matrix features;           // b x input_dim, values in [0, 1]
    std::vector<int> labels;   // b class indices
};

// Glorot-uniform weights (U[-L, L], L = sqrt(6 / (fan_in + fan_out))), zero
// biases. The output layer is drawn at a tenth of its Glorot bound so the
// initial softmax stays near uniform and the starting loss near ln(num_classes).
// Identical seeds give bit-identical parameters.
ModelParams init_params(const MlpConfig& config, std::uint64_t seed);

// Row-wise class probabilities for a feature matrix (softmax with
// max-subtraction; each row sums to 1).
Matrix forward(const ModelParams& params, const Matrix& features);

// Mean categorical cross-entropy, -ln(p[label]) averaged over rows.
// Probabilities are clamped below at 1e-12 before the log.
double loss(const Matrix& probs, const std::vector<int>& labels);

struct BackwardResult {
    double loss = 0.0;
    Gradients grads;
};

// Analytic gradient of the batch-mean cross-entropy with respect to every
// weight and bias. The returned loss equals loss(forward(params, batch), labels).
BackwardResult backward(const ModelParams& params, const Batch& batch);

// Fresh zero-velocity state shaped like `params`.
OptimizerState make_optimizer(const ModelParams& params, double learning_rate,
                              double momentum);

// One momentum-SGD update; pure, returns the new parameters and velocity.
std::pair<ModelParams, OptimizerState> sgd_step(const ModelParams& params,
                                                const Gradients& grads,
                                                const OptimizerState& state);

// In-place variant used by the training loops; identical arithmetic.
void sgd_step_inplace(ModelParams& params, const Gradients& grads, OptimizerState& state);

// Argmax of forward probabilities per row; ties break to the lowest class index.
std::vector<int> predict(const ModelParams& params, const Matrix& features);

}  // namespace fedflip
