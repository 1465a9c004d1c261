#include "fedflip/nn.hpp"

#include <cmath>
#include <sstream>

#include "fedflip/errors.hpp"
#include "fedflip/rng.hpp"

namespace fedflip {

namespace {

constexpr double kProbFloor = 1e-12;
constexpr double kOutputInitScale = 0.1;

void check_width(const char* op, const Matrix& features, std::size_t expected) {
    if (features.cols() != expected) {
        std::ostringstream msg;
        msg << op << ": expected input width " << expected << ", got " << features.cols();
        throw ShapeError(msg.str());
    }
}

void check_same_shape(const char* op, const std::vector<LayerTensors>& a,
                      const std::vector<LayerTensors>& b) {
    bool ok = a.size() == b.size();
    for (std::size_t i = 0; ok && i < a.size(); ++i) {
        ok = a[i].weights.rows() == b[i].weights.rows() &&
             a[i].weights.cols() == b[i].weights.cols() &&
             a[i].biases.size() == b[i].biases.size();
    }
    if (!ok) {
        std::ostringstream msg;
        msg << op << ": layer stacks are not shape-identical";
        throw ShapeError(msg.str());
    }
}

// z = x * W + b
Matrix affine(const Matrix& x, const LayerTensors& layer) {
    Matrix z = matmul(x, layer.weights);
    for (std::size_t r = 0; r < z.rows(); ++r) {
        double* zr = z.row(r);
        for (std::size_t c = 0; c < z.cols(); ++c) zr[c] += layer.biases[c];
    }
    return z;
}

void relu_inplace(Matrix& z) {
    for (double& v : z.data()) {
        if (v < 0.0) v = 0.0;
    }
}

void softmax_rows_inplace(Matrix& z) {
    for (std::size_t r = 0; r < z.rows(); ++r) {
        double* zr = z.row(r);
        double mx = zr[0];
        for (std::size_t c = 1; c < z.cols(); ++c) mx = std::max(mx, zr[c]);
        double sum = 0.0;
        for (std::size_t c = 0; c < z.cols(); ++c) {
            zr[c] = std::exp(zr[c] - mx);
            sum += zr[c];
        }
        for (std::size_t c = 0; c < z.cols(); ++c) zr[c] /= sum;
    }
}

// activations[0] = features, activations[l+1] = output of layer l
// (ReLU for hidden layers, softmax for the last one)
std::vector<Matrix> forward_cached(const ModelParams& params, const Matrix& features) {
    std::vector<Matrix> activations;
    activations.reserve(params.layers.size() + 1);
    activations.push_back(features);
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        Matrix z = affine(activations.back(), params.layers[l]);
        if (l + 1 < params.layers.size()) {
            relu_inplace(z);
        } else {
            softmax_rows_inplace(z);
        }
        activations.push_back(std::move(z));
    }
    return activations;
}

}  // namespace

void MlpConfig::validate() const {
    if (input_dim <= 0) throw ShapeError("MlpConfig: input_dim must be positive");
    for (int h : hidden_dims) {
        if (h <= 0) throw ShapeError("MlpConfig: hidden dims must be positive");
    }
    if (num_classes < 2) throw ShapeError("MlpConfig: need at least 2 classes");
}

std::vector<std::pair<int, int>> MlpConfig::layer_shapes() const {
    std::vector<std::pair<int, int>> shapes;
    int fan_in = input_dim;
    for (int h : hidden_dims) {
        shapes.emplace_back(fan_in, h);
        fan_in = h;
    }
    shapes.emplace_back(fan_in, num_classes);
    return shapes;
}

ModelParams init_params(const MlpConfig& config, std::uint64_t seed) {
    config.validate();
    Rng rng(seed);
    const auto shapes = config.layer_shapes();
    ModelParams params;
    params.layers.reserve(shapes.size());
    for (std::size_t l = 0; l < shapes.size(); ++l) {
        const auto [fan_in, fan_out] = shapes[l];
        double limit = std::sqrt(6.0 / (fan_in + fan_out));
        if (l + 1 == shapes.size()) limit *= kOutputInitScale;
        LayerTensors layer;
        layer.weights = Matrix(fan_in, fan_out);
        for (double& w : layer.weights.data()) w = rng.uniform(-limit, limit);
        layer.biases.assign(fan_out, 0.0);
        params.layers.push_back(std::move(layer));
    }
    return params;
}

Matrix forward(const ModelParams& params, const Matrix& features) {
    check_width("forward", features, params.layers.front().weights.rows());
    auto activations = forward_cached(params, features);
    return std::move(activations.back());
}

double loss(const Matrix& probs, const std::vector<int>& labels) {
    if (probs.rows() != labels.size()) {
        std::ostringstream msg;
        msg << "loss: " << probs.rows() << " probability rows vs " << labels.size()
            << " labels";
        throw ShapeError(msg.str());
    }
    double total = 0.0;
    for (std::size_t r = 0; r < probs.rows(); ++r) {
        const int label = labels[r];
        if (label < 0 || static_cast<std::size_t>(label) >= probs.cols()) {
            std::ostringstream msg;
            msg << "loss: label " << label << " out of range for " << probs.cols()
                << " classes";
            throw ShapeError(msg.str());
        }
        total -= std::log(std::max(probs(r, label), kProbFloor));
    }
    return total / static_cast<double>(probs.rows());
}

BackwardResult backward(const ModelParams& params, const Batch& batch) {
    check_width("backward", batch.features, params.layers.front().weights.rows());
    const std::size_t n = batch.features.rows();
    if (n != batch.labels.size()) {
        std::ostringstream msg;
        msg << "backward: " << n << " feature rows vs " << batch.labels.size() << " labels";
        throw ShapeError(msg.str());
    }

    const auto activations = forward_cached(params, batch.features);
    const Matrix& probs = activations.back();

    BackwardResult result;
    result.loss = loss(probs, batch.labels);
    result.grads.layers.resize(params.layers.size());

    // Softmax + cross-entropy: dL/dz_out = (probs - onehot) / n.
    Matrix delta = probs;
    for (std::size_t r = 0; r < n; ++r) delta(r, batch.labels[r]) -= 1.0;
    const double inv_n = 1.0 / static_cast<double>(n);
    for (double& v : delta.data()) v *= inv_n;

    for (std::size_t l = params.layers.size(); l-- > 0;) {
        LayerTensors& grad = result.grads.layers[l];
        grad.weights = matmul_at_b(activations[l], delta);
        grad.biases.assign(delta.cols(), 0.0);
        for (std::size_t r = 0; r < delta.rows(); ++r) {
            const double* drow = delta.row(r);
            for (std::size_t c = 0; c < delta.cols(); ++c) grad.biases[c] += drow[c];
        }
        if (l > 0) {
            // Through the ReLU: a > 0 iff its pre-activation was positive.
            delta = matmul_a_bt(delta, params.layers[l].weights);
            const Matrix& act = activations[l];
            double* d = delta.data().data();
            const double* a = act.data().data();
            for (std::size_t i = 0; i < delta.data().size(); ++i) {
                if (a[i] <= 0.0) d[i] = 0.0;
            }
        }
    }
    return result;
}

OptimizerState make_optimizer(const ModelParams& params, double learning_rate,
                              double momentum) {
    OptimizerState state;
    state.learning_rate = learning_rate;
    state.momentum = momentum;
    state.velocity.reserve(params.layers.size());
    for (const auto& layer : params.layers) {
        LayerTensors v;
        v.weights = Matrix(layer.weights.rows(), layer.weights.cols());
        v.biases.assign(layer.biases.size(), 0.0);
        state.velocity.push_back(std::move(v));
    }
    return state;
}

void sgd_step_inplace(ModelParams& params, const Gradients& grads, OptimizerState& state) {
    check_same_shape("sgd_step", params.layers, grads.layers);
    check_same_shape("sgd_step", params.layers, state.velocity);
    const double mu = state.momentum;
    const double lr = state.learning_rate;
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        auto& w = params.layers[l].weights.data();
        auto& vw = state.velocity[l].weights.data();
        const auto& gw = grads.layers[l].weights.data();
        for (std::size_t i = 0; i < w.size(); ++i) {
            vw[i] = mu * vw[i] - lr * gw[i];
            w[i] += vw[i];
        }
        auto& b = params.layers[l].biases;
        auto& vb = state.velocity[l].biases;
        const auto& gb = grads.layers[l].biases;
        for (std::size_t i = 0; i < b.size(); ++i) {
            vb[i] = mu * vb[i] - lr * gb[i];
            b[i] += vb[i];
        }
    }
}

std::pair<ModelParams, OptimizerState> sgd_step(const ModelParams& params,
                                                const Gradients& grads,
                                                const OptimizerState& state) {
    ModelParams new_params = params;
    OptimizerState new_state = state;
    sgd_step_inplace(new_params, grads, new_state);
    return {std::move(new_params), std::move(new_state)};
}

std::vector<int> predict(const ModelParams& params, const Matrix& features) {
    const Matrix probs = forward(params, features);
    std::vector<int> classes(probs.rows());
    for (std::size_t r = 0; r < probs.rows(); ++r) {
        const double* row = probs.row(r);
        int best = 0;
        for (std::size_t c = 1; c < probs.cols(); ++c) {
            if (row[c] > row[best]) best = static_cast<int>(c);
        }
        classes[r] = best;
    }
    return classes;
}

}  // namespace fedflip
