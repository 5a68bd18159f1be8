#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace stackrl::nn {

enum class Activation { ReLU, Sigmoid, Identity };
enum class Loss { MSE, BinaryCrossEntropy };

const char* to_string(Activation act);
Activation parse_activation(const std::string& text);

struct LayerSpec {
    int in_dim = 1;
    int out_dim = 1;
    Activation activation = Activation::Identity;
};

struct Layer {
    LayerSpec spec;
    Eigen::MatrixXd weights;  // out_dim x in_dim
    Eigen::VectorXd bias;     // out_dim
};

struct Network {
    std::vector<Layer> layers;
    std::uint64_t seed = 0;

    int input_dim() const { return layers.front().spec.in_dim; }
    int output_dim() const { return layers.back().spec.out_dim; }
    std::size_t parameter_count() const;
};

// Glorot-uniform weights, zero biases. Throws BadSpec.
Network net_init(std::span<const LayerSpec> specs, std::uint64_t seed);

// Convenience: in -> hidden... -> out with `hidden_act` on hidden layers.
std::vector<LayerSpec> mlp_specs(int in_dim, std::span<const int> hidden, int out_dim,
                                 Activation hidden_act, Activation out_act);

// activations[0] is the input batch, activations[l + 1] the output of layer l.
// For sparse-input forwards activations[0] is left empty and the input is kept
// in sparse_input.
struct ForwardCache {
    std::vector<Eigen::MatrixXd> activations;
    Eigen::SparseMatrix<double> sparse_input;
    bool input_is_sparse = false;
};

// Inputs are column-major batches: in_dim x batch. Throws DimensionMismatch.
Eigen::MatrixXd forward(const Network& net, const Eigen::MatrixXd& inputs,
                        ForwardCache* cache = nullptr);
Eigen::VectorXd forward(const Network& net, const Eigen::VectorXd& input);

// Same result as the dense overload; the first layer multiplies a sparse batch.
Eigen::MatrixXd forward(const Network& net, const Eigen::SparseMatrix<double>& inputs,
                        ForwardCache* cache = nullptr);

struct Gradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;

    static Gradients zeros_like(const Network& net);
};

// Mean over the batch of the per-sample loss summed over outputs.
// MSE: sum (y - t)^2. BCE: -sum t log y + (1 - t) log(1 - y).
double loss_value(Loss loss, const Eigen::MatrixXd& outputs, const Eigen::MatrixXd& targets);

Gradients backward(const Network& net, const ForwardCache& cache, Loss loss,
                   const Eigen::MatrixXd& targets);

// Backpropagates an arbitrary dL/d(output) matrix (out_dim x batch).
Gradients backward_from_output(const Network& net, const ForwardCache& cache,
                               const Eigen::MatrixXd& output_grad);

struct SgdMomentum {
    double learning_rate = 1e-3;
    double momentum = 0.9;
    Gradients velocity;  // lazily shaped on first step
};

// velocity = momentum * velocity - lr * grad; weights += velocity.
void optimizer_step(Network& net, const Gradients& grads, SgdMomentum& opt);

// Bias-corrected first/second moment estimates (Kingma & Ba).
struct Adam {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    Gradients m;
    Gradients v;
    std::int64_t t = 0;
};

void optimizer_step(Network& net, const Gradients& grads, Adam& opt);

// Max over parameters of |analytic - numeric| / max(1e-12, |analytic| + |numeric|)
// with central differences of step h.
double grad_check(const Network& net, Loss loss, const Eigen::MatrixXd& inputs,
                  const Eigen::MatrixXd& targets, double h = 1e-5);

constexpr int kModelVersion = 1;

// JSON model document; doubles are written in shortest round-trip form so a
// save/load cycle is bit-exact. load_model throws ParseError / VersionMismatch.
std::string save_model(const Network& net);
Network load_model(const std::string& document);

}  // namespace stackrl::nn
