#include "stackrl/nn.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <json.hpp>

#include "stackrl/errors.hpp"

namespace stackrl::nn {

namespace {

constexpr double kProbClamp = 1e-12;

void activate(Activation act, Eigen::MatrixXd& z) {
    switch (act) {
        case Activation::ReLU:
            z = z.cwiseMax(0.0);
            break;
        case Activation::Sigmoid:
            z = z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
            break;
        case Activation::Identity:
            break;
    }
}

// d(activation)/d(pre-activation), expressed through the activation output.
Eigen::MatrixXd activation_derivative(Activation act, const Eigen::MatrixXd& y) {
    switch (act) {
        case Activation::ReLU:
            return (y.array() > 0.0).cast<double>().matrix();
        case Activation::Sigmoid:
            return (y.array() * (1.0 - y.array())).matrix();
        case Activation::Identity:
            break;
    }
    return Eigen::MatrixXd::Ones(y.rows(), y.cols());
}

void check_targets(const Network& net, const Eigen::MatrixXd& outputs, const Eigen::MatrixXd& targets) {
    if (targets.rows() != net.output_dim() || targets.cols() != outputs.cols()) {
        throw DimensionMismatch("targets " + std::to_string(targets.rows()) + "x" +
                                std::to_string(targets.cols()) + " vs outputs " +
                                std::to_string(outputs.rows()) + "x" + std::to_string(outputs.cols()));
    }
}

}  // namespace

const char* to_string(Activation act) {
    switch (act) {
        case Activation::ReLU: return "relu";
        case Activation::Sigmoid: return "sigmoid";
        case Activation::Identity: return "id";
    }
    return "id";
}

Activation parse_activation(const std::string& text) {
    if (text == "relu") return Activation::ReLU;
    if (text == "sigmoid") return Activation::Sigmoid;
    if (text == "id") return Activation::Identity;
    throw ParseError("unknown activation '" + text + "'");
}

std::size_t Network::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
    return n;
}

std::vector<LayerSpec> mlp_specs(int in_dim, std::span<const int> hidden, int out_dim,
                                 Activation hidden_act, Activation out_act) {
    std::vector<LayerSpec> specs;
    int prev = in_dim;
    for (int h : hidden) {
        specs.push_back({prev, h, hidden_act});
        prev = h;
    }
    specs.push_back({prev, out_dim, out_act});
    return specs;
}

Network net_init(std::span<const LayerSpec> specs, std::uint64_t seed) {
    if (specs.empty()) throw BadSpec("network needs at least one layer");
    for (std::size_t i = 0; i < specs.size(); ++i) {
        if (specs[i].in_dim < 1 || specs[i].out_dim < 1) {
            throw BadSpec("layer " + std::to_string(i) + " has a non-positive dimension");
        }
        if (i > 0 && specs[i].in_dim != specs[i - 1].out_dim) {
            throw BadSpec("layer " + std::to_string(i) + " input does not match previous output");
        }
    }
    Network net;
    net.seed = seed;
    std::mt19937_64 rng(seed);
    for (const auto& spec : specs) {
        const double limit = std::sqrt(6.0 / (spec.in_dim + spec.out_dim));
        std::uniform_real_distribution<double> dist(-limit, limit);
        Layer layer{spec, Eigen::MatrixXd(spec.out_dim, spec.in_dim), Eigen::VectorXd::Zero(spec.out_dim)};
        // Fill row-major so the draw order matches the model document layout.
        for (int r = 0; r < spec.out_dim; ++r) {
            for (int c = 0; c < spec.in_dim; ++c) layer.weights(r, c) = dist(rng);
        }
        net.layers.push_back(std::move(layer));
    }
    return net;
}

Eigen::MatrixXd forward(const Network& net, const Eigen::MatrixXd& inputs, ForwardCache* cache) {
    if (inputs.rows() != net.input_dim()) {
        throw DimensionMismatch("input length " + std::to_string(inputs.rows()) + ", network expects " +
                                std::to_string(net.input_dim()));
    }
    if (cache) {
        cache->activations.resize(net.layers.size() + 1);
        cache->activations[0] = inputs;
        cache->input_is_sparse = false;
    }
    Eigen::MatrixXd a = inputs;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const Layer& layer = net.layers[l];
        Eigen::MatrixXd z = layer.weights * a;
        z.colwise() += layer.bias;
        activate(layer.spec.activation, z);
        a = std::move(z);
        if (cache) cache->activations[l + 1] = a;
    }
    return a;
}

Eigen::MatrixXd forward(const Network& net, const Eigen::SparseMatrix<double>& inputs,
                        ForwardCache* cache) {
    if (inputs.rows() != net.input_dim()) {
        throw DimensionMismatch("input length " + std::to_string(inputs.rows()) + ", network expects " +
                                std::to_string(net.input_dim()));
    }
    if (cache) {
        cache->activations.assign(net.layers.size() + 1, Eigen::MatrixXd());
        cache->sparse_input = inputs;
        cache->input_is_sparse = true;
    }
    Eigen::MatrixXd a;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const Layer& layer = net.layers[l];
        Eigen::MatrixXd z = l == 0 ? Eigen::MatrixXd(layer.weights * inputs) : Eigen::MatrixXd(layer.weights * a);
        z.colwise() += layer.bias;
        activate(layer.spec.activation, z);
        a = std::move(z);
        if (cache) cache->activations[l + 1] = a;
    }
    return a;
}

Eigen::VectorXd forward(const Network& net, const Eigen::VectorXd& input) {
    const Eigen::MatrixXd out = forward(net, Eigen::MatrixXd(input), nullptr);
    return out.col(0);
}

Gradients Gradients::zeros_like(const Network& net) {
    Gradients g;
    for (const auto& l : net.layers) {
        g.weights.push_back(Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()));
        g.biases.push_back(Eigen::VectorXd::Zero(l.bias.size()));
    }
    return g;
}

double loss_value(Loss loss, const Eigen::MatrixXd& outputs, const Eigen::MatrixXd& targets) {
    if (outputs.rows() != targets.rows() || outputs.cols() != targets.cols()) {
        throw DimensionMismatch("loss operands differ in shape");
    }
    const double batch = static_cast<double>(outputs.cols());
    if (loss == Loss::MSE) return (outputs - targets).squaredNorm() / batch;
    double total = 0.0;
    for (Eigen::Index j = 0; j < outputs.cols(); ++j) {
        for (Eigen::Index i = 0; i < outputs.rows(); ++i) {
            const double p = std::clamp(outputs(i, j), kProbClamp, 1.0 - kProbClamp);
            const double t = targets(i, j);
            total -= t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
        }
    }
    return total / batch;
}

Gradients backward(const Network& net, const ForwardCache& cache, Loss loss,
                   const Eigen::MatrixXd& targets) {
    if (cache.activations.size() != net.layers.size() + 1) {
        throw DimensionMismatch("forward cache does not belong to this network");
    }
    const Eigen::MatrixXd& out = cache.activations.back();
    check_targets(net, out, targets);
    const double batch = static_cast<double>(out.cols());

    if (loss == Loss::BinaryCrossEntropy && net.layers.back().spec.activation == Activation::Sigmoid) {
        // Fused sigmoid + BCE: dL/dz = (p - t) / batch.
        Eigen::MatrixXd delta = (out - targets) / batch;
        Gradients g = Gradients::zeros_like(net);
        for (std::size_t l = net.layers.size(); l-- > 0;) {
            const Eigen::MatrixXd& a_in = cache.activations[l];
            if (l == 0 && cache.input_is_sparse) {
                g.weights[l] = delta * cache.sparse_input.transpose();
            } else {
                g.weights[l] = delta * a_in.transpose();
            }
            g.biases[l] = delta.rowwise().sum();
            if (l == 0) break;
            delta = (net.layers[l].weights.transpose() * delta)
                        .cwiseProduct(activation_derivative(net.layers[l - 1].spec.activation, a_in));
        }
        return g;
    }

    Eigen::MatrixXd grad;
    if (loss == Loss::MSE) {
        grad = 2.0 * (out - targets) / batch;
    } else {
        grad = out.binaryExpr(targets, [batch](double y, double t) {
            const double p = std::clamp(y, kProbClamp, 1.0 - kProbClamp);
            return (-t / p + (1.0 - t) / (1.0 - p)) / batch;
        });
    }
    return backward_from_output(net, cache, grad);
}

Gradients backward_from_output(const Network& net, const ForwardCache& cache,
                               const Eigen::MatrixXd& output_grad) {
    if (cache.activations.size() != net.layers.size() + 1) {
        throw DimensionMismatch("forward cache does not belong to this network");
    }
    const Eigen::MatrixXd& out = cache.activations.back();
    if (output_grad.rows() != out.rows() || output_grad.cols() != out.cols()) {
        throw DimensionMismatch("output gradient shape differs from network output");
    }
    Gradients g = Gradients::zeros_like(net);
    Eigen::MatrixXd delta =
        output_grad.cwiseProduct(activation_derivative(net.layers.back().spec.activation, out));
    for (std::size_t l = net.layers.size(); l-- > 0;) {
        const Eigen::MatrixXd& a_in = cache.activations[l];
        if (l == 0 && cache.input_is_sparse) {
            g.weights[l] = delta * cache.sparse_input.transpose();
        } else {
            g.weights[l].noalias() = delta * a_in.transpose();
        }
        g.biases[l] = delta.rowwise().sum();
        if (l == 0) break;
        delta = (net.layers[l].weights.transpose() * delta)
                    .cwiseProduct(activation_derivative(net.layers[l - 1].spec.activation, a_in));
    }
    return g;
}

namespace {

void check_step_shapes(const Network& net, const Gradients& grads, Gradients& state) {
    if (grads.weights.size() != net.layers.size() || grads.biases.size() != net.layers.size()) {
        throw ShapeMismatch("gradient layer count differs from network");
    }
    if (state.weights.empty()) state = Gradients::zeros_like(net);
    if (state.weights.size() != net.layers.size()) {
        throw ShapeMismatch("optimizer state belongs to a different network");
    }
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const Layer& layer = net.layers[l];
        if (grads.weights[l].rows() != layer.weights.rows() ||
            grads.weights[l].cols() != layer.weights.cols() ||
            grads.biases[l].size() != layer.bias.size()) {
            throw ShapeMismatch("gradient shape differs at layer " + std::to_string(l));
        }
    }
}

}  // namespace

void optimizer_step(Network& net, const Gradients& grads, SgdMomentum& opt) {
    check_step_shapes(net, grads, opt.velocity);
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        Layer& layer = net.layers[l];
        auto& vw = opt.velocity.weights[l];
        auto& vb = opt.velocity.biases[l];
        vw = opt.momentum * vw - opt.learning_rate * grads.weights[l];
        vb = opt.momentum * vb - opt.learning_rate * grads.biases[l];
        layer.weights += vw;
        layer.bias += vb;
    }
}

void optimizer_step(Network& net, const Gradients& grads, Adam& opt) {
    check_step_shapes(net, grads, opt.m);
    if (opt.v.weights.size() != net.layers.size()) opt.v = Gradients::zeros_like(net);
    ++opt.t;
    const double c1 = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.t));
    const double c2 = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.t));
    const double step = opt.learning_rate * std::sqrt(c2) / c1;
    auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
        m = opt.beta1 * m + (1.0 - opt.beta1) * g;
        v = opt.beta2 * v + (1.0 - opt.beta2) * g.cwiseProduct(g);
        param.array() -= step * m.array() / (v.array().sqrt() + opt.epsilon * std::sqrt(c2));
    };
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        update(net.layers[l].weights, grads.weights[l], opt.m.weights[l], opt.v.weights[l]);
        update(net.layers[l].bias, grads.biases[l], opt.m.biases[l], opt.v.biases[l]);
    }
}

double grad_check(const Network& net, Loss loss, const Eigen::MatrixXd& inputs,
                  const Eigen::MatrixXd& targets, double h) {
    ForwardCache cache;
    forward(net, inputs, &cache);
    const Gradients analytic = backward(net, cache, loss, targets);

    Network probe = net;
    auto loss_at = [&]() { return loss_value(loss, forward(probe, inputs), targets); };
    auto rel = [](double a, double n) { return std::abs(a - n) / std::max(1e-12, std::abs(a) + std::abs(n)); };

    double worst = 0.0;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        auto& w = probe.layers[l].weights;
        for (Eigen::Index i = 0; i < w.size(); ++i) {
            const double saved = w.data()[i];
            w.data()[i] = saved + h;
            const double up = loss_at();
            w.data()[i] = saved - h;
            const double down = loss_at();
            w.data()[i] = saved;
            worst = std::max(worst, rel(analytic.weights[l].data()[i], (up - down) / (2.0 * h)));
        }
        auto& b = probe.layers[l].bias;
        for (Eigen::Index i = 0; i < b.size(); ++i) {
            const double saved = b(i);
            b(i) = saved + h;
            const double up = loss_at();
            b(i) = saved - h;
            const double down = loss_at();
            b(i) = saved;
            worst = std::max(worst, rel(analytic.biases[l](i), (up - down) / (2.0 * h)));
        }
    }
    return worst;
}

std::string save_model(const Network& net) {
    nlohmann::ordered_json doc;
    doc["version"] = kModelVersion;
    auto arch = nlohmann::ordered_json::array();
    auto weights = nlohmann::ordered_json::array();
    auto biases = nlohmann::ordered_json::array();
    for (const auto& l : net.layers) {
        arch.push_back({{"in", l.spec.in_dim}, {"out", l.spec.out_dim}, {"act", to_string(l.spec.activation)}});
        std::vector<double> w;
        w.reserve(static_cast<std::size_t>(l.weights.size()));
        for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
            for (Eigen::Index c = 0; c < l.weights.cols(); ++c) w.push_back(l.weights(r, c));
        }
        weights.push_back(std::move(w));
        biases.push_back(std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size()));
    }
    doc["arch"] = std::move(arch);
    doc["weights"] = std::move(weights);
    doc["biases"] = std::move(biases);
    doc["seed"] = net.seed;
    return doc.dump();
}

Network load_model(const std::string& document) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(document);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("model document: ") + e.what());
    }
    try {
        if (!doc.is_object() || !doc.contains("version")) throw ParseError("model document has no version");
        const int version = doc.at("version").get<int>();
        if (version != kModelVersion) {
            throw VersionMismatch("model version " + std::to_string(version) + ", expected " +
                                  std::to_string(kModelVersion));
        }
        const auto& arch = doc.at("arch");
        const auto& weights = doc.at("weights");
        const auto& biases = doc.at("biases");
        if (!arch.is_array() || arch.empty() || weights.size() != arch.size() || biases.size() != arch.size()) {
            throw ParseError("model arch/weights/biases disagree in length");
        }
        std::vector<LayerSpec> specs;
        for (const auto& a : arch) {
            specs.push_back({a.at("in").get<int>(), a.at("out").get<int>(),
                             parse_activation(a.at("act").get<std::string>())});
        }
        Network net;
        try {
            net = net_init(specs, doc.at("seed").get<std::uint64_t>());
        } catch (const BadSpec& e) {
            throw ParseError(e.what());
        }
        for (std::size_t l = 0; l < specs.size(); ++l) {
            auto& layer = net.layers[l];
            const auto w = weights[l].get<std::vector<double>>();
            const auto b = biases[l].get<std::vector<double>>();
            if (w.size() != static_cast<std::size_t>(layer.weights.size()) ||
                b.size() != static_cast<std::size_t>(layer.bias.size())) {
                throw ParseError("layer " + std::to_string(l) + " parameter count disagrees with arch");
            }
            std::size_t k = 0;
            for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
                for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) layer.weights(r, c) = w[k++];
            }
            for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias(i) = b[static_cast<std::size_t>(i)];
        }
        return net;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("model document: ") + e.what());
    }
}

}  // namespace stackrl::nn
