#include "faae/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace faae {

std::string to_string(Activation a) {
    switch (a) {
        case Activation::Identity: return "identity";
        case Activation::ReLU: return "relu";
        case Activation::Tanh: return "tanh";
        case Activation::Sigmoid: return "sigmoid";
    }
    return "?";
}

Vec apply_activation(Activation act, const Vec& pre) {
    Vec out(pre.size());
    switch (act) {
        case Activation::Identity:
            out = pre;
            break;
        case Activation::ReLU:
            for (std::size_t i = 0; i < pre.size(); ++i) out[i] = pre[i] > 0.0 ? pre[i] : 0.0;
            break;
        case Activation::Tanh:
            for (std::size_t i = 0; i < pre.size(); ++i) out[i] = std::tanh(pre[i]);
            break;
        case Activation::Sigmoid:
            for (std::size_t i = 0; i < pre.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-pre[i]));
            break;
    }
    return out;
}

// derivative expressed through the activated output
static double activation_deriv(Activation act, double out) {
    switch (act) {
        case Activation::Identity: return 1.0;
        case Activation::ReLU: return out > 0.0 ? 1.0 : 0.0;
        case Activation::Tanh: return 1.0 - out * out;
        case Activation::Sigmoid: return out * (1.0 - out);
    }
    return 0.0;
}

Vec dense_forward(const DenseLayer& layer, const Vec& input) {
    if (input.size() != layer.in_dim()) {
        throw std::invalid_argument("dense_forward: expected input of length " +
                                    std::to_string(layer.in_dim()) + ", got " +
                                    std::to_string(input.size()));
    }
    Vec pre = matvec(layer.weights, input);
    for (std::size_t i = 0; i < pre.size(); ++i) pre[i] += layer.bias[i];
    return apply_activation(layer.activation, pre);
}

FeedForward FeedForward::make(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                              std::size_t output_dim, Activation hidden_act,
                              Activation head_act) {
    std::vector<DenseLayer> layers;
    std::size_t in = input_dim;
    for (std::size_t h : hidden) {
        layers.emplace_back(h, in, hidden_act);
        in = h;
    }
    layers.emplace_back(output_dim, in, head_act);
    return FeedForward(std::move(layers));
}

Vec FeedForward::forward(const Vec& x) const {
    Vec cur = x;
    for (const auto& layer : layers_) cur = dense_forward(layer, cur);
    return cur;
}

ForwardTrace FeedForward::forward_trace(const Vec& x) const {
    ForwardTrace trace;
    trace.inputs.reserve(layers_.size());
    trace.outputs.reserve(layers_.size());
    Vec cur = x;
    for (const auto& layer : layers_) {
        trace.inputs.push_back(cur);
        cur = dense_forward(layer, cur);
        trace.outputs.push_back(cur);
    }
    trace.output = cur;
    return trace;
}

StackGrads FeedForward::backward(const ForwardTrace& trace, const Vec& upstream) const {
    if (trace.inputs.size() != layers_.size() || trace.outputs.size() != layers_.size()) {
        throw std::invalid_argument("backward: forward trace missing or from a different stack");
    }
    if (upstream.size() != output_dim()) {
        throw std::invalid_argument("backward: upstream gradient of length " +
                                    std::to_string(upstream.size()) + ", expected " +
                                    std::to_string(output_dim()));
    }
    StackGrads grads;
    grads.layers.resize(layers_.size());
    Vec delta = upstream;
    for (std::size_t li = layers_.size(); li-- > 0;) {
        const DenseLayer& layer = layers_[li];
        const Vec& out = trace.outputs[li];
        // through the activation
        Vec dpre(delta.size());
        for (std::size_t i = 0; i < delta.size(); ++i)
            dpre[i] = delta[i] * activation_deriv(layer.activation, out[i]);

        LayerGrads& lg = grads.layers[li];
        lg.dw = Matrix(layer.out_dim(), layer.in_dim());
        add_outer(lg.dw, dpre, trace.inputs[li]);
        lg.db = dpre;

        delta = matvec_transposed(layer.weights, dpre);
    }
    grads.input_grad = std::move(delta);
    return grads;
}

std::size_t FeedForward::param_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers_) n += layer.weights.size() + layer.bias.size();
    return n;
}

Vec FeedForward::param_vector() const {
    Vec params;
    params.reserve(param_count());
    for (const auto& layer : layers_) {
        params.insert(params.end(), layer.weights.data.begin(), layer.weights.data.end());
        params.insert(params.end(), layer.bias.begin(), layer.bias.end());
    }
    return params;
}

void FeedForward::set_param_vector(const Vec& params) {
    if (params.size() != param_count()) {
        throw std::invalid_argument("set_param_vector: expected " +
                                    std::to_string(param_count()) + " values, got " +
                                    std::to_string(params.size()));
    }
    std::size_t pos = 0;
    for (auto& layer : layers_) {
        std::copy(params.begin() + pos, params.begin() + pos + layer.weights.size(),
                  layer.weights.data.begin());
        pos += layer.weights.size();
        std::copy(params.begin() + pos, params.begin() + pos + layer.bias.size(),
                  layer.bias.begin());
        pos += layer.bias.size();
    }
}

StackGrads FeedForward::zero_grads() const {
    StackGrads grads;
    grads.layers.reserve(layers_.size());
    for (const auto& layer : layers_) {
        LayerGrads lg;
        lg.dw = Matrix(layer.out_dim(), layer.in_dim());
        lg.db = Vec(layer.out_dim(), 0.0);
        grads.layers.push_back(std::move(lg));
    }
    return grads;
}

Vec FeedForward::flatten_grads(const StackGrads& grads) {
    Vec flat;
    for (const auto& lg : grads.layers) {
        flat.insert(flat.end(), lg.dw.data.begin(), lg.dw.data.end());
        flat.insert(flat.end(), lg.db.begin(), lg.db.end());
    }
    return flat;
}

void accumulate(StackGrads& into, const StackGrads& from, double scale) {
    if (into.layers.size() != from.layers.size())
        throw std::invalid_argument("accumulate: grad shape mismatch");
    for (std::size_t i = 0; i < into.layers.size(); ++i) {
        axpy(into.layers[i].dw.data, from.layers[i].dw.data, scale);
        axpy(into.layers[i].db, from.layers[i].db, scale);
    }
}

void scale_grads(StackGrads& grads, double scale) {
    for (auto& lg : grads.layers) {
        for (double& v : lg.dw.data) v *= scale;
        for (double& v : lg.db) v *= scale;
    }
}

void init_glorot(FeedForward& net, RngStream& rng) {
    for (auto& layer : net.layers()) {
        const double fan_in = static_cast<double>(layer.in_dim());
        const double fan_out = static_cast<double>(layer.out_dim());
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        for (double& w : layer.weights.data) w = rng.uniform(-limit, limit);
        for (double& b : layer.bias) b = 0.0;
    }
}

}  // namespace faae
