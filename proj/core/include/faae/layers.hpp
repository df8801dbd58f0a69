#pragma once

#include <string>
#include <vector>

#include "faae/matrix.hpp"
#include "faae/rng.hpp"

namespace faae {

enum class Activation { Identity, ReLU, Tanh, Sigmoid };

std::string to_string(Activation a);

/// One fully connected layer: activation(W * x + b), W is (out x in).
struct DenseLayer {
    Matrix weights;
    Vec bias;
    Activation activation = Activation::Identity;

    DenseLayer() = default;
    DenseLayer(std::size_t out, std::size_t in, Activation act)
        : weights(out, in), bias(out, 0.0), activation(act) {}

    std::size_t in_dim() const { return weights.cols; }
    std::size_t out_dim() const { return weights.rows; }
};

Vec apply_activation(Activation act, const Vec& pre);

/// Forward through a single layer. Throws on input-length mismatch.
Vec dense_forward(const DenseLayer& layer, const Vec& input);

/// Cached intermediate values from one forward pass; required by backward().
struct ForwardTrace {
    std::vector<Vec> inputs;  // input to each layer
    std::vector<Vec> outputs; // activated output of each layer
    Vec output;               // == outputs.back()
};

struct LayerGrads {
    Matrix dw;
    Vec db;
};

struct StackGrads {
    std::vector<LayerGrads> layers;
    Vec input_grad;
};

/// A plain feed-forward stack of dense layers.
class FeedForward {
public:
    FeedForward() = default;
    explicit FeedForward(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {}

    /// Builds input -> hidden... -> output with the given activations on
    /// hidden layers and head.
    static FeedForward make(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                            std::size_t output_dim, Activation hidden_act, Activation head_act);

    const std::vector<DenseLayer>& layers() const { return layers_; }
    std::vector<DenseLayer>& layers() { return layers_; }

    std::size_t input_dim() const { return layers_.front().in_dim(); }
    std::size_t output_dim() const { return layers_.back().out_dim(); }

    Vec forward(const Vec& x) const;
    ForwardTrace forward_trace(const Vec& x) const;

    /// Exact reverse-mode gradients of the scalar loss whose gradient at the
    /// stack output is `upstream`. Needs the trace of the matching forward
    /// pass; an empty or mismatched trace is an error.
    StackGrads backward(const ForwardTrace& trace, const Vec& upstream) const;

    std::size_t param_count() const;
    Vec param_vector() const;
    void set_param_vector(const Vec& params);

    /// Zero-valued gradient holder shaped like this stack.
    StackGrads zero_grads() const;

    static Vec flatten_grads(const StackGrads& grads);

private:
    std::vector<DenseLayer> layers_;
};

/// Accumulate: into += scale * from (layer grads only, input_grad untouched).
void accumulate(StackGrads& into, const StackGrads& from, double scale = 1.0);
void scale_grads(StackGrads& grads, double scale);

/// Glorot-uniform weights (+-sqrt(6/(fan_in+fan_out))), zero biases.
void init_glorot(FeedForward& net, RngStream& rng);

}  // namespace faae
