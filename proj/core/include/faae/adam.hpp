#pragma once

#include <cstdint>

#include "faae/matrix.hpp"

namespace faae {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Bias-corrected Adam for one parameter group.
struct AdamState {
    Vec m;
    Vec v;
    std::int64_t t = 0;
    AdamConfig config;

    AdamState() = default;
    AdamState(std::size_t n, AdamConfig cfg = {}) : m(n, 0.0), v(n, 0.0), config(cfg) {}
};

/// One Adam update in place. Rejects non-finite gradients so a diverging run
/// aborts with a diagnostic instead of poisoning the parameters.
void adam_step(Vec& params, const Vec& grads, AdamState& state);

}  // namespace faae
