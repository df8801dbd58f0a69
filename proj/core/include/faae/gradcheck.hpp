#pragma once

#include <functional>

#include "faae/matrix.hpp"

namespace faae {

/// Central-difference gradient verification. For each parameter i computes
/// (f(p + h e_i) - f(p - h e_i)) / 2h and compares it with analytic[i],
/// returning max_i |analytic_i - fd_i| / max(1, |analytic_i|, |fd_i|).
/// Throws if the loss evaluates non-finite at any probe point.
double grad_check(const std::function<double(const Vec&)>& loss_fn, const Vec& analytic,
                  const Vec& params, double step);

}  // namespace faae
