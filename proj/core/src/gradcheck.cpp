#include "faae/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace faae {

double grad_check(const std::function<double(const Vec&)>& loss_fn, const Vec& analytic,
                  const Vec& params, double step) {
    if (step <= 0.0) throw std::invalid_argument("grad_check: step must be > 0");
    if (analytic.size() != params.size())
        throw std::invalid_argument("grad_check: gradient/parameter length mismatch");

    Vec probe = params;
    double worst = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        probe[i] = params[i] + step;
        const double up = loss_fn(probe);
        probe[i] = params[i] - step;
        const double down = loss_fn(probe);
        probe[i] = params[i];
        if (!std::isfinite(up) || !std::isfinite(down)) {
            throw std::runtime_error("grad_check: non-finite loss at probe for parameter " +
                                     std::to_string(i));
        }
        const double fd = (up - down) / (2.0 * step);
        const double denom = std::max({1.0, std::abs(analytic[i]), std::abs(fd)});
        worst = std::max(worst, std::abs(analytic[i] - fd) / denom);
    }
    return worst;
}

}  // namespace faae
