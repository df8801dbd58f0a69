#include "faae/matrix.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace faae {

Vec matvec(const Matrix& m, const Vec& x) {
    if (x.size() != m.cols) {
        throw std::invalid_argument("matvec: expected input of length " +
                                    std::to_string(m.cols) + ", got " +
                                    std::to_string(x.size()));
    }
    Vec y(m.rows, 0.0);
    for (std::size_t r = 0; r < m.rows; ++r) {
        const double* row = m.data.data() + r * m.cols;
        double acc = 0.0;
        for (std::size_t c = 0; c < m.cols; ++c) acc += row[c] * x[c];
        y[r] = acc;
    }
    return y;
}

Vec matvec_transposed(const Matrix& m, const Vec& x) {
    if (x.size() != m.rows) {
        throw std::invalid_argument("matvec_transposed: expected input of length " +
                                    std::to_string(m.rows) + ", got " +
                                    std::to_string(x.size()));
    }
    Vec y(m.cols, 0.0);
    for (std::size_t r = 0; r < m.rows; ++r) {
        const double* row = m.data.data() + r * m.cols;
        const double xr = x[r];
        for (std::size_t c = 0; c < m.cols; ++c) y[c] += row[c] * xr;
    }
    return y;
}

void add_outer(Matrix& m, const Vec& a, const Vec& b, double scale) {
    if (a.size() != m.rows || b.size() != m.cols) {
        throw std::invalid_argument("add_outer: shape mismatch");
    }
    for (std::size_t r = 0; r < m.rows; ++r) {
        double* row = m.data.data() + r * m.cols;
        const double ar = a[r] * scale;
        for (std::size_t c = 0; c < m.cols; ++c) row[c] += ar * b[c];
    }
}

void axpy(Vec& y, const Vec& x, double scale) {
    if (y.size() != x.size()) throw std::invalid_argument("axpy: length mismatch");
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += scale * x[i];
}

bool all_finite(const Vec& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

bool all_finite(const Matrix& m) { return all_finite(m.data); }

}  // namespace faae
