#pragma once

#include <cstddef>
#include <vector>

namespace faae {

using Vec = std::vector<double>;

/// Dense row-major matrix of doubles. The workhorse container for layer
/// weights; kept deliberately minimal (no expression templates, no views).
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    Vec data;  // rows * cols, row-major

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::size_t size() const { return data.size(); }
};

/// y = M * x. Throws on dimension mismatch.
Vec matvec(const Matrix& m, const Vec& x);

/// y = M^T * x (used when propagating gradients back through a layer).
Vec matvec_transposed(const Matrix& m, const Vec& x);

/// M += scale * (a outer b), a of length rows, b of length cols.
void add_outer(Matrix& m, const Vec& a, const Vec& b, double scale = 1.0);

void axpy(Vec& y, const Vec& x, double scale = 1.0);

bool all_finite(const Vec& v);
bool all_finite(const Matrix& m);

}  // namespace faae
