#include "bitprune/compensate.hpp"

#include "bitprune/error.hpp"

namespace bitprune {

Compensator::Compensator(Matrix& w, const DampedHessian& h) : w_(w), h_(h) {
    if (w.cols() != h.inv.rows())
        throw DataError("compensate: weight/Hessian size mismatch");
}

void Compensator::absorb(const Matrix& block_error, int c0, int width) {
    const int n = w_.rows();
    const int m = w_.cols();
    if (c0 != next_col_)
        throw DataError("compensate: blocks must be absorbed left to right");
    if (width < 1 || c0 + width > m)
        throw DataError("compensate: block out of range");
    if (block_error.rows() != n || block_error.cols() != width)
        throw DataError("compensate: error block shape mismatch");

    const int rest0 = c0 + width;
    // W[:, rest] -= (E ./ diag) * Hinv[block, rest]; each output column of
    // the update is owned by one (i, r) pair, so order is fixed.
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int i = 0; i < n; ++i) {
        for (int r = rest0; r < m; ++r) {
            double adj = 0.0;
            for (int c = 0; c < width; ++c)
                adj += block_error(i, c) / h_.inv(c0 + c, c0 + c) * h_.inv(c0 + c, r);
            w_(i, r) -= adj;
        }
    }
    next_col_ = rest0;
}

} // namespace bitprune
