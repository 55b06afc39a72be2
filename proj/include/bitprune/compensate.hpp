#ifndef BITPRUNE_COMPENSATE_HPP
#define BITPRUNE_COMPENSATE_HPP

#include "bitprune/gram.hpp"
#include "bitprune/matrix.hpp"

namespace bitprune {

// Block error compensation over a working weight matrix, left to right.
// After a block [c0, c0+width) is quantized with error E = W_blk - What_blk,
// absorb() folds E into the still-unprocessed columns:
//   W[:, rest] -= Enorm * Hinv[block, rest],  Enorm[., c] = E[., c] / Hinv_cc.
// Columns at or below the block boundary are never touched again.
class Compensator {
public:
    Compensator(Matrix& w, const DampedHessian& h);

    void absorb(const Matrix& block_error, int c0, int width);

    int processed() const { return next_col_; }

private:
    Matrix& w_;
    const DampedHessian& h_;
    int next_col_ = 0;
};

} // namespace bitprune

#endif
