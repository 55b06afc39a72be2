#ifndef BITPRUNE_MASKGEN_HPP
#define BITPRUNE_MASKGEN_HPP

#include <vector>

#include "bitprune/gram.hpp"
#include "bitprune/matrix.hpp"

namespace bitprune {

// Saliency s_ij = W_ij^2 / [H^-1]_jj^2. Higher = more important to keep.
Matrix hessian_scores(const Matrix& w, const DampedHessian& h);

// Nested keep-masks for N:M pruning along rows. steps[k] keeps the top
// (M-1-k) scores of every group of M consecutive columns, k = 0..M-N-1, so
// each step prunes exactly one more element per group and supports are
// strictly nested. Ties keep the lower column index.
struct MaskGroup {
    int N = 0, M = 0;
    std::vector<Mask> steps;

    const Mask& final() const { return steps.back(); }

    // Degenerate group for N == M runs: one all-keep step, no pruning.
    static MaskGroup no_pruning(int rows, int cols, int M);
};

MaskGroup split_mask(const Matrix& scores, int N, int M);

// Column split for mixed-precision handling: the round(r_salient * m)
// columns with the largest score column-sums. Ties keep the lower index.
struct SalientPartition {
    std::vector<int> salient_cols;   // ascending
    std::vector<uint8_t> is_salient; // size m
};

SalientPartition select_salient(const Matrix& scores, double r_salient);

} // namespace bitprune

#endif
