#ifndef BITPRUNE_METRICS_HPP
#define BITPRUNE_METRICS_HPP

#include <vector>

#include "bitprune/gram.hpp"
#include "bitprune/matrix.hpp"

namespace bitprune {

// Binarization difficulty: mean over rows of the population variance of
// |W_i - mean(W_i)|. Proportional to the plain 1-bit fit error per element.
double bd_score(const Matrix& w);

// Same statistic over surviving entries only: per row, variance of
// |w - kept-mean| across kept entries (rows with < 2 kept are skipped).
double bd_score_kept(const Matrix& w, const Mask& keep);

// Spearman rank correlation with average ranks on ties. Rejects size
// mismatch, < 2 points, or a constant vector.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

// Spearman correlation between bd_score and the plain 1-bit fit error across
// an ensemble of matrices. Degenerate ensembles (constant ranks) reject.
double bd_error_correlation(const std::vector<Matrix>& ensemble);

// ||W - What||_F^2.
double l1_error(const Matrix& w, const Matrix& what);

// tr(R S R^T), R = W - What.
double l2_error(const Matrix& w, const Matrix& what, const GramMatrix& s);

// Average bits per parameter under the mixed scheme:
//   n_param   = (2 r_salient + (1 - r_salient)) * N / M
//   n_storing = 2 + 1 / b_size   (two flag bits marking the salient split,
//                                 plus an amortized per-block share)
struct BitBudget {
    double n_param = 0.0;
    double n_storing = 0.0;
};

BitBudget average_bits(double r_salient, int n, int m_group, int b_size);

} // namespace bitprune

#endif
