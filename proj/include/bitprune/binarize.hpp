#ifndef BITPRUNE_BINARIZE_HPP
#define BITPRUNE_BINARIZE_HPP

#include <vector>

#include "bitprune/gram.hpp"
#include "bitprune/matrix.hpp"

namespace bitprune {

// Row-wise 1-bit fit: mu_i = mean(W_i), alpha_i = mean|W_i - mu_i|,
// B = sign(W - mu) with sign(0) := +1, reconstruction alpha B + mu.
// Among all (mu = row mean, alpha >= 0, B in {-1,+1}) factorizations this
// minimizes ||W - (alpha B + mu)||_F^2.
struct BinaryFit {
    Matrix b;     // n x m, entries in {-1, +1} (0 only after masking)
    Vector alpha; // per row, >= 0
    Vector mu;    // per row

    Matrix reconstruct() const; // alpha B + mu on B's support, mu elsewhere
};

BinaryFit binary(const Matrix& w);

// Two-stage residual fit of an already redistributed matrix (zero-mean rows):
// alpha1 B1 approximates W~, alpha2 B2 approximates the residual. No mean
// term; the caller owns redistribution.
struct ResidualFit {
    Matrix b1, b2;
    Vector alpha1, alpha2;

    Matrix reconstruct() const; // alpha1 B1 + alpha2 B2
};

ResidualFit residual_binarize(const Matrix& wt);

// Split-point grouping of a redistributed matrix: thresholds on |W~| cut the
// selected entries into split_points+1 magnitude segments, each fit with its
// own per-row alpha. Thresholds come from an exhaustive search over an
// absolute-value percentile grid ({5,10,...,95} plus the max, so coarser
// plans are always reachable); ties pick the smallest thresholds.
struct SplitPlan {
    std::vector<double> thresholds; // strictly increasing, size = split points
    std::vector<int8_t> seg;        // row-major per element: segment id, -1 = unselected
    Matrix b;                       // signs on selected entries, 0 elsewhere
    Matrix alpha;                   // rows x segments
    int n_segs = 0;
    double fit_error = 0.0;         // sum over selected entries of (w~ - alpha b)^2

    Matrix reconstruct(int rows, int cols) const;
};

SplitPlan grouped_binarize(const Matrix& wt, const Mask& selected, int split_points);

// Closed-form alternating updates of (mu, alpha) for fixed signs B against a
// Gram matrix S. W and B are used as passed; masked entries stay zero because
// the updates never touch B's support.
Vector update_mu(const GramMatrix& s, const Matrix& w, const Matrix& b,
                 const Vector& alpha, double eps = 1e-12);
Vector update_alpha(const GramMatrix& s, const Matrix& w, const Vector& mu,
                    const Matrix& b, double eps = 1e-12);

// T rounds of (update_mu, update_alpha). When tracking, half_step_errors
// holds tr(R S R^T), R = W - mu 1^T - alpha B, recorded before the first
// half-step and after every half-step; it never increases.
struct RefineResult {
    Vector mu;
    Vector alpha;
    std::vector<double> half_step_errors;
};

RefineResult refine(const GramMatrix& s, const Matrix& w, const Matrix& b,
                    Vector mu0, Vector alpha0, int rounds, double eps = 1e-12,
                    bool track = false);

} // namespace bitprune

#endif
