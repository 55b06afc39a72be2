#ifndef BITPRUNE_GRAM_HPP
#define BITPRUNE_GRAM_HPP

#include "bitprune/matrix.hpp"
#include "bitprune/synthetic.hpp"

namespace bitprune {

// Gram matrix of calibration activations: S_kl = sum_b sum_i X_ik X_il,
// accumulated over all batches. Symmetric PSD, features x features.
struct GramMatrix {
    Matrix s;
    int m() const { return s.rows(); }
};

// Rejects empty or non-finite input. Accumulation order is fixed so the
// result does not depend on thread count.
GramMatrix x2s(const Calib& calib);

// tr(R S R^T): the calibration-weighted reconstruction error of a residual
// R (rows x features). Equals sum_b ||R X_b^T||_F^2 up to roundoff.
double decoupled_error(const Matrix& r, const GramMatrix& s);

// H = S + lambda * mean(diag S) * I, with its Cholesky-based inverse.
struct DampedHessian {
    Matrix h;
    Matrix inv;
    Vector inv_diag; // diag(H^-1), cached for scoring
    double lambda = 0.0;
};

DampedHessian damped_hessian(const GramMatrix& s, double lambda = 0.01);

} // namespace bitprune

#endif
