#ifndef BITPRUNE_REF_HPP
#define BITPRUNE_REF_HPP

#include "bitprune/gram.hpp"
#include "bitprune/matrix.hpp"
#include "bitprune/synthetic.hpp"

// Serial reference kernels. These spell out every sum as written-down math
// (elementwise intermediates, no algebraic shortcuts, no threading) and exist
// to pin down the optimized kernels in tests and the benchmark. Keep them
// boring.
namespace bitprune::ref {

GramMatrix x2s(const Calib& calib);

double decoupled_error(const Matrix& r, const GramMatrix& s);

// mu_i = 1^T S (W - alpha B)^T / (1^T S 1 + eps), one entry per row.
Vector update_mu(const GramMatrix& s, const Matrix& w, const Matrix& b,
                 const Vector& alpha, double eps);

// alpha_i = diag(B S (W - mu)^T) / (diag(B S B^T) + eps).
Vector update_alpha(const GramMatrix& s, const Matrix& w, const Vector& mu,
                    const Matrix& b, double eps);

} // namespace bitprune::ref

#endif
