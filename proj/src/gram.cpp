#include "bitprune/gram.hpp"

#include <cmath>

#include "bitprune/error.hpp"

namespace bitprune {

GramMatrix x2s(const Calib& calib) {
    if (calib.x.empty()) throw DataError("x2s: no calibration batches");
    const int m = calib.features;
    for (const auto& x : calib.x) {
        if (x.cols() != m || x.rows() != calib.length)
            throw DataError("x2s: batch shape mismatch");
        if (!all_finite(x)) throw NumericError("x2s: non-finite activation");
    }

    // Each (k,l) cell is owned by exactly one thread and accumulated in a
    // fixed batch-major order, so results do not depend on the thread count.
    Matrix s(m, m);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int k = 0; k < m; ++k) {
        for (int l = k; l < m; ++l) {
            double acc = 0.0;
            for (const auto& x : calib.x) {
                const int rows = x.rows();
                double part = 0.0;
                for (int i = 0; i < rows; ++i) part += x(i, k) * x(i, l);
                acc += part;
            }
            s(k, l) = acc;
        }
    }
    for (int k = 0; k < m; ++k)
        for (int l = 0; l < k; ++l) s(k, l) = s(l, k);
    return {std::move(s)};
}

double decoupled_error(const Matrix& r, const GramMatrix& s) {
    const int n = r.rows();
    const int m = r.cols();
    if (m != s.m()) throw DataError("decoupled_error: residual/Gram size mismatch");

    // Row-owned partials, summed serially in row order.
    Vector part(n, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int i = 0; i < n; ++i) {
        const double* ri = r.row(i);
        double acc = 0.0;
        for (int k = 0; k < m; ++k) {
            const double* sk = s.s.row(k);
            double dot = 0.0;
            for (int l = 0; l < m; ++l) dot += sk[l] * ri[l];
            acc += ri[k] * dot;
        }
        part[i] = acc;
    }
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += part[i];
    return total;
}

DampedHessian damped_hessian(const GramMatrix& s, double lambda) {
    if (lambda < 0.0) throw ConfigError("damped_hessian: lambda must be >= 0");
    const int m = s.m();
    double tr = 0.0;
    for (int k = 0; k < m; ++k) tr += s.s(k, k);
    const double damp = lambda * tr / m;

    DampedHessian out;
    out.lambda = lambda;
    out.h = s.s;
    for (int k = 0; k < m; ++k) out.h(k, k) += damp;
    out.inv = spd_inverse(out.h);
    out.inv_diag.resize(m);
    for (int k = 0; k < m; ++k) out.inv_diag[k] = out.inv(k, k);
    return out;
}

} // namespace bitprune
