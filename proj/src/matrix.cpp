#include "bitprune/matrix.hpp"

#include <cmath>

#include "bitprune/error.hpp"

namespace bitprune {

void matvec(const Matrix& a, const double* x, double* y) {
    const int n = a.rows();
    const int m = a.cols();
    for (int i = 0; i < n; ++i) {
        const double* row = a.row(i);
        double acc = 0.0;
        for (int j = 0; j < m; ++j) acc += row[j] * x[j];
        y[i] = acc;
    }
}

bool cholesky(Matrix& a, double tol) {
    const int n = a.rows();
    for (int j = 0; j < n; ++j) {
        double d = a(j, j);
        for (int k = 0; k < j; ++k) d -= a(j, k) * a(j, k);
        if (!(d > tol)) return false;
        const double lj = std::sqrt(d);
        a(j, j) = lj;
        for (int i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (int k = 0; k < j; ++k) s -= a(i, k) * a(j, k);
            a(i, j) = s / lj;
        }
        for (int k = j + 1; k < n; ++k) a(j, k) = 0.0;
    }
    return true;
}

Matrix spd_inverse(const Matrix& a) {
    const int n = a.rows();
    if (n != a.cols()) throw NumericError("spd_inverse: matrix not square");
    Matrix l = a;
    if (!cholesky(l)) throw NumericError("spd_inverse: Cholesky failed, matrix not positive definite");

    // Solve L L^T X = I column by column.
    Matrix inv(n, n);
    std::vector<double> y(n);
    for (int c = 0; c < n; ++c) {
        for (int i = 0; i < n; ++i) {
            double s = (i == c) ? 1.0 : 0.0;
            for (int k = 0; k < i; ++k) s -= l(i, k) * y[k];
            y[i] = s / l(i, i);
        }
        for (int i = n - 1; i >= 0; --i) {
            double s = y[i];
            for (int k = i + 1; k < n; ++k) s -= l(k, i) * inv(k, c);
            inv(i, c) = s / l(i, i);
        }
    }
    // Symmetrize: the two triangles differ only by roundoff.
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double v = 0.5 * (inv(i, j) + inv(j, i));
            inv(i, j) = v;
            inv(j, i) = v;
        }
    return inv;
}

bool all_finite(const Matrix& a) {
    const double* p = a.data();
    const size_t sz = a.size();
    for (size_t i = 0; i < sz; ++i)
        if (!std::isfinite(p[i])) return false;
    return true;
}

} // namespace bitprune
