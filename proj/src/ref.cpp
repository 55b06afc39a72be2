#include "bitprune/ref.hpp"

#include "bitprune/error.hpp"

namespace bitprune::ref {

GramMatrix x2s(const Calib& calib) {
    if (calib.x.empty()) throw DataError("ref::x2s: no calibration batches");
    const int m = calib.features;
    Matrix s(m, m);
    for (const auto& x : calib.x)
        for (int k = 0; k < m; ++k)
            for (int l = 0; l < m; ++l)
                for (int i = 0; i < x.rows(); ++i)
                    s(k, l) += x(i, k) * x(i, l);
    return {std::move(s)};
}

double decoupled_error(const Matrix& r, const GramMatrix& s) {
    const int n = r.rows();
    const int m = r.cols();
    double total = 0.0;
    for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l) {
            double g = 0.0;
            for (int j = 0; j < n; ++j) g += r(j, k) * r(j, l);
            total += s.s(k, l) * g;
        }
    return total;
}

Vector update_mu(const GramMatrix& s, const Matrix& w, const Matrix& b,
                 const Vector& alpha, double eps) {
    const int n = w.rows();
    const int m = w.cols();
    double den = 0.0;
    for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l) den += s.s(k, l);
    den += eps;

    Vector mu(n);
    for (int i = 0; i < n; ++i) {
        double num = 0.0;
        for (int k = 0; k < m; ++k)
            for (int l = 0; l < m; ++l)
                num += s.s(k, l) * (w(i, l) - alpha[i] * b(i, l));
        mu[i] = num / den;
    }
    return mu;
}

Vector update_alpha(const GramMatrix& s, const Matrix& w, const Vector& mu,
                    const Matrix& b, double eps) {
    const int n = w.rows();
    const int m = w.cols();
    Vector alpha(n);
    for (int i = 0; i < n; ++i) {
        double num = 0.0;
        double den = 0.0;
        for (int k = 0; k < m; ++k)
            for (int l = 0; l < m; ++l) {
                num += b(i, k) * s.s(k, l) * (w(i, l) - mu[i]);
                den += b(i, k) * s.s(k, l) * b(i, l);
            }
        alpha[i] = num / (den + eps);
    }
    return alpha;
}

} // namespace bitprune::ref
