#include "bitprune/maskgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bitprune/error.hpp"

namespace bitprune {

Matrix hessian_scores(const Matrix& w, const DampedHessian& h) {
    const int n = w.rows();
    const int m = w.cols();
    if (m != static_cast<int>(h.inv_diag.size()))
        throw DataError("hessian_scores: weight/Hessian size mismatch");

    Matrix s(n, m);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
            const double d = h.inv_diag[j];
            s(i, j) = w(i, j) * w(i, j) / (d * d);
        }
    return s;
}

MaskGroup MaskGroup::no_pruning(int rows, int cols, int M) {
    MaskGroup g;
    g.N = M;
    g.M = M;
    g.steps.push_back(Mask(rows, cols, 1));
    return g;
}

MaskGroup split_mask(const Matrix& scores, int N, int M) {
    const int n = scores.rows();
    const int m = scores.cols();
    if (M < 2) throw ConfigError("split_mask: M must be >= 2");
    if (N < 1 || N >= M)
        throw ConfigError("split_mask: need 1 <= N < M, got " + std::to_string(N) + ":" +
                          std::to_string(M));
    if (m % M != 0)
        throw ConfigError("split_mask: columns (" + std::to_string(m) +
                          ") not divisible by M (" + std::to_string(M) + ")");

    MaskGroup g;
    g.N = N;
    g.M = M;
    const int n_steps = M - N;
    g.steps.assign(n_steps, Mask(n, m, 0));

    const int groups = m / M;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int i = 0; i < n; ++i) {
        std::vector<int> order(M);
        for (int gcol = 0; gcol < groups; ++gcol) {
            const int base = gcol * M;
            std::iota(order.begin(), order.end(), 0);
            // Descending score, ties keep the lower column.
            std::stable_sort(order.begin(), order.end(), [&](int a, int bidx) {
                return scores(i, base + a) > scores(i, base + bidx);
            });
            // Step k keeps the top M-1-k entries; supports are nested by
            // construction since each step drops the current tail element.
            for (int k = 0; k < n_steps; ++k) {
                const int keep = M - 1 - k;
                for (int r = 0; r < keep; ++r) g.steps[k](i, base + order[r]) = 1;
            }
        }
    }
    return g;
}

SalientPartition select_salient(const Matrix& scores, double r_salient) {
    const int m = scores.cols();
    if (r_salient < 0.0 || r_salient > 1.0)
        throw ConfigError("select_salient: r_salient must be in [0, 1]");

    const int cnt = static_cast<int>(std::llround(r_salient * m));
    Vector colsum(m, 0.0);
    for (int i = 0; i < scores.rows(); ++i)
        for (int j = 0; j < m; ++j) colsum[j] += scores(i, j);

    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return colsum[a] > colsum[b]; });

    SalientPartition p;
    p.is_salient.assign(m, 0);
    p.salient_cols.assign(order.begin(), order.begin() + cnt);
    std::sort(p.salient_cols.begin(), p.salient_cols.end());
    for (int j : p.salient_cols) p.is_salient[j] = 1;
    return p;
}

} // namespace bitprune
