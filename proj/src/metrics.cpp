#include "bitprune/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bitprune/binarize.hpp"
#include "bitprune/error.hpp"

namespace bitprune {

double bd_score(const Matrix& w) {
    const int n = w.rows();
    const int m = w.cols();
    if (n < 1 || m < 2) throw DataError("bd_score: need at least 2 columns");

    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        const double* wi = w.row(i);
        double mean = 0.0;
        for (int j = 0; j < m; ++j) mean += wi[j];
        mean /= m;
        double s1 = 0.0, s2 = 0.0;
        for (int j = 0; j < m; ++j) {
            const double a = std::fabs(wi[j] - mean);
            s1 += a;
            s2 += a * a;
        }
        const double am = s1 / m;
        total += s2 / m - am * am; // population variance of |w - mean|
    }
    return total / n;
}

double bd_score_kept(const Matrix& w, const Mask& keep) {
    const int n = w.rows();
    const int m = w.cols();
    if (keep.rows() != n || keep.cols() != m) throw DataError("bd_score_kept: mask shape mismatch");

    double total = 0.0;
    int rows_used = 0;
    for (int i = 0; i < n; ++i) {
        double mean = 0.0;
        int cnt = 0;
        for (int j = 0; j < m; ++j)
            if (keep(i, j)) {
                mean += w(i, j);
                ++cnt;
            }
        if (cnt < 2) continue;
        mean /= cnt;
        double s1 = 0.0, s2 = 0.0;
        for (int j = 0; j < m; ++j)
            if (keep(i, j)) {
                const double a = std::fabs(w(i, j) - mean);
                s1 += a;
                s2 += a * a;
            }
        const double am = s1 / cnt;
        total += s2 / cnt - am * am;
        ++rows_used;
    }
    if (rows_used == 0) throw DataError("bd_score_kept: no row keeps 2+ entries");
    return total / rows_used;
}

namespace {

// Average ranks, ties share the mean of their positions.
std::vector<double> avg_ranks(const std::vector<double>& v) {
    const int n = static_cast<int>(v.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return v[a] < v[b]; });

    std::vector<double> rank(n);
    int i = 0;
    while (i < n) {
        int j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double r = 0.5 * (i + j) + 1.0; // 1-based mean position
        for (int k = i; k <= j; ++k) rank[order[k]] = r;
        i = j + 1;
    }
    return rank;
}

} // namespace

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw DataError("spearman: size mismatch");
    const int n = static_cast<int>(a.size());
    if (n < 2) throw DataError("spearman: need at least 2 points");

    const auto ra = avg_ranks(a);
    const auto rb = avg_ranks(b);
    double ma = 0.0, mb = 0.0;
    for (int i = 0; i < n; ++i) {
        ma += ra[i];
        mb += rb[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (int i = 0; i < n; ++i) {
        sab += (ra[i] - ma) * (rb[i] - mb);
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) throw DataError("spearman: constant input");
    return sab / std::sqrt(saa * sbb);
}

double bd_error_correlation(const std::vector<Matrix>& ensemble) {
    if (ensemble.size() < 2)
        throw DataError("bd_error_correlation: need at least 2 matrices");
    std::vector<double> bd, err;
    bd.reserve(ensemble.size());
    err.reserve(ensemble.size());
    for (const Matrix& w : ensemble) {
        bd.push_back(bd_score(w));
        const BinaryFit fit = binary(w);
        err.push_back(l1_error(w, fit.reconstruct()));
    }
    return spearman(bd, err);
}

double l1_error(const Matrix& w, const Matrix& what) {
    if (!w.same_shape(what)) throw DataError("l1_error: shape mismatch");
    double acc = 0.0;
    const double* a = w.data();
    const double* b = what.data();
    for (size_t i = 0; i < w.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

double l2_error(const Matrix& w, const Matrix& what, const GramMatrix& s) {
    if (!w.same_shape(what)) throw DataError("l2_error: shape mismatch");
    Matrix r = w;
    const double* b = what.data();
    double* p = r.data();
    for (size_t i = 0; i < r.size(); ++i) p[i] -= b[i];
    return decoupled_error(r, s);
}

BitBudget average_bits(double r_salient, int n, int m_group, int b_size) {
    if (r_salient < 0.0 || r_salient > 1.0)
        throw ConfigError("average_bits: r_salient must be in [0, 1]");
    if (n < 1 || m_group < 1 || n > m_group)
        throw ConfigError("average_bits: need 1 <= N <= M");
    if (b_size < 1) throw ConfigError("average_bits: b_size must be >= 1");

    BitBudget b;
    b.n_param = (2.0 * r_salient + (1.0 - r_salient)) *
                (static_cast<double>(n) / static_cast<double>(m_group));
    b.n_storing = 2.0 + 1.0 / static_cast<double>(b_size);
    return b;
}

} // namespace bitprune
