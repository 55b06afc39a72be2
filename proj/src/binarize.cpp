#include "bitprune/binarize.hpp"

#include <algorithm>
#include <cmath>

#include "bitprune/error.hpp"

namespace bitprune {

Matrix BinaryFit::reconstruct() const {
    const int n = b.rows();
    const int m = b.cols();
    Matrix out(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
            out(i, j) = alpha[i] * b(i, j) + mu[i];
    return out;
}

BinaryFit binary(const Matrix& w) {
    const int n = w.rows();
    const int m = w.cols();
    if (n == 0 || m == 0) throw DataError("binary: empty matrix");
    if (!all_finite(w)) throw NumericError("binary: non-finite weight");

    BinaryFit fit;
    fit.b = Matrix(n, m);
    fit.alpha.resize(n);
    fit.mu.resize(n);

#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int i = 0; i < n; ++i) {
        const double* wi = w.row(i);
        double mean = 0.0;
        for (int j = 0; j < m; ++j) mean += wi[j];
        mean /= m;
        double a = 0.0;
        for (int j = 0; j < m; ++j) {
            const double r = wi[j] - mean;
            fit.b(i, j) = (r < 0.0) ? -1.0 : 1.0; // sign(0) := +1
            a += std::fabs(r);
        }
        fit.mu[i] = mean;
        fit.alpha[i] = a / m;
    }
    return fit;
}

Matrix ResidualFit::reconstruct() const {
    const int n = b1.rows();
    const int m = b1.cols();
    Matrix out(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
            out(i, j) = alpha1[i] * b1(i, j) + alpha2[i] * b2(i, j);
    return out;
}

ResidualFit residual_binarize(const Matrix& wt) {
    const int n = wt.rows();
    const int m = wt.cols();
    if (n == 0 || m == 0) throw DataError("residual_binarize: empty matrix");

    ResidualFit fit;
    fit.b1 = Matrix(n, m);
    fit.b2 = Matrix(n, m);
    fit.alpha1.resize(n);
    fit.alpha2.resize(n);

#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int i = 0; i < n; ++i) {
        const double* wi = wt.row(i);
        double a1 = 0.0;
        for (int j = 0; j < m; ++j) a1 += std::fabs(wi[j]);
        a1 /= m;
        double a2 = 0.0;
        for (int j = 0; j < m; ++j) {
            fit.b1(i, j) = (wi[j] < 0.0) ? -1.0 : 1.0;
            const double r = wi[j] - a1 * fit.b1(i, j);
            fit.b2(i, j) = (r < 0.0) ? -1.0 : 1.0;
            a2 += std::fabs(r);
        }
        fit.alpha1[i] = a1;
        fit.alpha2[i] = a2 / m;
    }
    return fit;
}

Matrix SplitPlan::reconstruct(int rows, int cols) const {
    Matrix out(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
            const int8_t g = seg[static_cast<size_t>(i) * cols + j];
            if (g >= 0) out(i, j) = alpha(i, g) * b(i, j);
        }
    return out;
}

namespace {

// Fit error of one magnitude segment of one row under its own alpha:
// sum (|v| - a)^2 with a = mean(|v|) equals sum v^2 - cnt * a^2.
struct SegAccum {
    double sum_abs = 0.0;
    double sum_sq = 0.0;
    int cnt = 0;

    void add(double v) {
        sum_abs += std::fabs(v);
        sum_sq += v * v;
        ++cnt;
    }
    double err() const {
        if (cnt == 0) return 0.0;
        const double a = sum_abs / cnt;
        return sum_sq - a * cnt * a;
    }
};

int seg_of(double av, const std::vector<double>& thr) {
    int g = 0;
    while (g < static_cast<int>(thr.size()) && av > thr[g]) ++g;
    return g;
}

} // namespace

SplitPlan grouped_binarize(const Matrix& wt, const Mask& selected, int split_points) {
    const int n = wt.rows();
    const int m = wt.cols();
    if (selected.rows() != n || selected.cols() != m)
        throw DataError("grouped_binarize: mask shape mismatch");
    if (split_points < 0 || split_points > 3)
        throw ConfigError("grouped_binarize: split_points must be 0..3");

    SplitPlan plan;
    plan.n_segs = split_points + 1;
    plan.seg.assign(static_cast<size_t>(n) * m, -1);
    plan.b = Matrix(n, m);
    plan.alpha = Matrix(n, plan.n_segs);

    std::vector<double> mags;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
            if (selected(i, j)) mags.push_back(std::fabs(wt(i, j)));
    if (mags.empty()) {
        plan.fit_error = 0.0;
        return plan;
    }
    std::sort(mags.begin(), mags.end());

    // Candidate thresholds: |w~| percentiles 5..95 step 5, plus the max so a
    // k-point plan can always emulate any (k-1)-point plan via an empty top
    // segment. Dedup keeps the search cheap on spiky data.
    std::vector<double> cand;
    const size_t sz = mags.size();
    for (int q = 5; q <= 95; q += 5) {
        const size_t idx = (q * (sz - 1) + 50) / 100;
        cand.push_back(mags[idx]);
    }
    cand.push_back(mags.back());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

    const int nc = static_cast<int>(cand.size());
    std::vector<int> pick(split_points);
    std::vector<double> best_thr;
    double best_err = 0.0;
    bool have_best = false;

    // Exhaustive over ordered index combos; candidates are sorted so combos
    // enumerate in ascending threshold order and "first strictly better"
    // realizes the smallest-thresholds tie-break.
    auto eval_combo = [&](const std::vector<double>& thr) {
        double err = 0.0;
        std::vector<SegAccum> acc(static_cast<size_t>(split_points) + 1);
        for (int i = 0; i < n; ++i) {
            for (auto& a : acc) a = SegAccum{};
            for (int j = 0; j < m; ++j)
                if (selected(i, j)) {
                    const double v = wt(i, j);
                    acc[seg_of(std::fabs(v), thr)].add(v);
                }
            for (const auto& a : acc) err += a.err();
        }
        if (!have_best || err < best_err) {
            have_best = true;
            best_err = err;
            best_thr = thr;
        }
    };

    if (split_points == 0) {
        eval_combo({});
    } else if (nc >= split_points) {
        // Lexicographic enumeration of strictly increasing index tuples.
        for (int i = 0; i < split_points; ++i) pick[i] = i;
        while (true) {
            std::vector<double> thr(split_points);
            for (int i = 0; i < split_points; ++i) thr[i] = cand[pick[i]];
            eval_combo(thr);
            int pos = split_points - 1;
            while (pos >= 0 && pick[pos] == nc - split_points + pos) --pos;
            if (pos < 0) break;
            ++pick[pos];
            for (int i = pos + 1; i < split_points; ++i) pick[i] = pick[i - 1] + 1;
        }
    }
    if (!have_best) eval_combo({}); // fewer distinct candidates than split points

    if (best_thr.size() < static_cast<size_t>(split_points)) {
        // Degenerate data (all magnitudes equal): pad with the max threshold,
        // upper segments stay empty.
        best_thr.resize(split_points, mags.back());
    }

    plan.thresholds = best_thr;
    plan.fit_error = best_err;

    // Final assignment and per-segment alphas.
    std::vector<SegAccum> acc(static_cast<size_t>(plan.n_segs));
    for (int i = 0; i < n; ++i) {
        for (auto& a : acc) a = SegAccum{};
        for (int j = 0; j < m; ++j)
            if (selected(i, j)) {
                const double v = wt(i, j);
                const int g = seg_of(std::fabs(v), plan.thresholds);
                plan.seg[static_cast<size_t>(i) * m + j] = static_cast<int8_t>(g);
                plan.b(i, j) = (v < 0.0) ? -1.0 : 1.0;
                acc[g].add(v);
            }
        for (int g = 0; g < plan.n_segs; ++g)
            plan.alpha(i, g) = acc[g].cnt ? acc[g].sum_abs / acc[g].cnt : 0.0;
    }
    return plan;
}

Vector update_mu(const GramMatrix& s, const Matrix& w, const Matrix& b,
                 const Vector& alpha, double eps) {
    const int n = w.rows();
    const int m = w.cols();
    if (m != s.m()) throw DataError("update_mu: Gram size mismatch");

    // 1^T S == column sums (S symmetric), shared by all rows.
    Vector s1(m, 0.0);
    double den = 0.0;
    for (int k = 0; k < m; ++k) {
        const double* sk = s.s.row(k);
        double rs = 0.0;
        for (int l = 0; l < m; ++l) rs += sk[l];
        s1[k] = rs;
        den += rs;
    }
    den += eps;

    Vector mu(n);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int i = 0; i < n; ++i) {
        const double* wi = w.row(i);
        const double* bi = b.row(i);
        const double a = alpha[i];
        double num = 0.0;
        for (int k = 0; k < m; ++k) num += s1[k] * (wi[k] - a * bi[k]);
        mu[i] = num / den;
    }
    return mu;
}

Vector update_alpha(const GramMatrix& s, const Matrix& w, const Vector& mu,
                    const Matrix& b, double eps) {
    const int n = w.rows();
    const int m = w.cols();
    if (m != s.m()) throw DataError("update_alpha: Gram size mismatch");

    Vector alpha(n);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int i = 0; i < n; ++i) {
        const double* wi = w.row(i);
        const double* bi = b.row(i);
        double num = 0.0;
        double den = 0.0;
        for (int k = 0; k < m; ++k) {
            const double* sk = s.s.row(k);
            double dot = 0.0;
            for (int l = 0; l < m; ++l) dot += sk[l] * bi[l];
            num += dot * (wi[k] - mu[i]);
            den += dot * bi[k];
        }
        alpha[i] = num / (den + eps);
    }
    return alpha;
}

RefineResult refine(const GramMatrix& s, const Matrix& w, const Matrix& b,
                    Vector mu0, Vector alpha0, int rounds, double eps, bool track) {
    if (rounds < 1) throw ConfigError("refine: rounds must be >= 1");
    RefineResult r;
    r.mu = std::move(mu0);
    r.alpha = std::move(alpha0);

    auto record = [&] {
        if (!track) return;
        Matrix res = w;
        for (int i = 0; i < res.rows(); ++i)
            for (int j = 0; j < res.cols(); ++j)
                res(i, j) -= r.mu[i] + r.alpha[i] * b(i, j);
        r.half_step_errors.push_back(decoupled_error(res, s));
    };

    record();
    for (int t = 0; t < rounds; ++t) {
        r.mu = update_mu(s, w, b, r.alpha, eps);
        record();
        r.alpha = update_alpha(s, w, r.mu, b, eps);
        record();
    }
    return r;
}

} // namespace bitprune
