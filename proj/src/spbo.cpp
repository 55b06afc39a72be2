#include "bitprune/spbo.hpp"

#include "bitprune/error.hpp"

namespace bitprune {

namespace {

void apply_mask(Matrix& a, const Mask& keep) {
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            if (!keep(i, j)) a(i, j) = 0.0;
}

Matrix masked_reconstruct(const BinaryFit& fit, const Mask& keep) {
    Matrix out(fit.b.rows(), fit.b.cols());
    for (int i = 0; i < out.rows(); ++i)
        for (int j = 0; j < out.cols(); ++j)
            if (keep(i, j)) out(i, j) = fit.alpha[i] * fit.b(i, j) + fit.mu[i];
    return out;
}

double headline_l2(const Matrix& w_orig, const BinaryFit& fit, const Mask& keep,
                   const GramMatrix& s) {
    Matrix r = w_orig;
    for (int i = 0; i < r.rows(); ++i)
        for (int j = 0; j < r.cols(); ++j)
            if (keep(i, j)) r(i, j) -= fit.alpha[i] * fit.b(i, j) + fit.mu[i];
    return decoupled_error(r, s);
}

} // namespace

StepwiseResult spbo(const Matrix& w, const MaskGroup& group, const GramMatrix& s,
                    const StepwiseConfig& cfg) {
    if (group.steps.empty() && group.N != group.M)
        throw ConfigError("spbo: empty mask group");
    if (w.cols() != s.m()) throw DataError("spbo: weight/Gram size mismatch");
    for (const auto& mk : group.steps)
        if (mk.rows() != w.rows() || mk.cols() != w.cols())
            throw DataError("spbo: mask shape mismatch");

    const Matrix w_orig = w;
    const Mask all_keep(w.rows(), w.cols(), 1);

    StepwiseResult out;
    out.fit = binary(w);
    Matrix work = w;

    // Refine the dense fit first so the degenerate no-pruning group returns
    // the refined binarization rather than the raw row-statistics fit.
    {
        RefineResult r = refine(s, work, out.fit.b, out.fit.mu, out.fit.alpha,
                                cfg.rounds, cfg.eps, cfg.track);
        out.fit.mu = std::move(r.mu);
        out.fit.alpha = std::move(r.alpha);
        StepRecord rec;
        rec.step = 0;
        rec.kept_fraction = 1.0;
        rec.l2 = headline_l2(w_orig, out.fit, all_keep, s);
        rec.half_step_errors = std::move(r.half_step_errors);
        out.trace.steps.push_back(std::move(rec));
    }

    const bool degenerate = group.N == group.M;
    int step_no = 0;
    for (const auto& keep : group.steps) {
        if (degenerate) break; // single all-keep step, already covered
        ++step_no;
        apply_mask(work, keep);
        apply_mask(out.fit.b, keep);
        RefineResult r = refine(s, work, out.fit.b, out.fit.mu, out.fit.alpha,
                                cfg.rounds, cfg.eps, cfg.track);
        out.fit.mu = std::move(r.mu);
        out.fit.alpha = std::move(r.alpha);

        StepRecord rec;
        rec.step = step_no;
        rec.kept_fraction = static_cast<double>(group.M - step_no) / group.M;
        rec.l2 = headline_l2(w_orig, out.fit, keep, s);
        rec.half_step_errors = std::move(r.half_step_errors);
        out.trace.steps.push_back(std::move(rec));
    }

    const Mask& final_keep = degenerate ? all_keep : group.final();
    out.what = masked_reconstruct(out.fit, final_keep);
    return out;
}

StepwiseResult oneshot_prune_binarize(const Matrix& w, const Mask& keep,
                                      const GramMatrix& s, int rounds, double eps) {
    if (keep.rows() != w.rows() || keep.cols() != w.cols())
        throw DataError("oneshot: mask shape mismatch");
    if (w.cols() != s.m()) throw DataError("oneshot: weight/Gram size mismatch");

    Matrix work = w;
    apply_mask(work, keep);

    StepwiseResult out;
    out.fit = binary(work);
    apply_mask(out.fit.b, keep);
    RefineResult r = refine(s, work, out.fit.b, out.fit.mu, out.fit.alpha, rounds, eps);
    out.fit.mu = std::move(r.mu);
    out.fit.alpha = std::move(r.alpha);

    StepRecord rec;
    rec.step = 0;
    rec.kept_fraction = static_cast<double>(keep.count()) / (w.rows() * w.cols());
    rec.l2 = headline_l2(w, out.fit, keep, s);
    out.trace.steps.push_back(std::move(rec));

    out.what = masked_reconstruct(out.fit, keep);
    return out;
}

} // namespace bitprune
