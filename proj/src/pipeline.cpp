#include "bitprune/pipeline.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "bitprune/cfs.hpp"
#include "bitprune/compensate.hpp"
#include "bitprune/error.hpp"
#include "bitprune/rng.hpp"

namespace bitprune {

using nlohmann::json;
using nlohmann::ordered_json;

PruneMetric prune_metric_from_name(const std::string& s) {
    if (s == "hessian") return PruneMetric::hessian;
    if (s == "magnitude") return PruneMetric::magnitude;
    if (s == "wanda") return PruneMetric::wanda;
    if (s == "random") return PruneMetric::random;
    throw ConfigError("unknown prune_metric: " + s);
}

std::string prune_metric_name(PruneMetric m) {
    switch (m) {
        case PruneMetric::hessian: return "hessian";
        case PruneMetric::magnitude: return "magnitude";
        case PruneMetric::wanda: return "wanda";
        case PruneMetric::random: return "random";
    }
    return "?";
}

PruneType prune_type_from_name(const std::string& s) {
    if (s == "semi") return PruneType::semi;
    if (s == "structured") return PruneType::structured;
    if (s == "unstructured") return PruneType::unstructured;
    throw ConfigError("unknown prune_type: " + s);
}

std::string prune_type_name(PruneType t) {
    switch (t) {
        case PruneType::semi: return "semi";
        case PruneType::structured: return "structured";
        case PruneType::unstructured: return "unstructured";
    }
    return "?";
}

void RunConfig::validate() const {
    if (m_group < 2) throw ConfigError("config: m_group must be >= 2");
    if (n_target < 1 || n_target > m_group)
        throw ConfigError("config: n_target must be in [1, m_group]");
    if (rounds < 1) throw ConfigError("config: rounds must be >= 1");
    if (r_salient < 0.0 || r_salient > 1.0)
        throw ConfigError("config: r_salient must be in [0, 1]");
    if (b_size < 1 || b_size % m_group != 0)
        throw ConfigError("config: b_size must be a positive multiple of m_group");
    if (split_points < 0 || split_points > 3)
        throw ConfigError("config: split_points must be 0..3");
    if (lambda < 0.0) throw ConfigError("config: lambda must be >= 0");
    if (!(eps > 0.0)) throw ConfigError("config: eps must be > 0");
}

RunConfig RunConfig::from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    RunConfig c;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& k = it.key();
        try {
            if (k == "n_target") c.n_target = it.value().get<int>();
            else if (k == "m_group") c.m_group = it.value().get<int>();
            else if (k == "rounds") c.rounds = it.value().get<int>();
            else if (k == "r_salient") c.r_salient = it.value().get<double>();
            else if (k == "b_size") c.b_size = it.value().get<int>();
            else if (k == "split_points") c.split_points = it.value().get<int>();
            else if (k == "lambda") c.lambda = it.value().get<double>();
            else if (k == "eps") c.eps = it.value().get<double>();
            else if (k == "seed") c.seed = it.value().get<uint64_t>();
            else if (k == "stepwise") c.stepwise = it.value().get<bool>();
            else if (k == "cfs") c.cfs = it.value().get<bool>();
            else if (k == "exempt_salient") c.exempt_salient = it.value().get<bool>();
            else if (k == "resign_after_refine") c.resign_after_refine = it.value().get<bool>();
            else if (k == "prune_metric") c.prune_metric = prune_metric_from_name(it.value().get<std::string>());
            else if (k == "prune_type") c.prune_type = prune_type_from_name(it.value().get<std::string>());
            else throw ConfigError("config: unknown key \"" + k + "\"");
        } catch (const json::exception& e) {
            throw ConfigError("config: bad value for \"" + k + "\": " + e.what());
        }
    }
    c.validate();
    return c;
}

ordered_json RunConfig::to_json() const {
    ordered_json j;
    j["n_target"] = n_target;
    j["m_group"] = m_group;
    j["rounds"] = rounds;
    j["r_salient"] = r_salient;
    j["b_size"] = b_size;
    j["split_points"] = split_points;
    j["lambda"] = lambda;
    j["eps"] = eps;
    j["seed"] = seed;
    j["stepwise"] = stepwise;
    j["cfs"] = cfs;
    j["exempt_salient"] = exempt_salient;
    j["resign_after_refine"] = resign_after_refine;
    j["prune_metric"] = prune_metric_name(prune_metric);
    j["prune_type"] = prune_type_name(prune_type);
    return j;
}

Model load_model(const std::filesystem::path& manifest_path) {
    ModelManifest mf = read_manifest(manifest_path);
    check_chain(mf);
    const auto dir = manifest_path.parent_path();

    Model model;
    for (const auto& d : mf.layers) {
        Tensor t = read_tensor(dir / d.weight);
        if (t.dims.size() != 2 || t.dims[0] != d.n || t.dims[1] != d.m)
            throw DataError("layer " + d.name + ": weight tensor shape does not match manifest");
        Matrix w = t.to_matrix();
        if (!all_finite(w)) throw NumericError("layer " + d.name + ": non-finite weight");
        model.names.push_back(d.name);
        model.weights.push_back(std::move(w));
    }
    return model;
}

Calib load_calib(const std::filesystem::path& tensor_path) {
    Tensor t = read_tensor(tensor_path);
    if (t.dims.size() != 2 && t.dims.size() != 3)
        throw DataError("calibration tensor must be 2-D (length, features) or 3-D (batches, length, features)");
    const auto vals = t.to_doubles();

    Calib c;
    const uint64_t batches = t.dims.size() == 3 ? t.dims[0] : 1;
    c.length = static_cast<int>(t.dims[t.dims.size() - 2]);
    c.features = static_cast<int>(t.dims.back());
    size_t off = 0;
    for (uint64_t b = 0; b < batches; ++b) {
        Matrix x(c.length, c.features);
        for (int i = 0; i < c.length; ++i)
            for (int j = 0; j < c.features; ++j) x(i, j) = vals[off++];
        c.x.push_back(std::move(x));
    }
    return c;
}

Matrix forward_layer(const Matrix& w, const Matrix& x) {
    if (x.cols() != w.cols())
        throw DataError("forward: input features " + std::to_string(x.cols()) +
                        " != layer features " + std::to_string(w.cols()));
    const int s = x.rows();
    const int n = w.rows();
    const int m = w.cols();
    Matrix y(s, n);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int i = 0; i < s; ++i) {
        const double* xi = x.row(i);
        for (int k = 0; k < n; ++k) {
            const double* wk = w.row(k);
            double acc = 0.0;
            for (int j = 0; j < m; ++j) acc += xi[j] * wk[j];
            y(i, k) = acc;
        }
    }
    return y;
}

namespace {

Matrix tanh_mat(const Matrix& a) {
    Matrix out = a;
    double* p = out.data();
    for (size_t i = 0; i < out.size(); ++i) p[i] = std::tanh(p[i]);
    return out;
}

Matrix magnitude_scores(const Matrix& w) {
    Matrix s(w.rows(), w.cols());
    for (int i = 0; i < w.rows(); ++i)
        for (int j = 0; j < w.cols(); ++j) s(i, j) = std::fabs(w(i, j));
    return s;
}

Matrix wanda_scores(const Matrix& w, const GramMatrix& s) {
    Matrix out(w.rows(), w.cols());
    for (int j = 0; j < w.cols(); ++j) {
        const double cn = std::sqrt(std::max(s.s(j, j), 0.0));
        for (int i = 0; i < w.rows(); ++i) out(i, j) = std::fabs(w(i, j)) * cn;
    }
    return out;
}

Matrix random_scores(const Matrix& w, uint64_t seed, int layer) {
    Matrix out(w.rows(), w.cols());
    const uint64_t base = splitmix64(seed ^ (0x5851f42d4c957f2dULL * (layer + 1)));
    for (int i = 0; i < w.rows(); ++i)
        for (int j = 0; j < w.cols(); ++j) {
            const uint64_t h = splitmix64(base ^ (static_cast<uint64_t>(i) * w.cols() + j));
            out(i, j) = static_cast<double>(h >> 11) * 0x1.0p-53;
        }
    return out;
}

// Bias salient columns above every non-salient score so split_mask prunes
// them last. Relative order inside each class is preserved.
void boost_salient(Matrix& scores, const std::vector<uint8_t>& is_salient) {
    double lo = scores(0, 0), hi = scores(0, 0);
    for (int i = 0; i < scores.rows(); ++i)
        for (int j = 0; j < scores.cols(); ++j) {
            lo = std::min(lo, scores(i, j));
            hi = std::max(hi, scores(i, j));
        }
    const double big = (hi - lo) + 1.0;
    for (int i = 0; i < scores.rows(); ++i)
        for (int j = 0; j < scores.cols(); ++j)
            if (is_salient[j]) scores(i, j) += big;
}

// Single keep-mask of the round(N/M * m) highest column sums (structured) or
// the round(N/M * n * m) highest entries (unstructured).
Mask structured_mask(const Matrix& scores, int N, int M) {
    const int n = scores.rows();
    const int m = scores.cols();
    const int keep_cols = static_cast<int>(std::llround(static_cast<double>(N) / M * m));
    Vector colsum(m, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) colsum[j] += scores(i, j);
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return colsum[a] > colsum[b]; });
    Mask keep(n, m, 0);
    for (int r = 0; r < keep_cols; ++r)
        for (int i = 0; i < n; ++i) keep(i, order[r]) = 1;
    return keep;
}

Mask unstructured_mask(const Matrix& scores, int N, int M) {
    const int n = scores.rows();
    const int m = scores.cols();
    const size_t total = static_cast<size_t>(n) * m;
    const size_t keep_cnt =
        static_cast<size_t>(std::llround(static_cast<double>(N) / M * static_cast<double>(total)));
    std::vector<size_t> order(total);
    std::iota(order.begin(), order.end(), size_t{0});
    const double* p = scores.data();
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return p[a] > p[b]; });
    Mask keep(n, m, 0);
    for (size_t r = 0; r < keep_cnt; ++r) {
        const size_t e = order[r];
        keep(static_cast<int>(e / m), static_cast<int>(e % m)) = 1;
    }
    return keep;
}

GramMatrix principal_submatrix(const GramMatrix& s, int c0, int width) {
    Matrix sub(width, width);
    for (int a = 0; a < width; ++a)
        for (int b = 0; b < width; ++b) sub(a, b) = s.s(c0 + a, c0 + b);
    return {std::move(sub)};
}

// One additive sign component of the block factorization.
struct Component {
    Matrix b;      // n x bw, 0 off support
    Vector alpha;  // per row
    bool refinable = true;
};

struct BlockFactorization {
    Vector mu;
    std::vector<Component> comps; // [salient b1, salient b2, segment 0..]
    int n = 0, bw = 0;

    Matrix reconstruct(const Mask& keep) const {
        Matrix out(n, bw);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < bw; ++j) {
                if (!keep(i, j)) continue;
                double v = mu[i];
                for (const auto& c : comps) v += c.alpha[i] * c.b(i, j);
                out(i, j) = v;
            }
        return out;
    }

    Matrix residual(const Matrix& w) const {
        Matrix r = w;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < bw; ++j) {
                double v = mu[i];
                for (const auto& c : comps) v += c.alpha[i] * c.b(i, j);
                r(i, j) -= v;
            }
        return r;
    }
};

void mask_block(Matrix& a, const Mask& keep, int c0) {
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            if (!keep(i, c0 + j)) a(i, j) = 0.0;
}

// Exact coordinate-descent rounds on (mu, refinable alphas): each update is
// the closed-form minimizer of tr(R S R^T) with everything else held fixed,
// so the inner error never increases.
void refine_block(BlockFactorization& f, const Matrix& w, const GramMatrix& s,
                  int rounds, double eps) {
    const int n = f.n;
    const int bw = f.bw;

    Vector s1(bw, 0.0);
    double s11 = 0.0;
    for (int k = 0; k < bw; ++k) {
        double rs = 0.0;
        for (int l = 0; l < bw; ++l) rs += s.s(k, l);
        s1[k] = rs;
        s11 += rs;
    }
    s11 += eps;

    std::vector<double> sb(bw), resid(bw);
    for (int t = 0; t < rounds; ++t) {
        for (int i = 0; i < n; ++i) {
            const double* wi = w.row(i);
            double num = 0.0;
            for (int k = 0; k < bw; ++k) {
                double v = wi[k];
                for (const auto& c : f.comps) v -= c.alpha[i] * c.b(i, k);
                num += s1[k] * v;
            }
            f.mu[i] = num / s11;
        }
        for (auto& c : f.comps) {
            if (!c.refinable) continue;
            for (int i = 0; i < n; ++i) {
                const double* wi = w.row(i);
                for (int k = 0; k < bw; ++k) {
                    double v = wi[k] - f.mu[i];
                    for (const auto& o : f.comps)
                        if (&o != &c) v -= o.alpha[i] * o.b(i, k);
                    resid[k] = v;
                }
                double num = 0.0, den = 0.0;
                for (int k = 0; k < bw; ++k) {
                    double dot = 0.0;
                    for (int l = 0; l < bw; ++l) dot += s.s(k, l) * c.b(i, l);
                    sb[k] = dot;
                }
                for (int k = 0; k < bw; ++k) {
                    num += sb[k] * resid[k];
                    den += sb[k] * c.b(i, k);
                }
                c.alpha[i] = num / (den + eps);
            }
        }
    }
}

// Re-pick each component's signs against its own residual target, keeping
// supports. Optional behaviour, off by default.
void resign_components(BlockFactorization& f, const Matrix& w) {
    for (auto& c : f.comps) {
        for (int i = 0; i < f.n; ++i)
            for (int j = 0; j < f.bw; ++j) {
                if (c.b(i, j) == 0.0) continue;
                double target = w(i, j) - f.mu[i];
                for (const auto& o : f.comps)
                    if (&o != &c) target -= o.alpha[i] * o.b(i, j);
                c.b(i, j) = (target < 0.0) ? -1.0 : 1.0;
            }
    }
}

struct BlockResult {
    BlockFactorization fact;
    std::vector<int8_t> seg;   // n x bw, -1 salient, -2 off, else segment
    std::vector<double> step_l2; // per phase, vs the block's starting weights
    Matrix what;
    int n_segs = 0;
};

// Quantize one block of columns: build the mixed factorization (residual
// binarization on salient columns, split-point groups elsewhere), then either
// walk the mask steps with re-refinement or apply the final mask once.
BlockResult quantize_block(const Matrix& w_start, const std::vector<uint8_t>& salient,
                           const MaskGroup& group, int c0, int bw, const GramMatrix& s_blk,
                           const RunConfig& cfg) {
    const int n = w_start.rows();
    BlockResult out;
    out.n_segs = cfg.split_points + 1;

    Matrix work = w_start;
    const Mask& final_keep = group.final();
    if (!cfg.stepwise) mask_block(work, final_keep, c0);

    // Row means over the fitting support: all columns when stepwise, kept
    // entries only after a one-shot prune.
    BlockFactorization f;
    f.n = n;
    f.bw = bw;
    f.mu.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        int cnt = 0;
        for (int j = 0; j < bw; ++j) {
            if (!cfg.stepwise && !final_keep(i, c0 + j)) continue;
            acc += work(i, j);
            ++cnt;
        }
        f.mu[i] = cnt ? acc / cnt : 0.0;
    }

    auto fits = [&](int i, int j) {
        return cfg.stepwise || final_keep(i, c0 + j);
    };

    // Salient columns: two sign matrices against the redistributed values.
    Component b1, b2;
    b1.b = Matrix(n, bw);
    b2.b = Matrix(n, bw);
    b1.alpha.assign(n, 0.0);
    b2.alpha.assign(n, 0.0);
    b2.refinable = false;
    bool any_salient = false;
    for (int i = 0; i < n; ++i) {
        double a1 = 0.0;
        int cnt = 0;
        for (int j = 0; j < bw; ++j)
            if (salient[c0 + j] && fits(i, j)) {
                a1 += std::fabs(work(i, j) - f.mu[i]);
                ++cnt;
            }
        if (cnt == 0) continue;
        any_salient = true;
        a1 /= cnt;
        double a2 = 0.0;
        for (int j = 0; j < bw; ++j)
            if (salient[c0 + j] && fits(i, j)) {
                const double wt = work(i, j) - f.mu[i];
                b1.b(i, j) = (wt < 0.0) ? -1.0 : 1.0;
                const double r = wt - a1 * b1.b(i, j);
                b2.b(i, j) = (r < 0.0) ? -1.0 : 1.0;
                a2 += std::fabs(r);
            }
        b1.alpha[i] = a1;
        b2.alpha[i] = a2 / cnt;
    }

    // Non-salient columns: split-point grouping of the redistributed block.
    Matrix wt(n, bw);
    Mask nonsal(n, bw, 0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < bw; ++j)
            if (!salient[c0 + j] && fits(i, j)) {
                nonsal(i, j) = 1;
                wt(i, j) = work(i, j) - f.mu[i];
            }
    SplitPlan plan = grouped_binarize(wt, nonsal, cfg.split_points);

    out.seg.assign(static_cast<size_t>(n) * bw, -2);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < bw; ++j) {
            if (salient[c0 + j]) out.seg[static_cast<size_t>(i) * bw + j] = -1;
            else if (plan.seg[static_cast<size_t>(i) * bw + j] >= 0)
                out.seg[static_cast<size_t>(i) * bw + j] = plan.seg[static_cast<size_t>(i) * bw + j];
        }

    if (any_salient) {
        f.comps.push_back(std::move(b1));
        f.comps.push_back(std::move(b2));
    }
    for (int g = 0; g < out.n_segs; ++g) {
        Component seg;
        seg.b = Matrix(n, bw);
        seg.alpha.assign(n, 0.0);
        for (int i = 0; i < n; ++i) {
            seg.alpha[i] = plan.alpha(i, g);
            for (int j = 0; j < bw; ++j)
                if (plan.seg[static_cast<size_t>(i) * bw + j] == g)
                    seg.b(i, j) = plan.b(i, j);
        }
        f.comps.push_back(std::move(seg));
    }

    auto phase_l2 = [&](const Mask& keep) {
        Matrix r = w_start;
        const Matrix rec = f.reconstruct(keep);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < bw; ++j) r(i, j) -= rec(i, j);
        return decoupled_error(r, s_blk);
    };

    if (cfg.stepwise) {
        const Mask all(n, bw, 1);
        refine_block(f, work, s_blk, cfg.rounds, cfg.eps);
        if (cfg.resign_after_refine) resign_components(f, work);
        out.step_l2.push_back(phase_l2(all));
        const bool degenerate = group.N == group.M;
        if (!degenerate) {
            for (const auto& step : group.steps) {
                mask_block(work, step, c0);
                for (auto& c : f.comps) mask_block(c.b, step, c0);
                refine_block(f, work, s_blk, cfg.rounds, cfg.eps);
                if (cfg.resign_after_refine) resign_components(f, work);
                // reconstruct() keeps only surviving entries, so build the
                // block-local view of this step's mask.
                Mask local(n, bw, 0);
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < bw; ++j) local(i, j) = step(i, c0 + j);
                out.step_l2.push_back(phase_l2(local));
            }
        }
    } else {
        refine_block(f, work, s_blk, cfg.rounds, cfg.eps);
        if (cfg.resign_after_refine) resign_components(f, work);
        Mask local(n, bw, 0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < bw; ++j) local(i, j) = final_keep(i, c0 + j);
        out.step_l2.push_back(phase_l2(local));
    }

    Mask local_final(n, bw, 0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < bw; ++j) local_final(i, j) = final_keep(i, c0 + j);
    out.what = f.reconstruct(local_final);
    out.fact = std::move(f);
    return out;
}

} // namespace

Matrix QuantizedLayer::reconstruct() const {
    Matrix out(n, m);
    const int sw = 3 + n_segs;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
            if (!keep(i, j)) continue;
            const int bl = j / b_size;
            const Matrix& sc = scales[bl];
            const int8_t g = seg[static_cast<size_t>(i) * m + j];
            double v = sc(i, 0); // mu
            if (salient[j]) {
                v += sc(i, 1) * b1(i, j) + sc(i, 2) * b2(i, j);
            } else if (g >= 0 && g < sw - 3) {
                v += sc(i, 3 + g) * b1(i, j);
            }
            out(i, j) = v;
        }
    return out;
}

std::pair<QuantizedModel, RunReport> quantize_model(const Model& model, const Calib& calib,
                                                    const RunConfig& cfg, QuantizeDebug* debug) {
    cfg.validate();
    const int L = static_cast<int>(model.weights.size());
    if (L == 0) throw DataError("quantize: empty model");
    if (model.names.size() != model.weights.size())
        throw DataError("quantize: name/weight count mismatch");
    if (calib.x.empty()) throw DataError("quantize: no calibration data");
    if (calib.features != model.weights[0].cols())
        throw DataError("quantize: calibration features != first layer features");
    for (int k = 0; k + 1 < L; ++k)
        if (model.weights[k + 1].cols() != model.weights[k].rows())
            throw DataError("quantize: layer chain mismatch at " + model.names[k + 1]);
    for (int k = 0; k < L; ++k) {
        if (!all_finite(model.weights[k]))
            throw NumericError("quantize: non-finite weight in " + model.names[k]);
        if (model.weights[k].cols() % cfg.m_group != 0)
            throw ConfigError("quantize: layer " + model.names[k] + " columns not divisible by m_group");
    }

    RunReport report;
    report.config = cfg;

    // Allocation from full-precision activations.
    std::vector<int> n_i(L, cfg.n_target);
    if (cfg.cfs && L >= 2) {
        for (int k = 0; k < L; ++k)
            if (model.weights[k].rows() != model.weights[k].cols())
                throw ConfigError("quantize: cross-layer allocation needs square layers, " +
                                  model.names[k] + " is not");
        std::vector<double> lr(L);
        std::vector<Matrix> ins = calib.x;
        for (int k = 0; k < L; ++k) {
            std::vector<Matrix> outs;
            outs.reserve(ins.size());
            for (const auto& x : ins) outs.push_back(forward_layer(model.weights[k], x));
            lr[k] = lr_score_mean(ins, outs);
            if (k + 1 < L) {
                ins.clear();
                for (const auto& o : outs) ins.push_back(tanh_mat(o));
            }
        }
        report.lr = lr;
        report.ranks = rank_layers(lr);
        AllocationPlan plan = allocate(report.ranks, cfg.n_target, cfg.m_group);
        n_i = plan.n_i;
    }

    QuantizedModel qm;
    std::vector<Matrix> acts = calib.x; // propagated through quantized layers

    for (int k = 0; k < L; ++k) {
        const Matrix& w_orig = model.weights[k];
        const int n = w_orig.rows();
        const int m = w_orig.cols();

        Calib layer_calib;
        layer_calib.length = acts[0].rows();
        layer_calib.features = m;
        layer_calib.x = acts;
        const GramMatrix s = x2s(layer_calib);
        const DampedHessian h = damped_hessian(s, cfg.lambda);
        if (debug) {
            debug->gram.push_back(s.s);
            debug->hessian.push_back(h.h);
        }

        const Matrix hs = hessian_scores(w_orig, h);
        const SalientPartition sal = select_salient(hs, cfg.r_salient);

        Matrix scores;
        switch (cfg.prune_metric) {
            case PruneMetric::hessian: scores = hs; break;
            case PruneMetric::magnitude: scores = magnitude_scores(w_orig); break;
            case PruneMetric::wanda: scores = wanda_scores(w_orig, s); break;
            case PruneMetric::random: scores = random_scores(w_orig, cfg.seed, k); break;
        }
        if (cfg.exempt_salient) boost_salient(scores, sal.is_salient);

        MaskGroup group;
        switch (cfg.prune_type) {
            case PruneType::semi:
                group = (n_i[k] == cfg.m_group)
                            ? MaskGroup::no_pruning(n, m, cfg.m_group)
                            : split_mask(scores, n_i[k], cfg.m_group);
                break;
            case PruneType::structured: {
                group.N = n_i[k];
                group.M = cfg.m_group;
                group.steps.push_back(structured_mask(scores, n_i[k], cfg.m_group));
                break;
            }
            case PruneType::unstructured: {
                group.N = n_i[k];
                group.M = cfg.m_group;
                group.steps.push_back(unstructured_mask(scores, n_i[k], cfg.m_group));
                break;
            }
        }
        // Single-step groups walk their one mask like a regular step.
        const bool stepped = cfg.prune_type == PruneType::semi;

        QuantizedLayer ql;
        ql.name = model.names[k];
        ql.n = n;
        ql.m = m;
        ql.n_i = n_i[k];
        ql.m_group = cfg.m_group;
        ql.b_size = cfg.b_size;
        ql.n_segs = cfg.split_points + 1;
        ql.keep = group.final();
        ql.salient = sal.is_salient;
        ql.seg.assign(static_cast<size_t>(n) * m, -2);
        ql.b1 = Matrix(n, m);
        ql.b2 = Matrix(n, m);

        Matrix work = w_orig;
        Compensator comp(work, h);
        Matrix what(n, m);

        for (int c0 = 0; c0 < m; c0 += cfg.b_size) {
            const int bw = std::min(cfg.b_size, m - c0);
            Matrix w_start(n, bw);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < bw; ++j) w_start(i, j) = work(i, c0 + j);

            const GramMatrix s_blk = principal_submatrix(s, c0, bw);
            BlockResult br = quantize_block(w_start, sal.is_salient, group, c0, bw, s_blk, cfg);

            // Fold the block into the layer-level storage.
            Matrix sc(n, 3 + ql.n_segs);
            for (int i = 0; i < n; ++i) {
                sc(i, 0) = br.fact.mu[i];
                size_t ci = 0;
                const bool has_sal = br.fact.comps.size() == static_cast<size_t>(ql.n_segs) + 2;
                if (has_sal) {
                    sc(i, 1) = br.fact.comps[0].alpha[i];
                    sc(i, 2) = br.fact.comps[1].alpha[i];
                    ci = 2;
                }
                for (int g = 0; g < ql.n_segs; ++g)
                    sc(i, 3 + g) = br.fact.comps[ci + g].alpha[i];
                for (int j = 0; j < bw; ++j) {
                    ql.seg[static_cast<size_t>(i) * m + c0 + j] = br.seg[static_cast<size_t>(i) * bw + j];
                    if (has_sal && sal.is_salient[c0 + j]) {
                        ql.b1(i, c0 + j) = br.fact.comps[0].b(i, j);
                        ql.b2(i, c0 + j) = br.fact.comps[1].b(i, j);
                    } else {
                        const int8_t g = br.seg[static_cast<size_t>(i) * bw + j];
                        if (g >= 0) ql.b1(i, c0 + j) = br.fact.comps[ci + g].b(i, j);
                    }
                    what(i, c0 + j) = br.what(i, j);
                }
            }
            ql.scales.push_back(std::move(sc));

            // Trace: accumulate per-phase block errors.
            if (ql.trace_sum.steps.empty()) {
                for (size_t t = 0; t < br.step_l2.size(); ++t) {
                    StepRecord rec;
                    rec.step = static_cast<int>(t);
                    if (t == 0 && cfg.stepwise)
                        rec.kept_fraction = 1.0;
                    else if (stepped)
                        rec.kept_fraction = static_cast<double>(group.M - t) / group.M;
                    else
                        rec.kept_fraction = static_cast<double>(group.N) / group.M;
                    ql.trace_sum.steps.push_back(rec);
                }
            }
            for (size_t t = 0; t < br.step_l2.size(); ++t)
                ql.trace_sum.steps[t].l2 += br.step_l2[t];

            Matrix err(n, bw);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < bw; ++j) err(i, j) = w_start(i, j) - br.what(i, j);
            comp.absorb(err, c0, bw);
        }

        LayerReport lr_row;
        lr_row.name = ql.name;
        lr_row.l1 = l1_error(w_orig, what);
        lr_row.l2 = l2_error(w_orig, what, s);
        lr_row.bd = bd_score(w_orig);
        lr_row.n_i = n_i[k];
        report.layers.push_back(lr_row);

        qm.layers.push_back(std::move(ql));

        if (k + 1 < L) {
            std::vector<Matrix> next;
            next.reserve(acts.size());
            for (const auto& x : acts) next.push_back(tanh_mat(forward_layer(what, x)));
            acts = std::move(next);
        }
    }

    report.avg_bits = average_bits(cfg.r_salient, cfg.n_target, cfg.m_group, cfg.b_size);
    return {std::move(qm), std::move(report)};
}

ordered_json RunReport::to_json() const {
    ordered_json j;
    j["layers"] = ordered_json::array();
    for (const auto& l : layers)
        j["layers"].push_back(
            {{"name", l.name}, {"l1", l.l1}, {"l2", l.l2}, {"bd", l.bd}, {"n_i", l.n_i}});
    j["avg_bits"] = {{"n_param", avg_bits.n_param}, {"n_storing", avg_bits.n_storing}};
    j["config"] = config.to_json();
    if (!lr.empty()) {
        j["lr"] = lr;
        j["ranks"] = ranks;
    }
    return j;
}

std::vector<SweepRow> sweep(const Model& model, const Calib& calib, RunConfig cfg,
                            const std::vector<std::pair<int, int>>& ratios) {
    if (ratios.empty()) throw ConfigError("sweep: no ratios");
    cfg.cfs = false;

    std::vector<SweepRow> rows;
    for (const auto& [N, M] : ratios) {
        if (N < 1 || M < 2 || N > M)
            throw ConfigError("sweep: invalid ratio " + std::to_string(N) + ":" + std::to_string(M));
        RunConfig rc = cfg;
        rc.n_target = N;
        rc.m_group = M;
        rc.validate();
        auto [qm, rep] = quantize_model(model, calib, rc);

        SweepRow row;
        row.n = N;
        row.m = M;
        for (size_t k = 0; k < qm.layers.size(); ++k) {
            row.l2_total += rep.layers[k].l2;
            row.l1_total += rep.layers[k].l1;
            row.bd_total += bd_score_kept(model.weights[k], qm.layers[k].keep);
        }
        rows.push_back(row);
    }
    return rows;
}

namespace {

std::string fmt_double(double v) {
    char buf[32];
    snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out = "ratio,l2_total,l1,bd\n";
    for (const auto& r : rows)
        out += std::to_string(r.n) + ":" + std::to_string(r.m) + "," + fmt_double(r.l2_total) +
               "," + fmt_double(r.l1_total) + "," + fmt_double(r.bd_total) + "\n";
    return out;
}

std::string trace_csv(const Trace& t) {
    std::string out = "step,kept_fraction,l2\n";
    for (const auto& s : t.steps)
        out += std::to_string(s.step) + "," + fmt_double(s.kept_fraction) + "," +
               fmt_double(s.l2) + "\n";
    return out;
}

EvalReport eval_model(const Model& fp, const QuantizedModel& q, const Matrix& inputs) {
    if (fp.weights.size() != q.layers.size())
        throw DataError("eval: model/quantized layer count mismatch");
    if (fp.weights.empty()) throw DataError("eval: empty model");

    EvalReport rep;
    Matrix xf = inputs;
    Matrix xq = inputs;
    for (size_t k = 0; k < fp.weights.size(); ++k) {
        const Matrix of = forward_layer(fp.weights[k], xf);
        const Matrix oq = forward_layer(q.layers[k].reconstruct(), xq);
        double acc = 0.0;
        const double* a = of.data();
        const double* b = oq.data();
        for (size_t i = 0; i < of.size(); ++i) {
            const double d = a[i] - b[i];
            acc += d * d;
        }
        rep.layer_mse.push_back(acc / static_cast<double>(of.size()));
        if (k + 1 < fp.weights.size()) {
            xf = tanh_mat(of);
            xq = tanh_mat(oq);
        }
    }
    rep.end_to_end_mse = rep.layer_mse.back();
    return rep;
}

ordered_json EvalReport::to_json() const {
    ordered_json j;
    j["layer_mse"] = layer_mse;
    j["end_to_end_mse"] = end_to_end_mse;
    return j;
}

void save_quantized(const QuantizedModel& qm, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

    ordered_json mj;
    mj["layers"] = ordered_json::array();
    for (size_t k = 0; k < qm.layers.size(); ++k) {
        const auto& ql = qm.layers[k];
        const std::string prefix = "layer" + std::to_string(k);
        mj["layers"].push_back({{"name", ql.name},
                                {"prefix", prefix},
                                {"n", ql.n},
                                {"m", ql.m},
                                {"n_i", ql.n_i},
                                {"m_group", ql.m_group},
                                {"b_size", ql.b_size},
                                {"n_segs", ql.n_segs}});

        write_tensor(Tensor::from_mask(ql.keep), dir / (prefix + ".keep.pbt"));
        write_tensor(Tensor::from_bits(ql.salient), dir / (prefix + ".salient.pbt"));
        write_tensor(Tensor::from_i8(ql.seg, {static_cast<uint64_t>(ql.n), static_cast<uint64_t>(ql.m)}),
                     dir / (prefix + ".seg.pbt"));

        // Kept signs, row-major: one bit per entry, salient entries add a
        // second bit for the residual sign. Bit 1 == +1.
        std::vector<uint8_t> bits;
        for (int i = 0; i < ql.n; ++i)
            for (int j = 0; j < ql.m; ++j) {
                if (!ql.keep(i, j)) continue;
                bits.push_back(ql.b1(i, j) > 0.0 ? 1 : 0);
                if (ql.salient[j]) bits.push_back(ql.b2(i, j) > 0.0 ? 1 : 0);
            }
        if (bits.empty()) bits.push_back(0); // fully pruned layer still writes a tensor
        write_tensor(Tensor::from_bits(bits), dir / (prefix + ".signs.pbt"));

        Tensor sc;
        sc.dtype = Dtype::f64;
        sc.dims = {qm.layers[k].scales.size(), static_cast<uint64_t>(ql.n),
                   static_cast<uint64_t>(3 + ql.n_segs)};
        for (const auto& blk : ql.scales) {
            const double* p = blk.data();
            for (size_t i = 0; i < blk.size(); ++i) {
                const uint64_t u = std::bit_cast<uint64_t>(p[i]);
                for (int byte = 0; byte < 8; ++byte)
                    sc.payload.push_back(static_cast<uint8_t>(u >> (8 * byte)));
            }
        }
        write_tensor(sc, dir / (prefix + ".scales.pbt"));
    }

    std::ofstream f(dir / "manifest.json", std::ios::trunc);
    if (!f) throw IoError("cannot write quantized manifest");
    f << mj.dump(2) << '\n';
}

QuantizedModel load_quantized(const std::filesystem::path& dir) {
    std::ifstream f(dir / "manifest.json");
    if (!f) throw IoError("cannot open quantized manifest in " + dir.string());
    ordered_json mj;
    try {
        f >> mj;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("quantized manifest: " + std::string(e.what()));
    }
    if (!mj.contains("layers") || !mj["layers"].is_array())
        throw DataError("quantized manifest: missing layers");

    QuantizedModel qm;
    for (const auto& lj : mj["layers"]) {
        QuantizedLayer ql;
        ql.name = lj.at("name").get<std::string>();
        const std::string prefix = lj.at("prefix").get<std::string>();
        ql.n = lj.at("n").get<int>();
        ql.m = lj.at("m").get<int>();
        ql.n_i = lj.at("n_i").get<int>();
        ql.m_group = lj.at("m_group").get<int>();
        ql.b_size = lj.at("b_size").get<int>();
        ql.n_segs = lj.at("n_segs").get<int>();

        ql.keep = read_tensor(dir / (prefix + ".keep.pbt")).to_mask();
        ql.salient = read_tensor(dir / (prefix + ".salient.pbt")).to_bits();
        ql.seg = read_tensor(dir / (prefix + ".seg.pbt")).to_i8();
        const auto bits = read_tensor(dir / (prefix + ".signs.pbt")).to_bits();

        if (ql.keep.rows() != ql.n || ql.keep.cols() != ql.m)
            throw DataError("quantized: keep mask shape mismatch for " + ql.name);
        if (static_cast<int>(ql.salient.size()) != ql.m)
            throw DataError("quantized: salient vector size mismatch for " + ql.name);
        if (ql.seg.size() != static_cast<size_t>(ql.n) * ql.m)
            throw DataError("quantized: segment map size mismatch for " + ql.name);

        ql.b1 = Matrix(ql.n, ql.m);
        ql.b2 = Matrix(ql.n, ql.m);
        size_t bi = 0;
        for (int i = 0; i < ql.n; ++i)
            for (int j = 0; j < ql.m; ++j) {
                if (!ql.keep(i, j)) continue;
                if (bi >= bits.size()) throw DataError("quantized: sign stream too short for " + ql.name);
                ql.b1(i, j) = bits[bi++] ? 1.0 : -1.0;
                if (ql.salient[j]) {
                    if (bi >= bits.size())
                        throw DataError("quantized: sign stream too short for " + ql.name);
                    ql.b2(i, j) = bits[bi++] ? 1.0 : -1.0;
                }
            }

        Tensor sc = read_tensor(dir / (prefix + ".scales.pbt"));
        if (sc.dims.size() != 3 || sc.dtype != Dtype::f64)
            throw DataError("quantized: bad scales tensor for " + ql.name);
        const auto vals = sc.to_doubles();
        const int blocks = static_cast<int>(sc.dims[0]);
        const int rows = static_cast<int>(sc.dims[1]);
        const int width = static_cast<int>(sc.dims[2]);
        if (rows != ql.n || width != 3 + ql.n_segs)
            throw DataError("quantized: scales shape mismatch for " + ql.name);
        if (blocks != (ql.m + ql.b_size - 1) / ql.b_size)
            throw DataError("quantized: scales block count mismatch for " + ql.name);
        size_t off = 0;
        for (int bl = 0; bl < blocks; ++bl) {
            Matrix blkm(rows, width);
            for (int i = 0; i < rows; ++i)
                for (int j = 0; j < width; ++j) blkm(i, j) = vals[off++];
            ql.scales.push_back(std::move(blkm));
        }
        qm.layers.push_back(std::move(ql));
    }
    return qm;
}

} // namespace bitprune
