#ifndef BITPRUNE_SPBO_HPP
#define BITPRUNE_SPBO_HPP

#include <vector>

#include "bitprune/binarize.hpp"
#include "bitprune/gram.hpp"
#include "bitprune/maskgen.hpp"
#include "bitprune/matrix.hpp"

namespace bitprune {

struct StepwiseConfig {
    int rounds = 3;       // refinement rounds per phase
    double eps = 1e-12;
    bool track = false;   // record per-phase half-step errors in the trace
};

// One trace row per phase: row 0 is the unpruned refined fit, row k the state
// after the k-th mask step. l2 is tr(R S R^T) with R = W_orig - What.
struct StepRecord {
    int step = 0;
    double kept_fraction = 1.0;
    double l2 = 0.0;
    std::vector<double> half_step_errors; // only when tracking
};

struct Trace {
    std::vector<StepRecord> steps; // size = mask steps + 1
};

struct StepwiseResult {
    Matrix what;  // (alpha B + mu) on the final support, zero elsewhere
    BinaryFit fit;
    Trace trace;
};

// Stepwise prune + binarize: binary(W), refine, then per mask step zero the
// pruned entries of W and B and re-refine (mu, alpha) for T rounds. Signs are
// never recomputed, only masked.
StepwiseResult spbo(const Matrix& w, const MaskGroup& group, const GramMatrix& s,
                    const StepwiseConfig& cfg = {});

// Baseline: apply the final keep-mask in one shot, binarize the masked
// matrix, refine T rounds. Same factorization, no intermediate steps.
StepwiseResult oneshot_prune_binarize(const Matrix& w, const Mask& keep,
                                      const GramMatrix& s, int rounds = 3,
                                      double eps = 1e-12);

} // namespace bitprune

#endif
