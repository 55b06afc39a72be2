#ifndef BITPRUNE_CFS_HPP
#define BITPRUNE_CFS_HPP

#include <vector>

#include "bitprune/matrix.hpp"

namespace bitprune {

// Layer redundancy score: cosine similarity between a layer's flattened input
// and output activations, averaged over batches. High similarity = the layer
// changes little = more redundant. Requires matching feature counts.
double lr_score(const Matrix& input, const Matrix& output);
double lr_score_mean(const std::vector<Matrix>& inputs,
                     const std::vector<Matrix>& outputs);

// rank[i] in 1..L, 1 = least redundant (lowest LR). Ties break by layer index.
std::vector<int> rank_layers(const std::vector<double>& lr);

// Per-layer keep counts interpolated between N_target+1 (least redundant) and
// N_target-1 (most redundant):
//   N_i = floor(N_high - (N_high - N_low) * (rank_i - 1) / (L - 1) + 1/2).
// Endpoints hit N_high/N_low exactly and the average stays near N_target.
// A single layer just gets N_target.
struct AllocationPlan {
    std::vector<int> n_i;
    int n_target = 0;
    int n_high = 0, n_low = 0;
    int m = 0;
};

AllocationPlan allocate(const std::vector<int>& ranks, int n_target, int m_group);

} // namespace bitprune

#endif
