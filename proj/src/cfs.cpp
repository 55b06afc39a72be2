#include "bitprune/cfs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bitprune/error.hpp"

namespace bitprune {

double lr_score(const Matrix& input, const Matrix& output) {
    if (!input.same_shape(output))
        throw DataError("lr_score: input/output shape mismatch (feature counts differ?)");
    const size_t sz = input.size();
    if (sz == 0) throw DataError("lr_score: empty activations");

    const double* a = input.data();
    const double* b = output.data();
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (size_t i = 0; i < sz; ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) throw NumericError("lr_score: zero activation norm");
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

double lr_score_mean(const std::vector<Matrix>& inputs, const std::vector<Matrix>& outputs) {
    if (inputs.empty() || inputs.size() != outputs.size())
        throw DataError("lr_score_mean: batch count mismatch");
    double acc = 0.0;
    for (size_t i = 0; i < inputs.size(); ++i) acc += lr_score(inputs[i], outputs[i]);
    return acc / static_cast<double>(inputs.size());
}

std::vector<int> rank_layers(const std::vector<double>& lr) {
    const int L = static_cast<int>(lr.size());
    if (L == 0) throw DataError("rank_layers: no layers");
    std::vector<int> order(L);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return lr[a] < lr[b]; });
    std::vector<int> rank(L);
    for (int pos = 0; pos < L; ++pos) rank[order[pos]] = pos + 1;
    return rank;
}

AllocationPlan allocate(const std::vector<int>& ranks, int n_target, int m_group) {
    const int L = static_cast<int>(ranks.size());
    if (L == 0) throw DataError("allocate: no layers");

    AllocationPlan plan;
    plan.n_target = n_target;
    plan.m = m_group;

    if (L == 1) {
        if (n_target < 1 || n_target > m_group)
            throw ConfigError("allocate: n_target out of range");
        plan.n_high = plan.n_low = n_target;
        plan.n_i = {n_target};
        return plan;
    }

    plan.n_high = n_target + 1;
    plan.n_low = n_target - 1;
    if (plan.n_low < 1 || plan.n_high >= m_group)
        throw ConfigError("allocate: n_target " + std::to_string(n_target) +
                          " leaves no room for the +/-1 spread at M = " +
                          std::to_string(m_group));

    plan.n_i.resize(L);
    for (int i = 0; i < L; ++i) {
        const int k = ranks[i];
        if (k < 1 || k > L) throw DataError("allocate: rank out of range");
        const double v = plan.n_high -
                         static_cast<double>(plan.n_high - plan.n_low) * (k - 1) / (L - 1) + 0.5;
        plan.n_i[i] = static_cast<int>(std::floor(v));
    }
    return plan;
}

} // namespace bitprune
