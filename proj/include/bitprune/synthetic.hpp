#ifndef BITPRUNE_SYNTHETIC_HPP
#define BITPRUNE_SYNTHETIC_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "bitprune/matrix.hpp"

namespace bitprune {

enum class Distribution {
    gaussian,
    laplace,
    student_t,
};

Distribution distribution_from_name(const std::string& name);
std::string distribution_name(Distribution d);

// Calibration activations: `batches` matrices of shape length x features,
// rows are samples.
struct Calib {
    int length = 0;
    int features = 0;
    std::vector<Matrix> x;
};

struct SyntheticSpec {
    uint64_t seed = 0;
    Distribution dist = Distribution::gaussian;
    double df = 3.0;   // student_t only; must be > 2
    int n = 8;         // rows (output features) per layer
    int m = 8;         // cols (input features)
    int layers = 1;    // stacking more than one layer requires n == m
    int batches = 1;   // calibration batches
    int length = 32;   // samples per batch
    // When > 0, calibration columns get log-normal scale spread
    // exp(sigma * z_j), giving some input features far more energy than
    // others. Weights are unaffected.
    double calib_col_sigma = 0.0;

    void validate() const;
};

struct SyntheticData {
    std::vector<Matrix> weights; // layers x (n x m)
    Calib calib;                 // batches x (length x m)
};

// Deterministic: one stream seeded from spec.seed, weights drawn first
// (layer by layer, row-major), then column scales, then calibration
// (batch by batch, row-major). Same spec -> same bytes.
SyntheticData gen_synthetic(const SyntheticSpec& spec);

} // namespace bitprune

#endif
