#include "bitprune/synthetic.hpp"

#include <cmath>

#include "bitprune/error.hpp"
#include "bitprune/rng.hpp"

namespace bitprune {

Distribution distribution_from_name(const std::string& name) {
    if (name == "gaussian") return Distribution::gaussian;
    if (name == "laplace") return Distribution::laplace;
    if (name == "student_t") return Distribution::student_t;
    throw ConfigError("unknown distribution: " + name);
}

std::string distribution_name(Distribution d) {
    switch (d) {
        case Distribution::gaussian: return "gaussian";
        case Distribution::laplace: return "laplace";
        case Distribution::student_t: return "student_t";
    }
    return "?";
}

void SyntheticSpec::validate() const {
    if (n < 1 || m < 1) throw ConfigError("synthetic: n and m must be >= 1");
    if (layers < 1) throw ConfigError("synthetic: layers must be >= 1");
    if (layers > 1 && n != m)
        throw ConfigError("synthetic: stacked layers require n == m");
    if (batches < 1 || length < 1)
        throw ConfigError("synthetic: batches and length must be >= 1");
    if (dist == Distribution::student_t && !(df > 2.0))
        throw ConfigError("synthetic: student_t needs df > 2, got " + std::to_string(df));
    if (calib_col_sigma < 0.0)
        throw ConfigError("synthetic: calib_col_sigma must be >= 0");
}

static double draw(Rng& rng, Distribution d, double df) {
    switch (d) {
        case Distribution::gaussian: return rng.normal();
        case Distribution::laplace: return rng.laplace();
        case Distribution::student_t: return rng.student_t(df);
    }
    return 0.0;
}

SyntheticData gen_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);

    SyntheticData out;
    out.weights.reserve(spec.layers);
    for (int l = 0; l < spec.layers; ++l) {
        Matrix w(spec.n, spec.m);
        double* p = w.data();
        for (size_t i = 0; i < w.size(); ++i) p[i] = draw(rng, spec.dist, spec.df);
        out.weights.push_back(std::move(w));
    }

    // Calibration stays gaussian: it models data samples, while the chosen
    // distribution shapes the weights under test. Optional per-column scales
    // make some input features dominate the Gram diagonal.
    Vector col_scale(spec.m, 1.0);
    if (spec.calib_col_sigma > 0.0)
        for (int j = 0; j < spec.m; ++j)
            col_scale[j] = std::exp(spec.calib_col_sigma * rng.normal());

    out.calib.length = spec.length;
    out.calib.features = spec.m;
    out.calib.x.reserve(spec.batches);
    for (int b = 0; b < spec.batches; ++b) {
        Matrix x(spec.length, spec.m);
        for (int i = 0; i < spec.length; ++i)
            for (int j = 0; j < spec.m; ++j)
                x(i, j) = col_scale[j] * rng.normal();
        out.calib.x.push_back(std::move(x));
    }
    return out;
}

} // namespace bitprune
