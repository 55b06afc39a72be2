#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "bitprune/binarize.hpp"
#include "bitprune/gram.hpp"
#include "bitprune/matrix.hpp"
#include "bitprune/ref.hpp"
#include "bitprune/synthetic.hpp"

using namespace bitprune;

namespace {

int thread_count() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

double best_of(int reps, const std::function<void()>& fn) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    return best;
}

void row(const char* kernel, int n, int m, const char* impl, double ms) {
    std::printf("%s,%d,%d,%s,%d,%.3f\n", kernel, n, m, impl, thread_count(), ms);
}

// Keep results observable so the calls cannot be optimized away.
double g_sink_val = 0.0;
void sink(double v) {
    g_sink_val += v;
    asm volatile("" : : "g"(&g_sink_val) : "memory");
}

} // namespace

int main(int argc, char** argv) {
    int reps = 5;
    if (argc > 1) reps = std::max(1, std::atoi(argv[1]));

    std::printf("kernel,n,m,impl,threads,ms\n");

    for (int sz : {64, 128, 256}) {
        SyntheticSpec spec;
        spec.seed = 7;
        spec.n = sz;
        spec.m = sz;
        spec.batches = 4;
        spec.length = 128;
        const SyntheticData data = gen_synthetic(spec);
        const Matrix& w = data.weights[0];

        GramMatrix s_par = x2s(data.calib);
        const GramMatrix s_ref = ref::x2s(data.calib);
        double diff = 0.0;
        for (size_t i = 0; i < s_par.s.size(); ++i)
            diff = std::max(diff, std::fabs(s_par.s.data()[i] - s_ref.s.data()[i]));
        if (diff > 1e-9) {
            std::fprintf(stderr, "x2s mismatch at size %d: %g\n", sz, diff);
            return 1;
        }

        row("x2s", sz, sz, "parallel", best_of(reps, [&] { sink(x2s(data.calib).s(0, 0)); }));
        row("x2s", sz, sz, "serial",
            best_of(reps, [&] { sink(ref::x2s(data.calib).s(0, 0)); }));

        const BinaryFit fit = binary(w);
        const Matrix what = fit.reconstruct();
        Matrix r = w;
        for (int i = 0; i < r.rows(); ++i)
            for (int j = 0; j < r.cols(); ++j) r(i, j) -= what(i, j);

        row("decoupled_error", sz, sz, "parallel",
            best_of(reps, [&] { sink(decoupled_error(r, s_par)); }));
        row("decoupled_error", sz, sz, "serial",
            best_of(reps, [&] { sink(ref::decoupled_error(r, s_par)); }));

        row("update_mu", sz, sz, "parallel",
            best_of(reps, [&] { sink(update_mu(s_par, w, fit.b, fit.alpha, 1e-12)[0]); }));
        row("update_mu", sz, sz, "serial",
            best_of(reps, [&] { sink(ref::update_mu(s_par, w, fit.b, fit.alpha, 1e-12)[0]); }));

        row("update_alpha", sz, sz, "parallel",
            best_of(reps, [&] { sink(update_alpha(s_par, w, fit.mu, fit.b, 1e-12)[0]); }));
        row("update_alpha", sz, sz, "serial",
            best_of(reps, [&] { sink(ref::update_alpha(s_par, w, fit.mu, fit.b, 1e-12)[0]); }));
    }
    return 0;
}
