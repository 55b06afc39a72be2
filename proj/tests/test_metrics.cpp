#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "bitprune/binarize.hpp"
#include "bitprune/error.hpp"
#include "bitprune/metrics.hpp"
#include "bitprune/rng.hpp"

using namespace bitprune;

namespace {

Matrix row(std::vector<double> vals) {
    Matrix w(1, static_cast<int>(vals.size()));
    for (size_t j = 0; j < vals.size(); ++j) w(0, static_cast<int>(j)) = vals[j];
    return w;
}

Matrix random_matrix(Rng& rng, int n, int m, double scale = 1.0) {
    Matrix w(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) w(i, j) = scale * rng.normal();
    return w;
}

// Population variance of |v - mean(v)|, the per-row difficulty statistic.
double row_difficulty(const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double s1 = 0.0, s2 = 0.0;
    for (double x : v) {
        const double a = std::fabs(x - mean);
        s1 += a;
        s2 += a * a;
    }
    const double am = s1 / static_cast<double>(v.size());
    return s2 / static_cast<double>(v.size()) - am * am;
}

} // namespace

TEST_CASE("difficulty of the hand row is 86/81") {
    CHECK(bd_score(row({3.0, 1.0, -2.0})) == doctest::Approx(86.0 / 81.0).epsilon(1e-14));
}

TEST_CASE("two-valued rows have zero difficulty") {
    // |deviations| are equal, so their variance vanishes
    CHECK(bd_score(row({2.0, 0.0})) == 0.0);
    CHECK(bd_score(row({5.0, -3.0})) == 0.0);

    Matrix w(2, 4);
    for (int j = 0; j < 4; ++j) {
        w(0, j) = (j % 2) ? 1.0 : -1.0;
        w(1, j) = (j % 2) ? 7.0 : 3.0;
    }
    CHECK(bd_score(w) == 0.0);
}

TEST_CASE("difficulty scales quadratically and ignores row shifts") {
    Rng rng(601);
    const Matrix w = random_matrix(rng, 4, 9);
    const double base = bd_score(w);

    Matrix scaled = w;
    Matrix shifted = w;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 9; ++j) {
            scaled(i, j) *= 3.0;
            shifted(i, j) += 10.0 * (i + 1);
        }
    CHECK(bd_score(scaled) == doctest::Approx(9.0 * base).epsilon(1e-12));
    CHECK(bd_score(shifted) == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("difficulty times the element count is the 1-bit fit error") {
    Rng rng(602);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 2 + static_cast<int>(rng.next_u64() % 6);
        const int m = 3 + static_cast<int>(rng.next_u64() % 10);
        const Matrix w = random_matrix(rng, n, m);
        const double l1 = l1_error(w, binary(w).reconstruct());
        CHECK(l1 == doctest::Approx(n * m * bd_score(w)).epsilon(1e-12));
    }
}

TEST_CASE("difficulty needs at least two columns") {
    CHECK_THROWS_AS(bd_score(row({1.0})), DataError);
}

TEST_CASE("kept-only difficulty matches the per-row oracle") {
    Rng rng(603);
    const int n = 5, m = 8;
    const Matrix w = random_matrix(rng, n, m);
    Mask keep(n, m, 0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) keep(i, j) = rng.uniform() < 0.6;
    // force one row below the 2-kept threshold
    for (int j = 0; j < m; ++j) keep(2, j) = (j == 0);

    double total = 0.0;
    int used = 0;
    for (int i = 0; i < n; ++i) {
        std::vector<double> kept;
        for (int j = 0; j < m; ++j)
            if (keep(i, j)) kept.push_back(w(i, j));
        if (kept.size() < 2) continue;
        total += row_difficulty(kept);
        ++used;
    }
    REQUIRE(used == n - 1);
    CHECK(bd_score_kept(w, keep) == doctest::Approx(total / used).epsilon(1e-12));

    const Mask all(n, m, 1);
    CHECK(bd_score_kept(w, all) == doctest::Approx(bd_score(w)).epsilon(1e-14));

    const Mask none(n, m, 0);
    CHECK_THROWS_AS(bd_score_kept(w, none), DataError);
    const Mask wrong(n, m + 1, 1);
    CHECK_THROWS_AS(bd_score_kept(w, wrong), DataError);
}

TEST_CASE("rank correlation endpoints and tie averaging") {
    CHECK(spearman({1.0, 2.0, 3.0}, {10.0, 20.0, 30.0}) == doctest::Approx(1.0));
    CHECK(spearman({1.0, 2.0, 3.0}, {5.0, -1.0, -7.0}) == doctest::Approx(-1.0));
    // monotone in rank regardless of spacing
    CHECK(spearman({1.0, 2.0, 3.0, 4.0}, {1.0, 100.0, 101.0, 1e6}) == doctest::Approx(1.0));
    // tied pair takes the average rank 1.5
    CHECK(spearman({1.0, 1.0, 2.0}, {1.0, 2.0, 3.0}) ==
          doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-14));
}

TEST_CASE("rank correlation input validation") {
    CHECK_THROWS_AS(spearman({1.0, 2.0}, {1.0}), DataError);
    CHECK_THROWS_AS(spearman({1.0}, {2.0}), DataError);
    CHECK_THROWS_AS(spearman({1.0, 1.0, 1.0}, {1.0, 2.0, 3.0}), DataError);
}

TEST_CASE("difficulty ranks the 1-bit fit error across an ensemble") {
    Rng rng(604);
    std::vector<Matrix> ensemble;
    const int sizes[4][2] = {{3, 6}, {4, 8}, {6, 10}, {5, 12}};
    for (int i = 0; i < 12; ++i) {
        const int* sz = sizes[i % 4];
        // spread difficulty over several orders so ranks are unambiguous
        ensemble.push_back(random_matrix(rng, sz[0], sz[1], std::pow(2.0, i)));
    }
    CHECK(bd_error_correlation(ensemble) > 0.9);
}

TEST_CASE("degenerate ensembles are rejected") {
    // every matrix two-valued: difficulty is identically zero
    std::vector<Matrix> flat;
    flat.push_back(row({1.0, -1.0}));
    flat.push_back(row({3.0, 1.0}));
    flat.push_back(row({0.5, -0.5}));
    CHECK_THROWS_AS(bd_error_correlation(flat), DataError);

    std::vector<Matrix> tiny;
    tiny.push_back(row({1.0, 2.0}));
    CHECK_THROWS_AS(bd_error_correlation(tiny), DataError);
}

TEST_CASE("squared-residual norms agree under the identity Gram") {
    Rng rng(605);
    const Matrix w = random_matrix(rng, 3, 5);
    const Matrix what = random_matrix(rng, 3, 5);

    CHECK(l1_error(row({1.0, 2.0}), row({0.0, 0.0})) == 5.0);

    Matrix eye(5, 5);
    for (int k = 0; k < 5; ++k) eye(k, k) = 1.0;
    const GramMatrix s{std::move(eye)};
    CHECK(l2_error(w, what, s) == doctest::Approx(l1_error(w, what)).epsilon(1e-12));

    CHECK_THROWS_AS(l1_error(w, Matrix(3, 4)), DataError);
    CHECK_THROWS_AS(l2_error(w, Matrix(3, 4), s), DataError);
}

TEST_CASE("bit budget hits the published operating points") {
    const BitBudget half = average_bits(0.1, 4, 8, 8);
    CHECK(half.n_param == 0.55);

    const BitBudget six = average_bits(0.1, 6, 8, 8);
    CHECK(six.n_param == doctest::Approx(0.825).epsilon(1e-15));

    const BitBudget big = average_bits(0.1, 4, 8, 128);
    CHECK(big.n_storing == 2.0078125);

    // no salient split and no pruning: exactly one bit per parameter
    CHECK(average_bits(0.0, 8, 8, 8).n_param == 1.0);
}

TEST_CASE("bit budget is range checked") {
    CHECK_THROWS_AS(average_bits(-0.1, 4, 8, 8), ConfigError);
    CHECK_THROWS_AS(average_bits(1.5, 4, 8, 8), ConfigError);
    CHECK_THROWS_AS(average_bits(0.1, 0, 8, 8), ConfigError);
    CHECK_THROWS_AS(average_bits(0.1, 9, 8, 8), ConfigError);
    CHECK_THROWS_AS(average_bits(0.1, 4, 8, 0), ConfigError);
}
