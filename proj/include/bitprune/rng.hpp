#ifndef BITPRUNE_RNG_HPP
#define BITPRUNE_RNG_HPP

#include <cstdint>

namespace bitprune {

// splitmix64, used to expand seeds and as a stateless hash.
uint64_t splitmix64(uint64_t x);

// xoshiro256++ with splitmix64 seeding. Hand-rolled so that streams are
// bit-identical across platforms and standard library versions; std::mt19937
// distributions are not portable.
class Rng {
public:
    explicit Rng(uint64_t seed);

    uint64_t next_u64();

    // Uniform in (0, 1), 53-bit resolution, never returns 0.
    double uniform();

    // Standard normal via Box-Muller (trig form, one variate per pair of
    // uniforms; the sine branch is discarded to keep the stream layout simple).
    double normal();

    // Laplace(0, b) via inverse CDF.
    double laplace(double b = 1.0);

    // Student-t via Bailey's polar method (trig form). Requires df > 2 so the
    // variance exists; callers validate.
    double student_t(double df);

private:
    uint64_t s_[4];
};

} // namespace bitprune

#endif
