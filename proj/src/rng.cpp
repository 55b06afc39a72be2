#include "bitprune/rng.hpp"

#include <cmath>
#include <numbers>

#include "bitprune/error.hpp"

namespace bitprune {

uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Rng::Rng(uint64_t seed) {
    // Expand the seed; xoshiro must not start from an all-zero state and
    // splitmix64 guarantees it will not.
    for (int i = 0; i < 4; ++i)
        s_[i] = splitmix64(seed + static_cast<uint64_t>(i) * 0x9e3779b97f4a7c15ULL);
}

static inline uint64_t rotl(uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

uint64_t Rng::next_u64() {
    const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform() {
    // 53 high bits -> [0,1); shift by half an ulp to stay strictly inside.
    const double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    return u + 0x1.0p-54;
}

double Rng::normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::laplace(double b) {
    const double u = uniform() - 0.5;
    return (u < 0.0 ? b : -b) * std::log1p(-2.0 * std::fabs(u));
}

double Rng::student_t(double df) {
    if (!(df > 2.0)) throw ConfigError("student_t: df must be > 2");
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(df * (std::pow(u1, -2.0 / df) - 1.0));
    return r * std::cos(2.0 * std::numbers::pi * u2);
}

} // namespace bitprune
