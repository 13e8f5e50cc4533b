#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace recon {

/**
 * Portable seeded random source.
 *
 * The engine is std::mt19937_64, whose output sequence is fixed by the C++
 * standard. Everything layered on top is spelled out here rather than taken
 * from <random> distributions (which are implementation-defined):
 *
 *   uniform()      = (next() >> 11) * 2^-53, in [0, 1)
 *   index(n)       = rejection sampling on next() against the largest
 *                    multiple of n below 2^64, then modulo n
 *   normal()       = Box-Muller on (u1, u2) with u1 = 1 - uniform(),
 *                    u2 = uniform(); returns r*cos(2*pi*u2) and caches
 *                    r*sin(2*pi*u2) for the following call
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::uint64_t index(std::uint64_t n);
    double normal();

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL);

}  // namespace recon
