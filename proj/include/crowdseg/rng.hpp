#pragma once

#include <cstdint>
#include <random>

namespace crowdseg {

// Seeded RNG with hand-rolled value mappings. std::mt19937_64 output is
// specified bit-exactly by the standard, but the <random> distributions are
// not; mapping manually keeps runs reproducible across compilers.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // [0, n), n > 0
    int uniform_int(int n) { return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n)); }

private:
    std::mt19937_64 eng_;
};

}  // namespace crowdseg
