#pragma once

#include <cstdint>
#include <cstddef>
#include <vector>

namespace limbnet {

// Deterministic generator: xoshiro256++ with splitmix64 seeding.
// The algorithm is fixed by this implementation, so a given seed yields
// the same draw sequence on every platform and run. All randomness in
// the library (init, shuffling, dropout, synthetic data) goes through
// this class; nothing touches std::random_device or the C library rand.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    // Uniform in [0,1) with 53-bit resolution.
    double uniform();
    double uniform(double lo, double hi);

    // Standard normal via Box-Muller; draws two uniforms per pair.
    double normal();

    // Uniform integer in [0,n). n must be > 0.
    std::uint64_t next_below(std::uint64_t n);

    // Fisher-Yates, last-to-first.
    template <class T>
    void shuffle(std::vector<T>& v) {
        if (v.size() < 2) return;
        for (std::size_t i = v.size() - 1; i > 0; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i + 1));
            if (i != j) std::swap(v[i], v[j]);
        }
    }

    // Independent child stream; distinct `stream` values give distinct
    // sequences for the same parent seed.
    Rng fork(std::uint64_t stream) const;

private:
    std::uint64_t state_[4];
    std::uint64_t seed_;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace limbnet
