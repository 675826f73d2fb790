#include "limbnet/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace limbnet {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t sm = seed;
    for (auto& s : state_) s = splitmix64(sm);
}

std::uint64_t Rng::next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_normal_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();  // log(0) guard
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * M_PI * u2;
    spare_normal_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

std::uint64_t Rng::next_below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::next_below: n must be > 0");
    // Widening multiply maps the 64-bit draw onto [0,n). The bias is
    // below 2^-64 per value, irrelevant here; determinism is what matters.
    unsigned __int128 wide = static_cast<unsigned __int128>(next_u64()) *
                             static_cast<unsigned __int128>(n);
    return static_cast<std::uint64_t>(wide >> 64);
}

Rng Rng::fork(std::uint64_t stream) const {
    std::uint64_t mix = seed_;
    std::uint64_t a = splitmix64(mix);
    mix ^= stream * 0xd1342543de82ef95ULL + 0x632be59bd9b4e019ULL;
    std::uint64_t b = splitmix64(mix);
    return Rng(a ^ rotl(b, 32) ^ stream);
}

}  // namespace limbnet
