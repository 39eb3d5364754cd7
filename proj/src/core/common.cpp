#include "common.hpp"

#include <cmath>

namespace gnnd {

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) throw ConfigError("Rng::below called with n = 0");
    const std::uint64_t limit = ~std::uint64_t(0) - (~std::uint64_t(0) % n);
    std::uint64_t x;
    do {
        x = u64();
    } while (x >= limit);
    return x % n;
}

double Rng::normal() {
    double u1 = real01();
    while (u1 <= 0.0) u1 = real01();
    const double u2 = real01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix-style mix of (seed, stream); collision-free enough for
    // per-epoch/per-stage sampling streams.
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace gnnd
