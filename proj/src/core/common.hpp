#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gnnd {

// Error taxonomy. The CLI maps these onto process exit codes, so every
// failure raised by the core must pick one of the three buckets.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;  // bad config / arguments (exit 2)
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;  // NaN/Inf, divergence (exit 3)
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;  // bad input data, missing ids (exit 4)
};

// Dense row-major matrix of doubles. Plain storage, no math attached.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::span<const double> row(std::size_t r) const {
        return {data.data() + r * cols, cols};
    }
};

// Deterministic RNG. std:: distributions are implementation-defined, so all
// sampling goes through these helpers to keep runs reproducible across
// toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

    std::uint64_t u64() {
        // splitmix64
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Unbiased integer in [0, n).
    std::uint64_t below(std::uint64_t n);

    double real01() { return double(u64() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * real01(); }

    // Standard normal via Box-Muller.
    double normal();

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[below(i)]);
        }
    }

private:
    std::uint64_t state_;
};

// Stable per-stage seed derivation (seed, stream) -> child seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// FNV-1a over a string, used for config hashing.
std::uint64_t fnv1a(std::string_view s);

}  // namespace gnnd
