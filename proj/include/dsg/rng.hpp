#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace dsg {

/// Deterministic random source used for every seeded operation in the library.
///
/// All draws are derived from std::mt19937_64, whose output sequence is fixed
/// by the C++ standard, through explicitly spelled-out transformations (53-bit
/// uniform, Box-Muller normals, modulo index draws, backward Fisher-Yates).
/// Distribution adapters from <random> are deliberately avoided: their output
/// is implementation-defined and would break cross-toolchain reproducibility
/// of splits, synthetic datasets, and demo artifacts.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound). Modulo reduction; bias is negligible for
    /// the bounds used here (< 2^32) and keeps the mapping trivially portable.
    std::size_t index(std::size_t bound) {
        return static_cast<std::size_t>(engine_() % static_cast<std::uint64_t>(bound));
    }

    /// Standard normal via Box-Muller. The second value of each pair is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    void fill_normal(std::vector<double>& v) {
        for (auto& x : v) x = normal();
    }

    /// Backward Fisher-Yates with modulo index draws.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// FNV-1a over a string, folded with a user seed. Used to derive independent,
/// order-insensitive per-name substreams (one per target dataset).
inline std::uint64_t derive_seed(std::uint64_t seed, const std::string& name) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : name) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h ^ (seed * 0x9e3779b97f4a7c15ull);
}

} // namespace dsg
