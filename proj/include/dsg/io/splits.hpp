#pragma once

#include <cstdint>
#include <vector>

namespace dsg::io {

/// Train/tune/test fractions plus the seed driving the permutation.
struct SplitSpec {
    double train = 0.40;
    double tune = 0.10;
    double test = 0.50;
    std::uint64_t seed = 0;
};

struct Splits {
    std::vector<std::size_t> train;
    std::vector<std::size_t> tune;
    std::vector<std::size_t> test;
};

/// Partition 0..n-1 into train/tune/test by a seeded uniform permutation
/// (mt19937_64 + backward Fisher-Yates, see Rng), cut at floor(train*n) and
/// floor((train+tune)*n). Requires n >= 10.
Splits make_splits(std::size_t n, const SplitSpec& spec);

} // namespace dsg::io
