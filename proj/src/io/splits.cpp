#include "dsg/io/splits.hpp"

#include <cmath>

#include "dsg/error.hpp"
#include "dsg/rng.hpp"

namespace dsg::io {

Splits make_splits(std::size_t n, const SplitSpec& spec) {
    if (spec.train <= 0 || spec.tune <= 0 || spec.test <= 0 ||
        std::abs(spec.train + spec.tune + spec.test - 1.0) > 1e-9)
        throw DataError("split fractions must be positive and sum to 1");
    if (n < 10) throw DataError("too few instances to split");

    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    Rng rng(spec.seed);
    rng.shuffle(perm);

    const auto cut1 = static_cast<std::size_t>(std::floor(spec.train * static_cast<double>(n)));
    const auto cut2 =
        static_cast<std::size_t>(std::floor((spec.train + spec.tune) * static_cast<double>(n)));

    Splits s;
    s.train.assign(perm.begin(), perm.begin() + cut1);
    s.tune.assign(perm.begin() + cut1, perm.begin() + cut2);
    s.test.assign(perm.begin() + cut2, perm.end());
    return s;
}

} // namespace dsg::io
