#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "dsg/kernels/kernels.hpp"
#include "dsg/rng.hpp"

using namespace dsg;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n, double scale = 1.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = scale * rng.normal();
    return v;
}

// |a - b| <= tol * (1 + magnitude): reassociation/FMA slack for reductions
void check_close(double a, double b, double magnitude) {
    CHECK(std::abs(a - b) <= 1e-12 * (1.0 + magnitude));
}

} // namespace

TEST_CASE("dispatched kernels match the scalar reference on random inputs") {
    INFO("active backend: ", kernels::backend_name());
    Rng rng(42);
    // sizes straddling all vector widths and tail paths
    for (std::size_t n : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 15u, 16u, 17u, 31u, 64u, 100u, 257u}) {
        auto a = random_vec(rng, n, 2.0);
        auto b = random_vec(rng, n, 3.0);

        double mag_dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) mag_dot += std::abs(a[i] * b[i]);
        check_close(kernels::dot(a.data(), b.data(), n),
                    kernels::scalar::dot(a.data(), b.data(), n), mag_dot);

        double mag_sum = 0.0;
        for (double x : a) mag_sum += std::abs(x);
        check_close(kernels::sum(a.data(), n), kernels::scalar::sum(a.data(), n), mag_sum);

        check_close(kernels::squared_norm(a.data(), n),
                    kernels::scalar::squared_norm(a.data(), n), mag_dot + mag_sum);

        CHECK(kernels::max_value(a.data(), n) == kernels::scalar::max_value(a.data(), n));

        auto y1 = b;
        auto y2 = b;
        kernels::axpy(1.7, a.data(), y1.data(), n);
        kernels::scalar::axpy(1.7, a.data(), y2.data(), n);
        for (std::size_t i = 0; i < n; ++i) check_close(y1[i], y2[i], std::abs(y2[i]));

        auto s1 = a;
        auto s2 = a;
        kernels::scale(-0.3, s1.data(), n);
        kernels::scalar::scale(-0.3, s2.data(), n);
        CHECK(s1 == s2); // elementwise multiply has no reassociation
    }
}

TEST_CASE("kernel identities") {
    Rng rng(7);
    auto v = random_vec(rng, 131);
    check_close(kernels::dot(v.data(), v.data(), v.size()),
                kernels::squared_norm(v.data(), v.size()),
                kernels::squared_norm(v.data(), v.size()));

    std::vector<double> ones(97, 1.0);
    CHECK(kernels::sum(ones.data(), ones.size()) == doctest::Approx(97.0));

    auto w = random_vec(rng, 64);
    double m = w[0];
    for (double x : w) m = std::max(m, x);
    CHECK(kernels::max_value(w.data(), w.size()) == m);
}

TEST_CASE("backend forcing falls back safely and restores") {
    const auto detected = kernels::active_backend();
    kernels::force_backend(kernels::Backend::scalar);
    CHECK(kernels::active_backend() == kernels::Backend::scalar);

    std::vector<double> a{1.0, 2.0, 3.0};
    CHECK(kernels::dot(a.data(), a.data(), 3) == doctest::Approx(14.0));

    kernels::reset_backend();
    CHECK(kernels::active_backend() == detected);
}
