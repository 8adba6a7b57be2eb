// Micro-benchmark for the dispatched kernels: scalar reference vs the
// backend picked at runtime. Rough numbers for eyeballing the dispatch,
// not a statistics-grade harness.

#include <chrono>
#include <cstdio>
#include <vector>

#include "dsg/kernels/kernels.hpp"
#include "dsg/rng.hpp"

using namespace dsg;

namespace {

volatile double g_sink = 0.0;

template <typename F>
double time_ns_per_call(F&& f, int iters) {
    const auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < iters; ++i) g_sink += f();
    const auto stop = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::nano>(stop - start).count() / iters;
}

} // namespace

int main() {
    Rng rng(1);
    std::printf("detected backend: %s\n\n", kernels::backend_name());
    std::printf("%-14s %10s %14s %14s %8s\n", "kernel", "n", "scalar ns", "dispatch ns",
                "speedup");

    for (std::size_t n : {64u, 1024u, 16384u, 262144u}) {
        std::vector<double> a(n), b(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = rng.normal();
            b[i] = rng.normal();
            y[i] = rng.normal();
        }
        const int iters = static_cast<int>(4 * 1024 * 1024 / n) + 8;

        struct Row {
            const char* name;
            double scalar, dispatch;
        };
        Row rows[] = {
            {"dot",
             time_ns_per_call([&] { return kernels::scalar::dot(a.data(), b.data(), n); }, iters),
             time_ns_per_call([&] { return kernels::dot(a.data(), b.data(), n); }, iters)},
            {"sum",
             time_ns_per_call([&] { return kernels::scalar::sum(a.data(), n); }, iters),
             time_ns_per_call([&] { return kernels::sum(a.data(), n); }, iters)},
            {"squared_norm",
             time_ns_per_call([&] { return kernels::scalar::squared_norm(a.data(), n); }, iters),
             time_ns_per_call([&] { return kernels::squared_norm(a.data(), n); }, iters)},
            {"max_value",
             time_ns_per_call([&] { return kernels::scalar::max_value(a.data(), n); }, iters),
             time_ns_per_call([&] { return kernels::max_value(a.data(), n); }, iters)},
            {"axpy",
             time_ns_per_call(
                 [&] {
                     kernels::scalar::axpy(1.0001, a.data(), y.data(), n);
                     return y[0];
                 },
                 iters),
             time_ns_per_call(
                 [&] {
                     kernels::axpy(1.0001, a.data(), y.data(), n);
                     return y[0];
                 },
                 iters)},
        };
        for (const auto& r : rows)
            std::printf("%-14s %10zu %14.1f %14.1f %7.2fx\n", r.name, n, r.scalar, r.dispatch,
                        r.scalar / r.dispatch);
        std::printf("\n");
    }
    return 0;
}
