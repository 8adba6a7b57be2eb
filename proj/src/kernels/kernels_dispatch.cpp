#include <atomic>

#include "dsg/kernels/kernels.hpp"

namespace dsg::kernels {

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
double dot(const double*, const double*, std::size_t);
void axpy(double, const double*, double*, std::size_t);
double sum(const double*, std::size_t);
double squared_norm(const double*, std::size_t);
double max_value(const double*, std::size_t);
void scale(double, double*, std::size_t);
} // namespace avx2
#endif

#if defined(__aarch64__)
namespace neon {
double dot(const double*, const double*, std::size_t);
void axpy(double, const double*, double*, std::size_t);
double sum(const double*, std::size_t);
double squared_norm(const double*, std::size_t);
double max_value(const double*, std::size_t);
void scale(double, double*, std::size_t);
} // namespace neon
#endif

namespace {

struct Vtable {
    double (*dot)(const double*, const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
    double (*sum)(const double*, std::size_t);
    double (*squared_norm)(const double*, std::size_t);
    double (*max_value)(const double*, std::size_t);
    void (*scale)(double, double*, std::size_t);
    Backend backend;
};

constexpr Vtable kScalar{scalar::dot, scalar::axpy,      scalar::sum,
                         scalar::squared_norm, scalar::max_value, scalar::scale,
                         Backend::scalar};

#if defined(__x86_64__) || defined(_M_X64)
constexpr Vtable kAvx2{avx2::dot, avx2::axpy,      avx2::sum,
                       avx2::squared_norm, avx2::max_value, avx2::scale,
                       Backend::avx2};
#endif

#if defined(__aarch64__)
constexpr Vtable kNeon{neon::dot, neon::axpy,      neon::sum,
                       neon::squared_norm, neon::max_value, neon::scale,
                       Backend::neon};
#endif

const Vtable* detect() {
#if defined(__x86_64__) || defined(_M_X64)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return &kAvx2;
#endif
#if defined(__aarch64__)
    return &kNeon;
#endif
    return &kScalar;
}

std::atomic<const Vtable*> g_active{nullptr};

const Vtable* active() {
    const Vtable* v = g_active.load(std::memory_order_acquire);
    if (!v) {
        v = detect();
        g_active.store(v, std::memory_order_release);
    }
    return v;
}

} // namespace

Backend active_backend() { return active()->backend; }

const char* backend_name() {
    switch (active()->backend) {
        case Backend::avx2: return "avx2";
        case Backend::neon: return "neon";
        default: return "scalar";
    }
}

void force_backend(Backend b) {
    const Vtable* v = &kScalar;
#if defined(__x86_64__) || defined(_M_X64)
    if (b == Backend::avx2 && __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
        v = &kAvx2;
#endif
#if defined(__aarch64__)
    if (b == Backend::neon) v = &kNeon;
#endif
    (void)b;
    g_active.store(v, std::memory_order_release);
}

void reset_backend() { g_active.store(detect(), std::memory_order_release); }

double dot(const double* a, const double* b, std::size_t n) { return active()->dot(a, b, n); }
void axpy(double a, const double* x, double* y, std::size_t n) { active()->axpy(a, x, y, n); }
double sum(const double* x, std::size_t n) { return active()->sum(x, n); }
double squared_norm(const double* x, std::size_t n) { return active()->squared_norm(x, n); }
double max_value(const double* x, std::size_t n) { return active()->max_value(x, n); }
void scale(double a, double* x, std::size_t n) { active()->scale(a, x, n); }

} // namespace dsg::kernels
