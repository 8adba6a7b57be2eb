#pragma once

#include <cstddef>

namespace dsg::kernels {

// Data-parallel inner loops behind every hot path in the library: logistic
// and MLP gradients, covariance accumulation, mean embeddings, confidence
// reductions. Each kernel has a scalar reference implementation plus SIMD
// variants (AVX2+FMA on x86-64, NEON on aarch64) selected once at runtime.
// SIMD variants must agree with the scalar reference to floating-point
// reassociation tolerance; tests/test_kernels.cpp enforces this.

/// sum_i a[i] * b[i]
double dot(const double* a, const double* b, std::size_t n);

/// y[i] += a * x[i]
void axpy(double a, const double* x, double* y, std::size_t n);

/// sum_i x[i]
double sum(const double* x, std::size_t n);

/// sum_i x[i]^2
double squared_norm(const double* x, std::size_t n);

/// max_i x[i]; n must be >= 1
double max_value(const double* x, std::size_t n);

/// x[i] *= a
void scale(double a, double* x, std::size_t n);

enum class Backend { scalar, avx2, neon };

Backend active_backend();
const char* backend_name();

/// Force a specific backend (equivalence tests, debugging). Requests for a
/// backend the host cannot run fall back to scalar.
void force_backend(Backend b);

/// Return to auto-detection.
void reset_backend();

// Scalar reference implementations, always available regardless of the
// active backend. The equivalence tests compare the dispatched kernels
// against these.
namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
double sum(const double* x, std::size_t n);
double squared_norm(const double* x, std::size_t n);
double max_value(const double* x, std::size_t n);
void scale(double a, double* x, std::size_t n);
} // namespace scalar

} // namespace dsg::kernels
