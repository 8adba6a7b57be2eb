#pragma once

#include <vector>

#include "dsg/matrix.hpp"

namespace dsg::linalg {

struct SymmetricEigen {
    std::vector<double> values; // ascending
    Matrix vectors;             // column j is the eigenvector of values[j]
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Dimensions here
/// are feature-space sized (tens), where Jacobi is simple and numerically
/// dependable. Throws on asymmetric input (tolerance 1e-6, scaled).
SymmetricEigen symmetric_eigen(const Matrix& a);

/// V diag(sqrt(max(lambda, 0))) V^T. Satisfies |S*S - A|_F <= 1e-6 (1+|A|_F)
/// for PSD input.
Matrix matrix_sqrt_psd(const Matrix& a);

/// C = A * B (dense, row-major).
Matrix matmul(const Matrix& a, const Matrix& b);

double trace(const Matrix& a);

/// Solve A x = b by Gaussian elimination with partial pivoting.
/// Throws DataError on (numerically) singular systems.
std::vector<double> solve_linear(Matrix a, std::vector<double> b);

} // namespace dsg::linalg
