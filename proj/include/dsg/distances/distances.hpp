#pragma once

#include <cstddef>
#include <vector>

#include "dsg/matrix.hpp"

namespace dsg::distances {

/// First and second moments of a feature sample.
struct GaussianSummary {
    std::vector<double> mean;
    Matrix cov; // symmetric, unbiased (n-1) denominator
    std::size_t n = 0;
};

/// Column means and unbiased covariance; symmetry enforced by averaging with
/// the transpose. Requires n >= 2.
GaussianSummary gaussian_summary(const Matrix& features);

/// Squared mean distance plus covariance trace term,
///   |mu_B - mu_T|^2 + tr(S_B + S_T - 2 (S_B S_T)^{1/2}),
/// with the cross term evaluated through the symmetrized product
/// S_B^{1/2} S_T S_B^{1/2}. Negative numerical residue is clamped to 0.
/// Computed over the entire inputs; no splits.
double frechet(const Matrix& base_features, const Matrix& target_features);

double frechet(const GaussianSummary& base, const GaussianSummary& target);

/// Euclidean norm of the difference of the two feature means.
double mmd(const Matrix& base_features, const Matrix& target_features);

/// Mann-Whitney AUC: fraction of (positive, negative) pairs ranked correctly,
/// ties counted 1/2. labels hold 0/1; both classes must be present.
double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

} // namespace dsg::distances
