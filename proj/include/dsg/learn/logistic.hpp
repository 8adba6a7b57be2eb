#pragma once

#include <cstdint>
#include <vector>

#include "dsg/core/label_space.hpp"
#include "dsg/matrix.hpp"

namespace dsg::learn {

/// Multinomial linear classifier: softmax(W x + b).
struct LinearModel {
    Matrix weights; // K x D
    std::vector<double> bias;
    LabelSpace classes;
};

struct LogisticConfig {
    double l2 = 0.0;             // on weights, not bias
    double grad_tol = 1e-6;
    std::size_t max_iter = 5000;
    std::vector<double>* objective_trace = nullptr; // optional, for tests
};

/// Mean regularized NLL and its gradient at (w, b). y holds class indices in
/// 0..K-1. Returns the objective; fills gw/gb when non-null.
double logistic_loss_grad(const Matrix& w, const std::vector<double>& b, const Matrix& x,
                          const std::vector<std::size_t>& y, double l2, Matrix* gw,
                          std::vector<double>* gb);

/// Full-batch gradient descent with backtracking (Armijo) line search from a
/// zero start; the problem is convex, so the seed only names the run. Stops
/// at gradient norm < grad_tol or the iteration cap.
LinearModel fit_logistic(const Matrix& x, const std::vector<ClassId>& y,
                         const LogisticConfig& cfg = {});

/// softmax(W x + b) for each row; rows sum to 1 within 1e-12.
Matrix predict_proba(const LinearModel& m, const Matrix& x);

/// Mean negative log-likelihood of m on (x, y); no regularization term.
double mean_nll(const LinearModel& m, const Matrix& x, const std::vector<ClassId>& y);

/// Fraction of rows whose argmax matches y.
double classifier_accuracy(const LinearModel& m, const Matrix& x, const std::vector<ClassId>& y);

/// Per-dimension affine map fitted on one sample, applied to others.
struct Standardizer {
    std::vector<double> shift;
    std::vector<double> scale; // 1/std, clamped for constant dimensions

    static Standardizer fit(const Matrix& x);
    Matrix apply(const Matrix& x) const;
};

} // namespace dsg::learn
