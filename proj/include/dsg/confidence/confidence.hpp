#pragma once

#include "dsg/core/dataset.hpp"

namespace dsg::confidence {

/// Mean max-probability and mean prediction entropy of a view, both taken
/// over the view's (raw, unrenormalized) probability columns.
struct ConfidenceSummary {
    double avg_confidence = 0.0;
    double avg_entropy = 0.0;
    std::size_t n = 0;
    LabelSpace label_space;
};

/// Positive softmax temperature.
struct Temperature {
    double t = 1.0;
};

ConfidenceSummary summarize(const DatasetView& view);

/// Difference of average confidences over the intersected label space:
/// base-side AC minus target-side AC. Antisymmetric in its arguments.
double doc(const Dataset& base, const Dataset& target);

/// Difference of average prediction entropies (natural log), base minus
/// target, over the intersected label space.
double doe(const Dataset& base, const Dataset& target);

/// Regressor-free prediction: base accuracy minus DoC, clamped to [0, 1].
double doc_feat_predict(double base_acc, double doc_value);

/// Minimize mean NLL of softmax(log p / T) over a labeled view. Coarse
/// multiplicative grid on [0.05, 20] (with T = 1 always a candidate),
/// then golden-section refinement to |dT| < 1e-4.
Temperature fit_temperature(const DatasetView& view);

/// Mean NLL of softmax(log p / T) over the view's columns; probabilities are
/// floored at 1e-12 before the log.
double temperature_nll(const DatasetView& view, Temperature t);

/// Replace each probability row with softmax(log p / t). Row argmaxes are
/// preserved, so accuracy is invariant.
Dataset apply_temperature(const Dataset& d, Temperature t);

} // namespace dsg::confidence
