#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dsg/matrix.hpp"

namespace dsg::learn {

/// Affine map from difference features to an accuracy gap.
struct LinearRegressor {
    std::vector<double> weights;
    double bias = 0.0;

    double predict(std::span<const double> s) const;
};

/// Closed-form least squares with an optional ridge term on the weights (the
/// bias is never penalized). At ridge = 0 requires at least M+1 points and a
/// nonsingular system.
LinearRegressor fit_ols(const Matrix& s, const std::vector<double>& g, double ridge = 0.0);

struct MlpConfig {
    double learning_rate = 1e-4;
    double weight_decay = 1e-3;
    double momentum = 0.9;
    std::size_t max_iter = 20000;       // epoch cap
    std::size_t batch_size = 64;        // full batch when fewer points
    double early_stop_tol = 1e-9;       // min MSE improvement
    std::size_t early_stop_window = 500;
    std::uint64_t seed = 0;
};

/// Fully-connected regressor with hidden sizes 512/256/128 and rectifier
/// activations. Inputs are standardized and targets centered at fit time;
/// both transforms are stored inside the model, so predict() works on raw
/// feature vectors.
class MlpRegressor {
public:
    static constexpr std::size_t kHidden0 = 512;
    static constexpr std::size_t kHidden1 = 256;
    static constexpr std::size_t kHidden2 = 128;

    std::vector<Matrix> w;                // w[l]: out x in
    std::vector<std::vector<double>> b;   // per layer
    std::vector<double> in_shift, in_scale;
    double target_shift = 0.0;

    /// Seeded uniform(-1,1)/sqrt(fan_in) parameter initialization.
    static MlpRegressor init(std::size_t input_dim, std::uint64_t seed);

    double predict(std::span<const double> s) const;

    /// Forward pass on an already-normalized input.
    double forward(std::span<const double> normalized) const;

    /// Mean squared error against centered targets, plus (when grads is
    /// non-null) its analytic gradient. x rows must already be normalized.
    double mse_loss_grad(const Matrix& x, const std::vector<double>& centered_targets,
                         std::vector<Matrix>* grad_w,
                         std::vector<std::vector<double>>* grad_b) const;
};

/// Seeded mini-batch SGD with momentum and decoupled-from-loss weight decay
/// applied to weights only. Deterministic per (data, config, seed).
MlpRegressor fit_mlp_regressor(const Matrix& s, const std::vector<double>& g,
                               const MlpConfig& cfg = {});

} // namespace dsg::learn
