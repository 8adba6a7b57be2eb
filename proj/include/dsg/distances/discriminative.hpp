#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "dsg/io/splits.hpp"
#include "dsg/matrix.hpp"

namespace dsg::distances {

/// Test-split quality of a base-vs-target discriminator.
struct DiscriminatorReport {
    double accuracy = 0.0;
    double auc = 0.0;
    double a_proxy = 0.0; // 2 (1 - 2 error), error = 1 - accuracy
};

/// 2 (1 - 2 error): 0 at chance, 2 at perfect discrimination.
inline double a_proxy_from_error(double error) { return 2.0 * (1.0 - 2.0 * error); }

struct LearnerConfig {
    enum class Kind { linear, mlp };
    Kind kind = Kind::linear;
    std::vector<double> l2_grid = {1e-4, 1e-3, 1e-2, 1e-1};
    double grad_tol = 1e-6;
    std::size_t max_iter = 5000;
    bool standardize = true;          // statistics from the base train portion
    std::size_t mlp_max_iter = 2000;  // epoch cap for the optional MLP head
    std::uint64_t seed = 0;
};

/// Label base rows 0 and target rows 1, split each side train/tune/test by
/// spec (the target side uses spec.seed + 1), train a discriminator on the
/// train portions, pick the regularization strength on the tune portions,
/// and report accuracy / AUC / A-proxy on the held-out test portions.
DiscriminatorReport discriminative_distance(const Matrix& base_features,
                                            const Matrix& target_features,
                                            const io::SplitSpec& spec,
                                            const LearnerConfig& cfg = {});

struct RotationReport {
    double accuracy = 0.0;
    double auc = 0.0; // macro-averaged one-vs-rest
};

struct RotationConfig {
    double l2 = 1e-3;
    double grad_tol = 1e-6;
    std::size_t max_iter = 1000;
    bool standardize = true;
    std::size_t max_rows_per_class = 1500; // seeded subsample cap for training
    std::uint64_t seed = 0;
};

/// Train a 4-way linear classifier on base features labeled by rotation
/// index; report accuracy and macro OVR AUC on the target rotations.
RotationReport rotation_score(const std::array<Matrix, 4>& base_rotations,
                              const std::array<Matrix, 4>& target_rotations,
                              const RotationConfig& cfg = {});

/// Quarter-turn rotation of features laid out as a side x side grid
/// (requires cols = side^2). turns counts 90-degree steps.
Matrix rotate_grid_features(const Matrix& features, int turns);

} // namespace dsg::distances
