#include "dsg/distances/discriminative.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dsg/distances/distances.hpp"
#include "dsg/error.hpp"
#include "dsg/learn/logistic.hpp"
#include "dsg/learn/regressors.hpp"
#include "dsg/rng.hpp"

namespace dsg::distances {

namespace {

Matrix gather_rows(const Matrix& m, const std::vector<std::size_t>& idx) {
    Matrix out(idx.size(), m.cols());
    for (std::size_t r = 0; r < idx.size(); ++r) {
        const auto src = m.row(idx[r]);
        std::copy(src.begin(), src.end(), out.row(r).begin());
    }
    return out;
}

Matrix vstack(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() + b.rows(), a.cols());
    std::copy(a.values().begin(), a.values().end(), out.data());
    std::copy(b.values().begin(), b.values().end(), out.data() + a.rows() * a.cols());
    return out;
}

void check_finite(const Matrix& m, const char* what) {
    for (double v : m.values())
        if (!std::isfinite(v)) throw DataError(std::string("non-finite features for ") + what);
}

} // namespace

DiscriminatorReport discriminative_distance(const Matrix& base_features,
                                            const Matrix& target_features,
                                            const io::SplitSpec& spec,
                                            const LearnerConfig& cfg) {
    if (base_features.cols() != target_features.cols())
        throw DataError("discriminator dimension mismatch");
    if (cfg.l2_grid.empty()) throw DataError("discriminator needs a non-empty l2 grid");
    check_finite(base_features, "discriminator");
    check_finite(target_features, "discriminator");

    io::SplitSpec target_spec = spec;
    target_spec.seed = spec.seed + 1;
    const auto sb = io::make_splits(base_features.rows(), spec);
    const auto st = io::make_splits(target_features.rows(), target_spec);

    Matrix train_x = vstack(gather_rows(base_features, sb.train), gather_rows(target_features, st.train));
    Matrix tune_x = vstack(gather_rows(base_features, sb.tune), gather_rows(target_features, st.tune));
    Matrix test_x = vstack(gather_rows(base_features, sb.test), gather_rows(target_features, st.test));

    auto side_labels = [](std::size_t n_base, std::size_t n_total) {
        std::vector<ClassId> y(n_total, 1);
        std::fill(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n_base), 0);
        return y;
    };
    const auto train_y = side_labels(sb.train.size(), train_x.rows());
    const auto tune_y = side_labels(sb.tune.size(), tune_x.rows());
    const auto test_y = side_labels(sb.test.size(), test_x.rows());

    if (cfg.standardize) {
        const auto stats = learn::Standardizer::fit(gather_rows(base_features, sb.train));
        train_x = stats.apply(train_x);
        tune_x = stats.apply(tune_x);
        test_x = stats.apply(test_x);
    }

    std::vector<double> test_scores(test_x.rows());
    double test_accuracy = 0.0;

    if (cfg.kind == LearnerConfig::Kind::linear) {
        learn::LinearModel best_model;
        double best_tune = std::numeric_limits<double>::infinity();
        for (double l2 : cfg.l2_grid) {
            learn::LogisticConfig lcfg;
            lcfg.l2 = l2;
            lcfg.grad_tol = cfg.grad_tol;
            lcfg.max_iter = cfg.max_iter;
            learn::LinearModel model = learn::fit_logistic(train_x, train_y, lcfg);
            const double tune_nll = learn::mean_nll(model, tune_x, tune_y);
            if (tune_nll < best_tune) {
                best_tune = tune_nll;
                best_model = std::move(model);
            }
        }
        const Matrix probs = learn::predict_proba(best_model, test_x);
        const std::size_t target_col =
            static_cast<std::size_t>(best_model.classes.index_of(1));
        for (std::size_t i = 0; i < test_x.rows(); ++i) test_scores[i] = probs(i, target_col);
        test_accuracy = learn::classifier_accuracy(best_model, test_x, test_y);
    } else {
        // MLP head: fit the shallow-learners regressor on 0/1 side labels and
        // threshold its output at 1/2.
        std::vector<double> train_t(train_y.begin(), train_y.end());
        std::vector<double> tune_t(tune_y.begin(), tune_y.end());
        learn::MlpRegressor best_model;
        double best_tune = std::numeric_limits<double>::infinity();
        for (double wd : cfg.l2_grid) {
            learn::MlpConfig mcfg;
            mcfg.weight_decay = wd;
            mcfg.max_iter = cfg.mlp_max_iter;
            mcfg.seed = cfg.seed;
            learn::MlpRegressor model = learn::fit_mlp_regressor(train_x, train_t, mcfg);
            double tune_mse = 0.0;
            for (std::size_t i = 0; i < tune_x.rows(); ++i) {
                const double r = model.predict(tune_x.row(i)) - tune_t[i];
                tune_mse += r * r;
            }
            if (tune_mse < best_tune) {
                best_tune = tune_mse;
                best_model = std::move(model);
            }
        }
        std::size_t correct = 0;
        for (std::size_t i = 0; i < test_x.rows(); ++i) {
            test_scores[i] = best_model.predict(test_x.row(i));
            const int pred = test_scores[i] > 0.5 ? 1 : 0;
            if (pred == test_y[i]) ++correct;
        }
        test_accuracy = static_cast<double>(correct) / static_cast<double>(test_x.rows());
    }

    std::vector<int> auc_labels(test_y.size());
    for (std::size_t i = 0; i < test_y.size(); ++i) auc_labels[i] = static_cast<int>(test_y[i]);

    DiscriminatorReport rep;
    rep.accuracy = test_accuracy;
    rep.auc = roc_auc(test_scores, auc_labels);
    rep.a_proxy = a_proxy_from_error(1.0 - rep.accuracy);
    return rep;
}

Matrix rotate_grid_features(const Matrix& features, int turns) {
    const std::size_t d = features.cols();
    const auto side = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(d))));
    if (side * side != d)
        throw DataError("rotation requires a square feature grid (got " + std::to_string(d) +
                        " dimensions)");
    turns = ((turns % 4) + 4) % 4;
    Matrix out(features.rows(), d);
    for (std::size_t i = 0; i < features.rows(); ++i) {
        const auto src = features.row(i);
        auto dst = out.row(i);
        for (std::size_t r = 0; r < side; ++r)
            for (std::size_t c = 0; c < side; ++c) {
                std::size_t rr = r, cc = c;
                switch (turns) {
                    case 1: rr = c; cc = side - 1 - r; break;          // 90 cw
                    case 2: rr = side - 1 - r; cc = side - 1 - c; break;
                    case 3: rr = side - 1 - c; cc = r; break;           // 270 cw
                    default: break;
                }
                dst[rr * side + cc] = src[r * side + c];
            }
    }
    return out;
}

RotationReport rotation_score(const std::array<Matrix, 4>& base_rotations,
                              const std::array<Matrix, 4>& target_rotations,
                              const RotationConfig& cfg) {
    const std::size_t d = base_rotations[0].cols();
    for (const auto& m : base_rotations) {
        if (m.cols() != d) throw DataError("rotation dimension mismatch");
        if (m.rows() == 0) throw DataError("empty rotation class");
        check_finite(m, "rotation");
    }
    for (const auto& m : target_rotations) {
        if (m.cols() != d) throw DataError("rotation dimension mismatch");
        if (m.rows() == 0) throw DataError("empty rotation class");
        check_finite(m, "rotation");
    }

    // seeded per-class subsample keeps per-pair training affordable
    Rng rng(cfg.seed);
    std::vector<Matrix> train_parts;
    std::vector<ClassId> train_y;
    for (int rot = 0; rot < 4; ++rot) {
        const Matrix& m = base_rotations[rot];
        std::vector<std::size_t> idx(m.rows());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        if (idx.size() > cfg.max_rows_per_class) {
            rng.shuffle(idx);
            idx.resize(cfg.max_rows_per_class);
            std::sort(idx.begin(), idx.end());
        }
        train_parts.push_back(gather_rows(m, idx));
        train_y.insert(train_y.end(), idx.size(), rot);
    }
    Matrix train_x(train_y.size(), d);
    std::size_t at = 0;
    for (const auto& part : train_parts) {
        std::copy(part.values().begin(), part.values().end(), train_x.data() + at * d);
        at += part.rows();
    }

    std::size_t n_test = 0;
    for (const auto& m : target_rotations) n_test += m.rows();
    Matrix test_x(n_test, d);
    std::vector<ClassId> test_y;
    test_y.reserve(n_test);
    at = 0;
    for (int rot = 0; rot < 4; ++rot) {
        const auto& m = target_rotations[rot];
        std::copy(m.values().begin(), m.values().end(), test_x.data() + at * d);
        at += m.rows();
        test_y.insert(test_y.end(), m.rows(), rot);
    }

    if (cfg.standardize) {
        const auto stats = learn::Standardizer::fit(train_x);
        train_x = stats.apply(train_x);
        test_x = stats.apply(test_x);
    }

    learn::LogisticConfig lcfg;
    lcfg.l2 = cfg.l2;
    lcfg.grad_tol = cfg.grad_tol;
    lcfg.max_iter = cfg.max_iter;
    const learn::LinearModel model = learn::fit_logistic(train_x, train_y, lcfg);

    RotationReport rep;
    rep.accuracy = learn::classifier_accuracy(model, test_x, test_y);

    const Matrix probs = learn::predict_proba(model, test_x);
    double auc_sum = 0.0;
    for (int rot = 0; rot < 4; ++rot) {
        std::vector<double> scores(n_test);
        std::vector<int> labels(n_test);
        const std::size_t col = static_cast<std::size_t>(model.classes.index_of(rot));
        for (std::size_t i = 0; i < n_test; ++i) {
            scores[i] = probs(i, col);
            labels[i] = test_y[i] == rot ? 1 : 0;
        }
        auc_sum += roc_auc(scores, labels);
    }
    rep.auc = auc_sum / 4.0;
    return rep;
}

} // namespace dsg::distances
