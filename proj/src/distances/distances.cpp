#include "dsg/distances/distances.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dsg/distances/linalg.hpp"
#include "dsg/error.hpp"
#include "dsg/kernels/kernels.hpp"

namespace dsg::distances {

GaussianSummary gaussian_summary(const Matrix& features) {
    const std::size_t n = features.rows();
    const std::size_t d = features.cols();
    if (n < 2) throw DataError("need at least two samples");
    if (d < 1) throw DataError("need at least one feature dimension");

    GaussianSummary g;
    g.n = n;
    g.mean.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        kernels::axpy(1.0, features.row(i).data(), g.mean.data(), d);
    kernels::scale(1.0 / static_cast<double>(n), g.mean.data(), d);

    g.cov = Matrix(d, d);
    std::vector<double> dev(d);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = features.row(i);
        for (std::size_t j = 0; j < d; ++j) dev[j] = row[j] - g.mean[j];
        for (std::size_t j = 0; j < d; ++j) {
            if (dev[j] == 0.0) continue;
            kernels::axpy(dev[j], dev.data(), g.cov.row(j).data(), d);
        }
    }
    kernels::scale(1.0 / static_cast<double>(n - 1), g.cov.data(), d * d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j) {
            const double m = 0.5 * (g.cov(i, j) + g.cov(j, i));
            g.cov(i, j) = m;
            g.cov(j, i) = m;
        }
    return g;
}

double frechet(const GaussianSummary& base, const GaussianSummary& target) {
    const std::size_t d = base.mean.size();
    if (target.mean.size() != d) throw DataError("frechet dimension mismatch");

    std::vector<double> diff(d);
    for (std::size_t i = 0; i < d; ++i) diff[i] = base.mean[i] - target.mean[i];
    const double mean_term = kernels::squared_norm(diff.data(), d);

    const Matrix root_b = linalg::matrix_sqrt_psd(base.cov);
    Matrix inner = linalg::matmul(linalg::matmul(root_b, target.cov), root_b);
    // the product is symmetric up to roundoff; make it exact before eigen
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j) {
            const double m = 0.5 * (inner(i, j) + inner(j, i));
            inner(i, j) = m;
            inner(j, i) = m;
        }

    const auto eig = linalg::symmetric_eigen(inner);
    double cross = 0.0;
    for (double lam : eig.values) cross += std::sqrt(std::max(lam, 0.0));

    const double value = mean_term + linalg::trace(base.cov) + linalg::trace(target.cov) -
                         2.0 * cross;
    return std::max(value, 0.0);
}

double frechet(const Matrix& base_features, const Matrix& target_features) {
    if (base_features.cols() != target_features.cols())
        throw DataError("frechet dimension mismatch");
    return frechet(gaussian_summary(base_features), gaussian_summary(target_features));
}

double mmd(const Matrix& base_features, const Matrix& target_features) {
    if (base_features.cols() != target_features.cols())
        throw DataError("mmd dimension mismatch");
    const std::size_t d = base_features.cols();
    if (base_features.rows() == 0 || target_features.rows() == 0)
        throw DataError("mmd of an empty sample");

    std::vector<double> mb(d, 0.0), mt(d, 0.0);
    for (std::size_t i = 0; i < base_features.rows(); ++i)
        kernels::axpy(1.0, base_features.row(i).data(), mb.data(), d);
    kernels::scale(1.0 / static_cast<double>(base_features.rows()), mb.data(), d);
    for (std::size_t i = 0; i < target_features.rows(); ++i)
        kernels::axpy(1.0, target_features.row(i).data(), mt.data(), d);
    kernels::scale(1.0 / static_cast<double>(target_features.rows()), mt.data(), d);

    for (std::size_t i = 0; i < d; ++i) mb[i] -= mt[i];
    return std::sqrt(kernels::squared_norm(mb.data(), d));
}

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) throw DataError("roc_auc size mismatch");
    const std::size_t n = scores.size();
    std::size_t pos = 0;
    for (int y : labels) pos += (y != 0);
    const std::size_t neg = n - pos;
    if (pos == 0 || neg == 0) throw DataError("roc_auc needs both classes present");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // rank-sum with average ranks over tie groups
    double pos_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (std::size_t k = i; k <= j; ++k)
            if (labels[order[k]] != 0) pos_rank_sum += avg_rank;
        i = j + 1;
    }
    const double u = pos_rank_sum - 0.5 * static_cast<double>(pos) * (static_cast<double>(pos) + 1.0);
    return u / (static_cast<double>(pos) * static_cast<double>(neg));
}

} // namespace dsg::distances
