#include "dsg/core/dataset.hpp"

#include <cmath>
#include <utility>

#include "dsg/kernels/kernels.hpp"

namespace dsg {

Dataset::Dataset(std::string name, std::optional<Matrix> features, Matrix probabilities,
                 LabelSpace prob_classes, std::optional<std::vector<ClassId>> labels)
    : name_(std::move(name)),
      features_(std::move(features)),
      probabilities_(std::move(probabilities)),
      prob_classes_(std::move(prob_classes)),
      labels_(std::move(labels)) {
    const std::size_t n = probabilities_.rows();
    const std::size_t k = probabilities_.cols();
    if (n == 0) throw DataError("dataset '" + name_ + "' is empty");
    if (prob_classes_.size() != k)
        throw DataError("dataset '" + name_ + "': prob_classes size " +
                        std::to_string(prob_classes_.size()) + " != probability columns " +
                        std::to_string(k));
    for (std::size_t i = 0; i < n; ++i) {
        auto row = probabilities_.row(i);
        for (double p : row)
            if (!(p >= 0.0))
                throw DataError("dataset '" + name_ + "': negative probability in row " +
                                std::to_string(i));
        const double s = kernels::sum(row.data(), row.size());
        if (std::abs(s - 1.0) > 1e-5)
            throw DataError("dataset '" + name_ + "': probability rows must sum to 1 (row " +
                            std::to_string(i) + " sums to " + std::to_string(s) + ")");
    }
    if (features_ && features_->rows() != n)
        throw DataError("dataset '" + name_ + "': row-count mismatch between features (" +
                        std::to_string(features_->rows()) + ") and probabilities (" +
                        std::to_string(n) + ")");
    if (labels_) {
        if (labels_->size() != n)
            throw DataError("dataset '" + name_ + "': row-count mismatch between labels (" +
                            std::to_string(labels_->size()) + ") and probabilities (" +
                            std::to_string(n) + ")");
        for (ClassId y : *labels_)
            if (!prob_classes_.contains(y))
                throw DataError("dataset '" + name_ + "': label " + std::to_string(y) +
                                " not in declared label universe");
    }
}

const Matrix& Dataset::features() const {
    if (!features_) throw DataError("dataset '" + name_ + "' has no features");
    return *features_;
}

const std::vector<ClassId>& Dataset::labels() const {
    if (!labels_) throw DataError("labels required: dataset '" + name_ + "' is unlabeled");
    return *labels_;
}

DatasetView::DatasetView(const Dataset& source, std::vector<std::size_t> row_index,
                         LabelSpace col_classes)
    : source_(&source), row_index_(std::move(row_index)), col_classes_(std::move(col_classes)) {
    col_positions_.reserve(col_classes_.size());
    for (std::size_t c = 0; c < col_classes_.size(); ++c) {
        const std::ptrdiff_t pos = source_->prob_classes().index_of(col_classes_.at(c));
        if (pos < 0) throw DataError("unknown class in restriction");
        col_positions_.push_back(static_cast<std::size_t>(pos));
    }
}

void DatasetView::copy_prob_row(std::size_t r, std::vector<double>& out) const {
    out.resize(col_positions_.size());
    const auto row = source_->probabilities().row(row_index_[r]);
    for (std::size_t c = 0; c < col_positions_.size(); ++c) out[c] = row[col_positions_[c]];
}

Matrix DatasetView::gather_features() const {
    const Matrix& f = source_->features();
    Matrix out(row_index_.size(), f.cols());
    for (std::size_t r = 0; r < row_index_.size(); ++r) {
        auto src = f.row(row_index_[r]);
        auto dst = out.row(r);
        std::copy(src.begin(), src.end(), dst.begin());
    }
    return out;
}

LabelSpace intersect_labels(const Dataset& base, const Dataset& target) {
    LabelSpace common = intersect(base.prob_classes(), target.prob_classes());
    if (common.empty()) throw DataError("disjoint label spaces");
    return common;
}

DatasetView restrict(const Dataset& d, const LabelSpace& classes) {
    if (classes.empty()) throw DataError("empty label space in restriction");
    if (!classes.is_subset_of(d.prob_classes())) throw DataError("unknown class in restriction");
    std::vector<std::size_t> rows;
    if (d.has_labels()) {
        const auto& y = d.labels();
        for (std::size_t i = 0; i < y.size(); ++i)
            if (classes.contains(y[i])) rows.push_back(i);
        if (rows.empty()) throw DataError("restriction retains no rows");
    } else {
        rows.resize(d.size());
        for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    }
    return DatasetView(d, std::move(rows), classes);
}

ClassId predict_label(std::span<const double> prob_row, const LabelSpace& classes) {
    if (prob_row.empty()) throw DataError("empty probability row");
    if (prob_row.size() != classes.size())
        throw DataError("probability row length does not match label space");
    std::size_t best = 0;
    for (std::size_t i = 1; i < prob_row.size(); ++i)
        if (prob_row[i] > prob_row[best]) best = i;
    return classes.at(best);
}

double accuracy(const DatasetView& view) {
    if (!view.source().has_labels())
        throw DataError("labels required: dataset '" + view.source().name() + "' is unlabeled");
    if (view.rows() == 0) throw DataError("accuracy of an empty view");
    std::size_t correct = 0;
    std::vector<double> row;
    for (std::size_t r = 0; r < view.rows(); ++r) {
        view.copy_prob_row(r, row);
        if (predict_label(row, view.col_classes()) == view.label(r)) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(view.rows());
}

double accuracy_gap(const Dataset& base, const Dataset& target) {
    const LabelSpace common = intersect_labels(base, target);
    return accuracy(restrict(base, common)) - accuracy(restrict(target, common));
}

} // namespace dsg
