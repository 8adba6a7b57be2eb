#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dsg/core/label_space.hpp"
#include "dsg/matrix.hpp"

namespace dsg {

/// One dumped classifier run over one data distribution: per-instance output
/// probabilities over a declared class-id universe, plus optional raw features
/// and optional ground-truth labels. Immutable after construction; the
/// constructor validates every structural invariant.
class Dataset {
public:
    Dataset(std::string name, std::optional<Matrix> features, Matrix probabilities,
            LabelSpace prob_classes, std::optional<std::vector<ClassId>> labels);

    const std::string& name() const { return name_; }
    bool has_features() const { return features_.has_value(); }
    const Matrix& features() const;
    const Matrix& probabilities() const { return probabilities_; }
    const LabelSpace& prob_classes() const { return prob_classes_; }
    bool has_labels() const { return labels_.has_value(); }
    const std::vector<ClassId>& labels() const;

    std::size_t size() const { return probabilities_.rows(); }
    std::size_t num_classes() const { return prob_classes_.size(); }

private:
    std::string name_;
    std::optional<Matrix> features_;
    Matrix probabilities_;
    LabelSpace prob_classes_;
    std::optional<std::vector<ClassId>> labels_;
};

/// Read-only restriction of a Dataset to a row subset and a class-column
/// subset. Probability columns are the raw source values; they are never
/// renormalized, so a max over the retained columns is a max over the raw
/// outputs of the retained classes.
class DatasetView {
public:
    DatasetView(const Dataset& source, std::vector<std::size_t> row_index, LabelSpace col_classes);

    const Dataset& source() const { return *source_; }
    std::size_t rows() const { return row_index_.size(); }
    std::size_t cols() const { return col_classes_.size(); }
    const LabelSpace& col_classes() const { return col_classes_; }
    const std::vector<std::size_t>& row_index() const { return row_index_; }

    double prob(std::size_t r, std::size_t c) const {
        return source_->probabilities()(row_index_[r], col_positions_[c]);
    }

    /// Copies the retained probability entries of view-row r into out.
    void copy_prob_row(std::size_t r, std::vector<double>& out) const;

    ClassId label(std::size_t r) const { return source_->labels()[row_index_[r]]; }

    std::span<const double> feature_row(std::size_t r) const {
        return source_->features().row(row_index_[r]);
    }

    /// Dense copy of the retained feature rows.
    Matrix gather_features() const;

private:
    const Dataset* source_;
    std::vector<std::size_t> row_index_;
    LabelSpace col_classes_;
    std::vector<std::size_t> col_positions_; // column index into source probabilities
};

/// Sorted intersection of the two declared label universes.
/// Throws DataError("disjoint label spaces") when empty.
LabelSpace intersect_labels(const Dataset& base, const Dataset& target);

/// View retaining exactly the rows whose label lies in `classes` (all rows for
/// unlabeled datasets) and exactly the probability columns of `classes`.
DatasetView restrict(const Dataset& d, const LabelSpace& classes);

/// Class id at the maximal probability; ties break toward the lowest id.
ClassId predict_label(std::span<const double> prob_row, const LabelSpace& classes);

/// Fraction of retained rows whose argmax over the view's columns equals the
/// true label. Requires labels and a non-empty view.
double accuracy(const DatasetView& view);

/// Acc(base | intersection) - Acc(target | intersection). Positive when the
/// model degrades on the target.
double accuracy_gap(const Dataset& base, const Dataset& target);

} // namespace dsg
