#include "dsg/confidence/confidence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dsg/kernels/kernels.hpp"

namespace dsg::confidence {

namespace {

constexpr double kProbFloor = 1e-12;

/// -sum p ln p with 0 ln 0 := 0.
double entropy(std::span<const double> p) {
    double h = 0.0;
    for (double v : p)
        if (v > 0.0) h -= v * std::log(v);
    return h;
}

/// softmax(log p / T) into out; preserves the argmax for any T > 0.
void temper_row(std::span<const double> p, double t, std::vector<double>& out) {
    out.resize(p.size());
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < p.size(); ++i) {
        out[i] = std::log(std::max(p[i], kProbFloor)) / t;
        m = std::max(m, out[i]);
    }
    double s = 0.0;
    for (double& v : out) {
        v = std::exp(v - m);
        s += v;
    }
    kernels::scale(1.0 / s, out.data(), out.size());
}

} // namespace

ConfidenceSummary summarize(const DatasetView& view) {
    if (view.rows() == 0) throw DataError("summarize on an empty view");
    ConfidenceSummary s;
    s.n = view.rows();
    s.label_space = view.col_classes();
    std::vector<double> row;
    double conf = 0.0, ent = 0.0;
    for (std::size_t r = 0; r < view.rows(); ++r) {
        view.copy_prob_row(r, row);
        conf += kernels::max_value(row.data(), row.size());
        ent += entropy(row);
    }
    s.avg_confidence = conf / static_cast<double>(s.n);
    s.avg_entropy = ent / static_cast<double>(s.n);
    return s;
}

double doc(const Dataset& base, const Dataset& target) {
    const LabelSpace common = intersect_labels(base, target);
    return summarize(restrict(base, common)).avg_confidence -
           summarize(restrict(target, common)).avg_confidence;
}

double doe(const Dataset& base, const Dataset& target) {
    const LabelSpace common = intersect_labels(base, target);
    return summarize(restrict(base, common)).avg_entropy -
           summarize(restrict(target, common)).avg_entropy;
}

double doc_feat_predict(double base_acc, double doc_value) {
    if (base_acc < 0.0 || base_acc > 1.0) throw DataError("base accuracy outside [0,1]");
    return std::clamp(base_acc - doc_value, 0.0, 1.0);
}

double temperature_nll(const DatasetView& view, Temperature t) {
    if (!(t.t > 0.0) || !std::isfinite(t.t)) throw DataError("temperature must be positive");
    if (!view.source().has_labels())
        throw DataError("labels required: temperature fitting needs ground truth");
    std::vector<double> row, scaled;
    double nll = 0.0;
    for (std::size_t r = 0; r < view.rows(); ++r) {
        view.copy_prob_row(r, row);
        temper_row(row, t.t, scaled);
        const std::ptrdiff_t c = view.col_classes().index_of(view.label(r));
        if (c < 0) throw DataError("label outside view columns");
        nll -= std::log(std::max(scaled[static_cast<std::size_t>(c)], kProbFloor));
    }
    return nll / static_cast<double>(view.rows());
}

Temperature fit_temperature(const DatasetView& view) {
    if (view.rows() == 0) throw DataError("fit_temperature on an empty view");
    if (view.cols() < 2) throw DataError("fit_temperature needs at least two classes");

    auto nll_at = [&](double t) { return temperature_nll(view, Temperature{t}); };

    constexpr double lo = 0.05, hi = 20.0;
    constexpr int grid_steps = 61;
    double best_t = 1.0;
    double best_f = nll_at(1.0); // T = 1 is always a candidate
    const double ratio = std::pow(hi / lo, 1.0 / (grid_steps - 1));
    double prev_t = lo;
    double bracket_lo = lo, bracket_hi = hi;
    for (int i = 0; i < grid_steps; ++i) {
        const double t = lo * std::pow(ratio, i);
        const double f = nll_at(t);
        if (f < best_f) {
            best_f = f;
            best_t = t;
            bracket_lo = prev_t;
            bracket_hi = std::min(t * ratio, hi);
        }
        prev_t = t;
    }

    // golden-section refinement inside the bracketing interval
    constexpr double inv_phi = 0.6180339887498949;
    double a = bracket_lo, b = bracket_hi;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = nll_at(x1), f2 = nll_at(x2);
    while (b - a > 1e-4) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = nll_at(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = nll_at(x2);
        }
    }
    const double refined = f1 <= f2 ? x1 : x2;
    const double refined_f = std::min(f1, f2);
    if (refined_f < best_f) {
        best_f = refined_f;
        best_t = refined;
    }
    return Temperature{best_t};
}

Dataset apply_temperature(const Dataset& d, Temperature t) {
    if (!(t.t > 0.0) || !std::isfinite(t.t)) throw DataError("temperature must be positive");
    const Matrix& p = d.probabilities();
    Matrix out(p.rows(), p.cols());
    std::vector<double> scaled;
    for (std::size_t r = 0; r < p.rows(); ++r) {
        temper_row(p.row(r), t.t, scaled);
        std::copy(scaled.begin(), scaled.end(), out.row(r).begin());
    }
    std::optional<Matrix> feats;
    if (d.has_features()) feats = d.features();
    std::optional<std::vector<ClassId>> labels;
    if (d.has_labels()) labels = d.labels();
    return Dataset(d.name(), std::move(feats), std::move(out), d.prob_classes(),
                   std::move(labels));
}

} // namespace dsg::confidence
