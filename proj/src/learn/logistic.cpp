#include "dsg/learn/logistic.hpp"

#include <algorithm>
#include <cmath>

#include "dsg/error.hpp"
#include "dsg/kernels/kernels.hpp"

namespace dsg::learn {

namespace {

void check_finite(const Matrix& x) {
    for (double v : x.values())
        if (!std::isfinite(v)) throw DataError("non-finite feature value");
}

/// logits for row i into z; returns log-sum-exp of z.
double row_logits_lse(const Matrix& w, const std::vector<double>& b, std::span<const double> xi,
                      std::vector<double>& z) {
    const std::size_t k = w.rows();
    for (std::size_t c = 0; c < k; ++c)
        z[c] = kernels::dot(w.row(c).data(), xi.data(), xi.size()) + b[c];
    const double m = kernels::max_value(z.data(), k);
    double s = 0.0;
    for (std::size_t c = 0; c < k; ++c) s += std::exp(z[c] - m);
    return m + std::log(s);
}

} // namespace

double logistic_loss_grad(const Matrix& w, const std::vector<double>& b, const Matrix& x,
                          const std::vector<std::size_t>& y, double l2, Matrix* gw,
                          std::vector<double>* gb) {
    const std::size_t n = x.rows();
    const std::size_t k = w.rows();
    const double inv_n = 1.0 / static_cast<double>(n);

    if (gw) *gw = Matrix(k, w.cols());
    if (gb) gb->assign(k, 0.0);

    double nll = 0.0;
    std::vector<double> z(k);
    std::vector<double> p(k);
    for (std::size_t i = 0; i < n; ++i) {
        const auto xi = x.row(i);
        const double lse = row_logits_lse(w, b, xi, z);
        nll -= (z[y[i]] - lse);
        if (gw || gb) {
            for (std::size_t c = 0; c < k; ++c) {
                p[c] = std::exp(z[c] - lse);
                const double coef = (p[c] - (c == y[i] ? 1.0 : 0.0)) * inv_n;
                if (gb) (*gb)[c] += coef;
                if (gw) kernels::axpy(coef, xi.data(), gw->row(c).data(), xi.size());
            }
        }
    }
    nll *= inv_n;

    double reg = 0.0;
    if (l2 > 0.0) {
        reg = 0.5 * l2 * kernels::squared_norm(w.data(), k * w.cols());
        if (gw) kernels::axpy(l2, w.data(), gw->data(), k * w.cols());
    }
    return nll + reg;
}

LinearModel fit_logistic(const Matrix& x, const std::vector<ClassId>& y,
                         const LogisticConfig& cfg) {
    if (x.rows() != y.size()) throw DataError("fit_logistic row-count mismatch");
    if (x.rows() == 0) throw DataError("fit_logistic on empty data");
    check_finite(x);

    LabelSpace classes = LabelSpace::from_unsorted(y);
    if (classes.size() < 2) throw DataError("fit_logistic needs at least two classes present");
    const std::size_t k = classes.size();
    const std::size_t d = x.cols();

    std::vector<std::size_t> yidx(y.size());
    for (std::size_t i = 0; i < y.size(); ++i)
        yidx[i] = static_cast<std::size_t>(classes.index_of(y[i]));

    Matrix w(k, d);
    std::vector<double> b(k, 0.0);

    Matrix gw;
    std::vector<double> gb;
    double f = logistic_loss_grad(w, b, x, yidx, cfg.l2, &gw, &gb);
    if (cfg.objective_trace) cfg.objective_trace->push_back(f);

    double step = 1.0;
    Matrix wc(k, d);
    std::vector<double> bc(k);
    // the ridge term adds l2 to the weight-block curvature; precondition that
    // block so huge regularization does not stall the bias updates
    const double w_precond = 1.0 / (1.0 + cfg.l2);
    for (std::size_t iter = 0; iter < cfg.max_iter; ++iter) {
        const double gw2 = kernels::squared_norm(gw.data(), k * d);
        const double gb2 = kernels::squared_norm(gb.data(), k);
        if (std::sqrt(gw2 + gb2) < cfg.grad_tol) break;
        const double descent = w_precond * gw2 + gb2; // <g, d> for the scaled direction

        // Armijo backtracking on f(theta - t d) <= f - 0.5 t <g, d>
        double fc = 0.0;
        bool accepted = false;
        for (int halvings = 0; halvings < 60; ++halvings) {
            wc = w;
            kernels::axpy(-step * w_precond, gw.data(), wc.data(), k * d);
            bc = b;
            kernels::axpy(-step, gb.data(), bc.data(), k);
            fc = logistic_loss_grad(wc, bc, x, yidx, cfg.l2, nullptr, nullptr);
            if (fc <= f - 0.5 * step * descent) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break; // step underflow: numerically converged

        w = std::move(wc);
        b = std::move(bc);
        wc = Matrix(k, d);
        f = logistic_loss_grad(w, b, x, yidx, cfg.l2, &gw, &gb);
        if (cfg.objective_trace) cfg.objective_trace->push_back(f);
        step = std::min(step * 1.5, 1e6);
    }

    return LinearModel{std::move(w), std::move(b), std::move(classes)};
}

Matrix predict_proba(const LinearModel& m, const Matrix& x) {
    if (x.cols() != m.weights.cols()) throw DataError("predict_proba dimension mismatch");
    const std::size_t k = m.weights.rows();
    Matrix out(x.rows(), k);
    std::vector<double> z(k);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const double lse = row_logits_lse(m.weights, m.bias, x.row(i), z);
        auto row = out.row(i);
        double s = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            row[c] = std::exp(z[c] - lse);
            s += row[c];
        }
        kernels::scale(1.0 / s, row.data(), k);
    }
    return out;
}

double mean_nll(const LinearModel& m, const Matrix& x, const std::vector<ClassId>& y) {
    if (x.rows() != y.size()) throw DataError("mean_nll row-count mismatch");
    const std::size_t k = m.weights.rows();
    std::vector<double> z(k);
    double nll = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const double lse = row_logits_lse(m.weights, m.bias, x.row(i), z);
        const std::ptrdiff_t c = m.classes.index_of(y[i]);
        if (c < 0) throw DataError("label outside model classes");
        nll -= (z[static_cast<std::size_t>(c)] - lse);
    }
    return nll / static_cast<double>(x.rows());
}

double classifier_accuracy(const LinearModel& m, const Matrix& x, const std::vector<ClassId>& y) {
    if (x.rows() != y.size()) throw DataError("accuracy row-count mismatch");
    const std::size_t k = m.weights.rows();
    std::vector<double> z(k);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        row_logits_lse(m.weights, m.bias, x.row(i), z);
        std::size_t best = 0;
        for (std::size_t c = 1; c < k; ++c)
            if (z[c] > z[best]) best = c;
        if (m.classes.at(best) == y[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(x.rows());
}

Standardizer Standardizer::fit(const Matrix& x) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    if (n == 0) throw DataError("standardizer on empty sample");
    Standardizer s;
    s.shift.assign(d, 0.0);
    s.scale.assign(d, 1.0);
    for (std::size_t i = 0; i < n; ++i)
        kernels::axpy(1.0, x.row(i).data(), s.shift.data(), d);
    kernels::scale(1.0 / static_cast<double>(n), s.shift.data(), d);
    std::vector<double> var(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = x.row(i);
        for (std::size_t j = 0; j < d; ++j) {
            const double dev = row[j] - s.shift[j];
            var[j] += dev * dev;
        }
    }
    for (std::size_t j = 0; j < d; ++j) {
        const double sd = std::sqrt(var[j] / static_cast<double>(n));
        s.scale[j] = sd > 1e-12 ? 1.0 / sd : 1.0;
    }
    return s;
}

Matrix Standardizer::apply(const Matrix& x) const {
    if (x.cols() != shift.size()) throw DataError("standardizer dimension mismatch");
    Matrix out(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const auto src = x.row(i);
        auto dst = out.row(i);
        for (std::size_t j = 0; j < x.cols(); ++j) dst[j] = (src[j] - shift[j]) * scale[j];
    }
    return out;
}

} // namespace dsg::learn
