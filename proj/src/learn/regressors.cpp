#include "dsg/learn/regressors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dsg/distances/linalg.hpp"
#include "dsg/error.hpp"
#include "dsg/kernels/kernels.hpp"
#include "dsg/learn/logistic.hpp"
#include "dsg/rng.hpp"

namespace dsg::learn {

double LinearRegressor::predict(std::span<const double> s) const {
    if (s.size() != weights.size()) throw DataError("regressor dimension mismatch");
    return kernels::dot(weights.data(), s.data(), s.size()) + bias;
}

LinearRegressor fit_ols(const Matrix& s, const std::vector<double>& g, double ridge) {
    const std::size_t p = s.rows();
    const std::size_t m = s.cols();
    if (p != g.size()) throw DataError("fit_ols row-count mismatch");
    if (p == 0) throw DataError("fit_ols on empty data");
    if (ridge < 0) throw DataError("ridge must be >= 0");
    if (ridge == 0.0 && p < m + 1)
        throw DataError("underdetermined least squares; add points or set ridge > 0");
    for (double v : s.values())
        if (!std::isfinite(v)) throw DataError("non-finite feature value");

    // normal equations over [weights; bias], ridge on weights only
    Matrix a(m + 1, m + 1);
    std::vector<double> rhs(m + 1, 0.0);
    for (std::size_t i = 0; i < p; ++i) {
        const auto xi = s.row(i);
        for (std::size_t r = 0; r < m; ++r) {
            kernels::axpy(xi[r], xi.data(), a.row(r).data(), m);
            a(r, m) += xi[r];
            rhs[r] += xi[r] * g[i];
        }
        rhs[m] += g[i];
    }
    for (std::size_t r = 0; r < m; ++r) {
        a(r, r) += ridge;
        a(m, r) = a(r, m);
    }
    a(m, m) = static_cast<double>(p);

    std::vector<double> sol;
    try {
        sol = linalg::solve_linear(std::move(a), std::move(rhs));
    } catch (const DataError&) {
        throw DataError("singular least-squares system; use ridge > 0");
    }

    LinearRegressor out;
    out.weights.assign(sol.begin(), sol.begin() + static_cast<std::ptrdiff_t>(m));
    out.bias = sol[m];
    return out;
}

MlpRegressor MlpRegressor::init(std::size_t input_dim, std::uint64_t seed) {
    MlpRegressor mlp;
    const std::size_t sizes[] = {input_dim, kHidden0, kHidden1, kHidden2, 1};
    Rng rng(seed);
    for (int l = 0; l < 4; ++l) {
        const std::size_t in = sizes[l];
        const std::size_t out = sizes[l + 1];
        Matrix w(out, in);
        const double limit = 1.0 / std::sqrt(static_cast<double>(in));
        for (std::size_t i = 0; i < out; ++i)
            for (std::size_t j = 0; j < in; ++j)
                w(i, j) = (2.0 * rng.uniform() - 1.0) * limit;
        mlp.w.push_back(std::move(w));
        mlp.b.emplace_back(out, 0.0);
    }
    mlp.in_shift.assign(input_dim, 0.0);
    mlp.in_scale.assign(input_dim, 1.0);
    return mlp;
}

namespace {

void forward_layers(const MlpRegressor& m, std::span<const double> x,
                    std::vector<std::vector<double>>& act) {
    act.resize(5);
    act[0].assign(x.begin(), x.end());
    for (int l = 0; l < 4; ++l) {
        const Matrix& w = m.w[l];
        act[l + 1].resize(w.rows());
        for (std::size_t i = 0; i < w.rows(); ++i) {
            double z = kernels::dot(w.row(i).data(), act[l].data(), w.cols()) + m.b[l][i];
            if (l < 3 && z < 0.0) z = 0.0;
            act[l + 1][i] = z;
        }
    }
}

} // namespace

double MlpRegressor::forward(std::span<const double> normalized) const {
    thread_local std::vector<std::vector<double>> act;
    forward_layers(*this, normalized, act);
    return act[4][0];
}

double MlpRegressor::predict(std::span<const double> s) const {
    if (s.size() != in_shift.size()) throw DataError("regressor dimension mismatch");
    std::vector<double> z(s.size());
    for (std::size_t j = 0; j < s.size(); ++j) z[j] = (s[j] - in_shift[j]) * in_scale[j];
    return forward(z) + target_shift;
}

double MlpRegressor::mse_loss_grad(const Matrix& x, const std::vector<double>& t,
                                   std::vector<Matrix>* grad_w,
                                   std::vector<std::vector<double>>* grad_b) const {
    const std::size_t n = x.rows();
    if (n != t.size()) throw DataError("mse_loss_grad row-count mismatch");
    if (grad_w) {
        grad_w->clear();
        grad_b->clear();
        for (int l = 0; l < 4; ++l) {
            grad_w->emplace_back(w[l].rows(), w[l].cols());
            grad_b->emplace_back(w[l].rows(), 0.0);
        }
    }

    const double inv_n = 1.0 / static_cast<double>(n);
    double mse = 0.0;
    std::vector<std::vector<double>> act;
    std::vector<double> delta, next_delta;
    for (std::size_t i = 0; i < n; ++i) {
        forward_layers(*this, x.row(i), act);
        const double resid = act[4][0] - t[i];
        mse += resid * resid * inv_n;
        if (!grad_w) continue;

        delta.assign(1, 2.0 * resid * inv_n);
        for (int l = 3; l >= 0; --l) {
            Matrix& gw = (*grad_w)[l];
            auto& gb = (*grad_b)[l];
            for (std::size_t j = 0; j < delta.size(); ++j) {
                gb[j] += delta[j];
                if (delta[j] != 0.0)
                    kernels::axpy(delta[j], act[l].data(), gw.row(j).data(), gw.cols());
            }
            if (l == 0) break;
            next_delta.assign(w[l].cols(), 0.0);
            for (std::size_t j = 0; j < delta.size(); ++j)
                if (delta[j] != 0.0)
                    kernels::axpy(delta[j], w[l].row(j).data(), next_delta.data(), w[l].cols());
            // rectifier gate of the previous layer
            for (std::size_t j = 0; j < next_delta.size(); ++j)
                if (act[l][j] <= 0.0) next_delta[j] = 0.0;
            delta.swap(next_delta);
        }
    }
    return mse;
}

MlpRegressor fit_mlp_regressor(const Matrix& s, const std::vector<double>& g,
                               const MlpConfig& cfg) {
    const std::size_t p = s.rows();
    const std::size_t m = s.cols();
    if (p != g.size()) throw DataError("fit_mlp_regressor row-count mismatch");
    if (p == 0) throw DataError("fit_mlp_regressor on empty data");
    for (double v : s.values())
        if (!std::isfinite(v)) throw DataError("non-finite feature value");
    for (double v : g)
        if (!std::isfinite(v)) throw DataError("non-finite target value");

    MlpRegressor mlp = MlpRegressor::init(m, cfg.seed);

    const Standardizer std_fit = Standardizer::fit(s);
    mlp.in_shift = std_fit.shift;
    mlp.in_scale = std_fit.scale;
    const Matrix x = std_fit.apply(s);

    mlp.target_shift = kernels::sum(g.data(), p) / static_cast<double>(p);
    std::vector<double> t(p);
    for (std::size_t i = 0; i < p; ++i) t[i] = g[i] - mlp.target_shift;

    std::vector<Matrix> vel_w;
    std::vector<std::vector<double>> vel_b;
    for (int l = 0; l < 4; ++l) {
        vel_w.emplace_back(mlp.w[l].rows(), mlp.w[l].cols());
        vel_b.emplace_back(mlp.w[l].rows(), 0.0);
    }

    Rng shuffle_rng(cfg.seed ^ 0x5eedf00d5eedf00dull);
    std::vector<std::size_t> order(p);
    for (std::size_t i = 0; i < p; ++i) order[i] = i;
    const std::size_t batch = p < cfg.batch_size ? p : cfg.batch_size;

    std::vector<Matrix> gw;
    std::vector<std::vector<double>> gb;
    Matrix xb(batch, m);
    std::vector<double> tb(batch);

    double best = std::numeric_limits<double>::infinity();
    std::size_t best_epoch = 0;

    for (std::size_t epoch = 0; epoch < cfg.max_iter; ++epoch) {
        if (batch < p) shuffle_rng.shuffle(order);
        for (std::size_t start = 0; start < p; start += batch) {
            const std::size_t count = std::min(batch, p - start);
            Matrix* bx = &xb;
            std::vector<double>* bt = &tb;
            Matrix xb_part;
            std::vector<double> tb_part;
            if (count == p && batch == p) {
                bx = const_cast<Matrix*>(&x);
                bt = &t;
            } else {
                if (count != batch) {
                    xb_part = Matrix(count, m);
                    tb_part.resize(count);
                    bx = &xb_part;
                    bt = &tb_part;
                }
                for (std::size_t r = 0; r < count; ++r) {
                    const auto src = x.row(order[start + r]);
                    std::copy(src.begin(), src.end(), bx->row(r).begin());
                    (*bt)[r] = t[order[start + r]];
                }
            }
            mlp.mse_loss_grad(*bx, *bt, &gw, &gb);
            for (int l = 0; l < 4; ++l) {
                const std::size_t nw = gw[l].rows() * gw[l].cols();
                if (cfg.weight_decay > 0.0)
                    kernels::axpy(cfg.weight_decay, mlp.w[l].data(), gw[l].data(), nw);
                kernels::scale(cfg.momentum, vel_w[l].data(), nw);
                kernels::axpy(1.0, gw[l].data(), vel_w[l].data(), nw);
                kernels::axpy(-cfg.learning_rate, vel_w[l].data(), mlp.w[l].data(), nw);

                const std::size_t nb = gb[l].size();
                kernels::scale(cfg.momentum, vel_b[l].data(), nb);
                kernels::axpy(1.0, gb[l].data(), vel_b[l].data(), nb);
                kernels::axpy(-cfg.learning_rate, vel_b[l].data(), mlp.b[l].data(), nb);
            }
        }

        const double mse = mlp.mse_loss_grad(x, t, nullptr, nullptr);
        if (mse < best - cfg.early_stop_tol) {
            best = mse;
            best_epoch = epoch;
        } else if (epoch - best_epoch >= cfg.early_stop_window) {
            break;
        }
    }
    return mlp;
}

} // namespace dsg::learn
