#include "mvdnmf/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "mvdnmf/errors.hpp"

namespace mvdnmf {

namespace {

constexpr double kScaleFloor = 1e-8;

// Entries in (0,1] times scale, filled in storage order so the draw
// sequence is reproducible.
void fill_uniform_positive(Matrix& m, std::mt19937_64& rng, double scale) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            m(i, j) = (1.0 - unit(rng)) * scale;
}

double init_scale(double data_mean, int total_factors) {
    return std::max(std::sqrt(data_mean / total_factors), kScaleFloor);
}

void append_entry_violations(const Matrix& m, const std::string& name, bool non_negative,
                             std::vector<Violation>& out) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            const double value = m(i, j);
            if (!std::isfinite(value))
                out.push_back({name, static_cast<int>(i), static_cast<int>(j),
                               "entry is finite"});
            else if (non_negative && value < 0.0)
                out.push_back({name, static_cast<int>(i), static_cast<int>(j),
                               "entry >= 0"});
        }
    }
}

void append_shape_violation(const Matrix& m, const std::string& name,
                            Eigen::Index rows, Eigen::Index cols,
                            std::vector<Violation>& out) {
    if (m.rows() != rows || m.cols() != cols)
        out.push_back({name, -1, -1,
                       "shape " + std::to_string(m.rows()) + "x" +
                           std::to_string(m.cols()) + " != " + std::to_string(rows) +
                           "x" + std::to_string(cols)});
}

}  // namespace

void BlockDims::check() const {
    if (k1 < 0 || k2 < 0 || k3 < 0 || k4 < 0)
        throw DataError("block dims must be non-negative");
    if (k1 + k3 < 1)
        throw DataError("need at least one discriminative factor (k1 + k3 >= 1)");
    if (total() < 1) throw DataError("need at least one factor overall");
}

void Hyperparams::check() const {
    if (alpha < 0) throw DataError("alpha must be >= 0");
    if (beta < 0) throw DataError("beta must be >= 0");
    if (gamma < 0) throw DataError("gamma must be >= 0");
    if (lambda_ridge <= 0) throw DataError("lambda_ridge must be > 0");
    dims.check();
    if (max_iters < 1) throw DataError("max_iters must be >= 1");
    if (rel_tol <= 0) throw DataError("rel_tol must be > 0");
    if (step_shrink <= 0 || step_shrink >= 1)
        throw DataError("step_shrink must lie in (0,1)");
    if (max_backtracks < 1) throw DataError("max_backtracks must be >= 1");
}

std::string Violation::to_string() const {
    std::string s = block;
    if (row >= 0) s += "(" + std::to_string(row) + "," + std::to_string(col) + ")";
    return s + ": " + rule;
}

FactorModel init_model(const MultiViewDataset& dataset, const Hyperparams& hp) {
    dataset.check();
    hp.check();

    const int n = dataset.num_instances();
    const int n_v = dataset.num_views();
    const int c = dataset.num_classes;
    const BlockDims& d = hp.dims;
    const int total = d.total();

    double pooled_sum = 0;
    double pooled_count = 0;
    std::vector<double> view_scale(n_v);
    for (int v = 0; v < n_v; ++v) {
        const Matrix& x = dataset.views[v];
        pooled_sum += x.sum();
        pooled_count += static_cast<double>(x.size());
        view_scale[v] = init_scale(x.mean(), total);
    }
    const double shared_scale = init_scale(pooled_sum / pooled_count, total);

    FactorModel model;
    model.dims = d;
    model.num_classes = c;

    std::mt19937_64 rng(hp.seed);
    for (int v = 0; v < n_v; ++v) {
        const int m_v = dataset.feature_dim(v);
        Matrix wcd(m_v, d.k1), wcn(m_v, d.k2), wsd(m_v, d.k3), wsn(m_v, d.k4);
        fill_uniform_positive(wcd, rng, view_scale[v]);
        fill_uniform_positive(wcn, rng, view_scale[v]);
        fill_uniform_positive(wsd, rng, view_scale[v]);
        fill_uniform_positive(wsn, rng, view_scale[v]);
        model.w_cd.push_back(std::move(wcd));
        model.w_cn.push_back(std::move(wcn));
        model.w_sd.push_back(std::move(wsd));
        model.w_sn.push_back(std::move(wsn));
    }
    model.h_cd.resize(n, d.k1);
    model.h_cn.resize(n, d.k2);
    fill_uniform_positive(model.h_cd, rng, shared_scale);
    fill_uniform_positive(model.h_cn, rng, shared_scale);
    for (int v = 0; v < n_v; ++v) {
        Matrix hsd(n, d.k3), hsn(n, d.k4);
        fill_uniform_positive(hsd, rng, view_scale[v]);
        fill_uniform_positive(hsn, rng, view_scale[v]);
        model.h_sd.push_back(std::move(hsd));
        model.h_sn.push_back(std::move(hsn));
    }
    model.b_cd = Matrix::Zero(c, d.k1);
    for (int v = 0; v < n_v; ++v) model.b_sd.push_back(Matrix::Zero(c, d.k3));
    return model;
}

std::vector<Violation> validate(const FactorModel& model, const MultiViewDataset& dataset) {
    std::vector<Violation> out;
    const int n = dataset.num_instances();
    const int n_v = dataset.num_views();
    const int c = dataset.num_classes;
    const BlockDims& d = model.dims;

    if (model.num_classes != c)
        out.push_back({"model", -1, -1,
                       "num_classes " + std::to_string(model.num_classes) +
                           " != dataset's " + std::to_string(c)});
    const auto expect_views = [&](size_t actual, const std::string& name) {
        if (static_cast<int>(actual) != n_v)
            out.push_back({name, -1, -1,
                           "has " + std::to_string(actual) + " views, expected " +
                               std::to_string(n_v)});
    };
    expect_views(model.w_cd.size(), "w_cd");
    expect_views(model.w_cn.size(), "w_cn");
    expect_views(model.w_sd.size(), "w_sd");
    expect_views(model.w_sn.size(), "w_sn");
    expect_views(model.h_sd.size(), "h_sd");
    expect_views(model.h_sn.size(), "h_sn");
    expect_views(model.b_sd.size(), "b_sd");
    if (!out.empty()) return out;  // per-view checks need matching counts

    for (int v = 0; v < n_v; ++v) {
        const int m_v = dataset.feature_dim(v);
        const std::string sv = "[" + std::to_string(v) + "]";
        append_shape_violation(model.w_cd[v], "w_cd" + sv, m_v, d.k1, out);
        append_shape_violation(model.w_cn[v], "w_cn" + sv, m_v, d.k2, out);
        append_shape_violation(model.w_sd[v], "w_sd" + sv, m_v, d.k3, out);
        append_shape_violation(model.w_sn[v], "w_sn" + sv, m_v, d.k4, out);
        append_shape_violation(model.h_sd[v], "h_sd" + sv, n, d.k3, out);
        append_shape_violation(model.h_sn[v], "h_sn" + sv, n, d.k4, out);
        append_shape_violation(model.b_sd[v], "b_sd" + sv, c, d.k3, out);
    }
    append_shape_violation(model.h_cd, "h_cd", n, d.k1, out);
    append_shape_violation(model.h_cn, "h_cn", n, d.k2, out);
    append_shape_violation(model.b_cd, "b_cd", c, d.k1, out);

    for (int v = 0; v < n_v; ++v) {
        const std::string sv = "[" + std::to_string(v) + "]";
        append_entry_violations(model.w_cd[v], "w_cd" + sv, true, out);
        append_entry_violations(model.w_cn[v], "w_cn" + sv, true, out);
        append_entry_violations(model.w_sd[v], "w_sd" + sv, true, out);
        append_entry_violations(model.w_sn[v], "w_sn" + sv, true, out);
        append_entry_violations(model.h_sd[v], "h_sd" + sv, true, out);
        append_entry_violations(model.h_sn[v], "h_sn" + sv, true, out);
        append_entry_violations(model.b_sd[v], "b_sd" + sv, false, out);
    }
    append_entry_violations(model.h_cd, "h_cd", true, out);
    append_entry_violations(model.h_cn, "h_cn", true, out);
    append_entry_violations(model.b_cd, "b_cd", false, out);
    return out;
}

}  // namespace mvdnmf
