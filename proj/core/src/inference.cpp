#include "mvdnmf/inference.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "mvdnmf/errors.hpp"

namespace mvdnmf {

namespace {

// Same convention as init_model: entries in (0,1] scaled to the data
// magnitude, shared blocks from the pooled mean, per-view blocks from
// the view mean. A zero start is avoided because the sparsity penalty
// would pin discriminative coefficients at the boundary and starve the
// classifier of features.
void seed_coefficients(FactorModel& work, const std::vector<Matrix>& views,
                       std::uint64_t seed) {
    const int total = work.dims.total();
    double pooled_sum = 0;
    double pooled_count = 0;
    std::vector<double> view_scale(views.size());
    for (size_t v = 0; v < views.size(); ++v) {
        pooled_sum += views[v].sum();
        pooled_count += static_cast<double>(views[v].size());
        view_scale[v] = std::max(std::sqrt(views[v].mean() / total), 1e-8);
    }
    const double shared_scale =
        std::max(std::sqrt(pooled_sum / pooled_count / total), 1e-8);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto fill = [&](Matrix& m, double scale) {
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            for (Eigen::Index i = 0; i < m.rows(); ++i)
                m(i, j) = (1.0 - unit(rng)) * scale;
    };
    fill(work.h_cd, shared_scale);
    fill(work.h_cn, shared_scale);
    for (size_t v = 0; v < views.size(); ++v) {
        fill(work.h_sd[v], view_scale[v]);
        fill(work.h_sn[v], view_scale[v]);
    }
}

void check_coeffs(const FactorModel& model, const CoefficientSet& coeffs) {
    const int n_v = model.num_views();
    if (coeffs.num_views() != n_v)
        throw DataError("coefficient set has " + std::to_string(coeffs.num_views()) +
                        " views, model has " + std::to_string(n_v));
    const Eigen::Index n = coeffs.h_cd.rows();
    if (coeffs.h_cd.cols() != model.dims.k1 || coeffs.h_cn.cols() != model.dims.k2)
        throw DataError("coefficient set width does not match model dims");
    for (int v = 0; v < n_v; ++v)
        if (coeffs.h_sd[v].rows() != n || coeffs.h_sd[v].cols() != model.dims.k3 ||
            coeffs.h_sn[v].rows() != n || coeffs.h_sn[v].cols() != model.dims.k4)
            throw DataError("coefficient block of view " + std::to_string(v) +
                            " does not match model dims");
}

}  // namespace

CoefficientSet training_coefficients(const FactorModel& model) {
    return {model.h_cd, model.h_cn, model.h_sd, model.h_sn};
}

Matrix predict_proba(const FactorModel& model, const CoefficientSet& coeffs) {
    check_coeffs(model, coeffs);
    const int c = model.num_classes;
    const Eigen::Index n = coeffs.h_cd.rows();
    const int n_v = model.num_views();
    Matrix probs = Matrix::Zero(c, n);
    for (int v = 0; v < n_v; ++v) {
        Matrix z = Matrix::Zero(c, n);
        if (model.dims.k1 > 0) z.noalias() += model.b_cd * coeffs.h_cd.transpose();
        if (model.dims.k3 > 0) z.noalias() += model.b_sd[v] * coeffs.h_sd[v].transpose();
        probs += objective::softmax_columns(z);
    }
    return probs / static_cast<double>(n_v);
}

std::vector<int> predict_labels(const Matrix& probs) {
    std::vector<int> labels(probs.cols());
    for (Eigen::Index j = 0; j < probs.cols(); ++j) {
        int best = 0;
        for (Eigen::Index i = 1; i < probs.rows(); ++i)
            if (probs(i, j) > probs(best, j)) best = static_cast<int>(i);
        labels[j] = best;
    }
    return labels;
}

std::vector<int> predict_labels(const FactorModel& model, const CoefficientSet& coeffs) {
    return predict_labels(predict_proba(model, coeffs));
}

FoldInResult fold_in(const FactorModel& model, const std::vector<Matrix>& new_views,
                     const Hyperparams& hp) {
    const int n_v = model.num_views();
    if (static_cast<int>(new_views.size()) != n_v)
        throw DataError("fold_in: expected " + std::to_string(n_v) + " views, got " +
                        std::to_string(new_views.size()));
    const Eigen::Index n_new = new_views.empty() ? 0 : new_views.front().cols();
    for (int v = 0; v < n_v; ++v) {
        if (new_views[v].rows() != model.w_cd[v].rows())
            throw DataError("fold_in: view " + std::to_string(v) + " has " +
                            std::to_string(new_views[v].rows()) +
                            " features, model expects " +
                            std::to_string(model.w_cd[v].rows()));
        if (new_views[v].cols() != n_new)
            throw DataError("fold_in: views disagree on the new instance count");
    }

    FoldInResult result;
    if (n_new == 0) {
        result.coefficients.h_cd.resize(0, model.dims.k1);
        result.coefficients.h_cn.resize(0, model.dims.k2);
        result.coefficients.h_sd.assign(n_v, Matrix(0, model.dims.k3));
        result.coefficients.h_sn.assign(n_v, Matrix(0, model.dims.k4));
        result.status = solver::FitStatus::Converged;
        return result;
    }

    // Frozen-basis working model over the new columns. The label and
    // orthogonality terms do not involve the new coefficients, so they
    // are switched off for the descent.
    FactorModel work = model;
    work.h_cd.resize(n_new, model.dims.k1);
    work.h_cn.resize(n_new, model.dims.k2);
    for (int v = 0; v < n_v; ++v) {
        work.h_sd[v].resize(n_new, model.dims.k3);
        work.h_sn[v].resize(n_new, model.dims.k4);
    }
    seed_coefficients(work, new_views, hp.seed);

    MultiViewDataset scratch;
    scratch.views = new_views;
    scratch.labels.assign(n_new, kUnlabeled);
    scratch.num_classes = model.num_classes;
    scratch.check();

    Hyperparams descent = hp;
    descent.dims = model.dims;
    descent.alpha = 0;
    descent.gamma = 0;

    const solver::RefineResult refined =
        solver::refine_coefficients(work, scratch, descent);
    result.coefficients =
        CoefficientSet{std::move(work.h_cd), std::move(work.h_cn),
                       std::move(work.h_sd), std::move(work.h_sn)};
    result.status = refined.status;
    result.iterations = refined.iterations;
    result.final_objective = refined.final_objective;
    return result;
}

Matrix discriminative_features(const FactorModel& model, const CoefficientSet& coeffs) {
    check_coeffs(model, coeffs);
    const Eigen::Index n = coeffs.h_cd.rows();
    const int n_v = model.num_views();
    Matrix features(n, model.dims.k1 + static_cast<Eigen::Index>(n_v) * model.dims.k3);
    Eigen::Index col = 0;
    if (model.dims.k1 > 0) {
        features.middleCols(col, model.dims.k1) = coeffs.h_cd;
        col += model.dims.k1;
    }
    for (int v = 0; v < n_v; ++v) {
        if (model.dims.k3 > 0) {
            features.middleCols(col, model.dims.k3) = coeffs.h_sd[v];
            col += model.dims.k3;
        }
    }
    return features;
}

Matrix discriminative_features(const FactorModel& model) {
    return discriminative_features(model, training_coefficients(model));
}

}  // namespace mvdnmf
