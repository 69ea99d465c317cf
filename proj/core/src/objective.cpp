#include "mvdnmf/objective.hpp"

#include <algorithm>
#include <cmath>

#include "mvdnmf/errors.hpp"

namespace mvdnmf::objective {

namespace {

constexpr double kProbFloor = 1e-15;

// Row sums of [w_cd[v] w_sd[v]]; the discriminative basis mass per
// feature, shared by the orthogonality value and its gradient.
Vector discriminative_row_sums(const FactorModel& model, int v) {
    const Matrix& wcd = model.w_cd[v];
    const Matrix& wsd = model.w_sd[v];
    Vector s = Vector::Zero(wcd.rows());
    if (wcd.cols() > 0) s += wcd.rowwise().sum();
    if (wsd.cols() > 0) s += wsd.rowwise().sum();
    return s;
}

double entry_sum(const Matrix& m) { return m.size() == 0 ? 0.0 : m.sum(); }

// Gradient of the unweighted label term with respect to one coefficient
// or projection block. Shared blocks accumulate over all views.
Matrix label_grad_block(const FactorModel& model, const MultiViewDataset& dataset,
                        LossMode mode, BlockRef block) {
    const int n_v = model.num_views();
    switch (block.kind) {
        case BlockKind::HCD: {
            Matrix g = Matrix::Zero(model.h_cd.rows(), model.h_cd.cols());
            for (int v = 0; v < n_v; ++v)
                g += label_grad_logits(model, dataset, v, mode).transpose() * model.b_cd;
            return g;
        }
        case BlockKind::HSD:
            return label_grad_logits(model, dataset, block.view, mode).transpose() *
                   model.b_sd[block.view];
        case BlockKind::BCD: {
            Matrix g = Matrix::Zero(model.b_cd.rows(), model.b_cd.cols());
            for (int v = 0; v < n_v; ++v)
                g += label_grad_logits(model, dataset, v, mode) * model.h_cd;
            return g;
        }
        case BlockKind::BSD:
            return label_grad_logits(model, dataset, block.view, mode) *
                   model.h_sd[block.view];
        default:
            return Matrix();
    }
}

}  // namespace

const char* block_kind_name(BlockKind kind) {
    switch (kind) {
        case BlockKind::WCD: return "w_cd";
        case BlockKind::WCN: return "w_cn";
        case BlockKind::WSD: return "w_sd";
        case BlockKind::WSN: return "w_sn";
        case BlockKind::HCD: return "h_cd";
        case BlockKind::HCN: return "h_cn";
        case BlockKind::HSD: return "h_sd";
        case BlockKind::HSN: return "h_sn";
        case BlockKind::BCD: return "b_cd";
        case BlockKind::BSD: return "b_sd";
    }
    return "?";
}

bool is_shared_block(BlockKind kind) {
    return kind == BlockKind::HCD || kind == BlockKind::HCN || kind == BlockKind::BCD;
}

Matrix residual(const FactorModel& model, const MultiViewDataset& dataset, int v) {
    const Matrix& x = dataset.views[v];
    if (model.w_cd[v].rows() != x.rows() || model.h_cd.rows() != x.cols())
        throw DataError("residual: model/dataset dimension mismatch for view " +
                        std::to_string(v));
    Matrix r = x;
    if (model.dims.k1 > 0) r.noalias() -= model.w_cd[v] * model.h_cd.transpose();
    if (model.dims.k2 > 0) r.noalias() -= model.w_cn[v] * model.h_cn.transpose();
    if (model.dims.k3 > 0) r.noalias() -= model.w_sd[v] * model.h_sd[v].transpose();
    if (model.dims.k4 > 0) r.noalias() -= model.w_sn[v] * model.h_sn[v].transpose();
    return r;
}

double reconstruction_term(const FactorModel& model, const MultiViewDataset& dataset,
                           int v) {
    return residual(model, dataset, v).squaredNorm();
}

Matrix softmax_logits(const FactorModel& model, int v) {
    const int c = model.num_classes;
    const int n = model.num_instances();
    Matrix z = Matrix::Zero(c, n);
    if (model.dims.k1 > 0) z.noalias() += model.b_cd * model.h_cd.transpose();
    if (model.dims.k3 > 0) z.noalias() += model.b_sd[v] * model.h_sd[v].transpose();
    return z;
}

Matrix softmax_columns(const Matrix& z) {
    // scalar std::exp so saturated logits underflow to exact zeros
    Matrix p(z.rows(), z.cols());
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
        const double zmax = z.col(j).maxCoeff();
        double sum = 0;
        for (Eigen::Index i = 0; i < z.rows(); ++i) {
            p(i, j) = std::exp(z(i, j) - zmax);
            sum += p(i, j);
        }
        p.col(j) /= sum;
    }
    return p;
}

SoftmaxOutput softmax_output(const FactorModel& model, int v) {
    SoftmaxOutput out;
    out.logits = softmax_logits(model, v);
    out.probs = softmax_columns(out.logits);
    return out;
}

double cross_entropy(const Matrix& probs, const std::vector<int>& labels) {
    double loss = 0;
    for (Eigen::Index j = 0; j < probs.cols(); ++j) {
        const int label = labels[j];
        if (label < 0) continue;
        loss -= std::log(std::max(probs(label, j), kProbFloor));
    }
    return loss;
}

double orthogonality_penalty(const FactorModel& model, int v) {
    return discriminative_row_sums(model, v).squaredNorm();
}

double sparsity_penalty(const FactorModel& model) {
    double total = entry_sum(model.h_cd);
    for (const Matrix& h : model.h_sd) total += entry_sum(h);
    return total;
}

Matrix q_matrix(const FactorModel& model, const MultiViewDataset& dataset, int v) {
    Matrix q = softmax_columns(softmax_logits(model, v)) - dataset.one_hot();
    for (Eigen::Index j = 0; j < q.cols(); ++j)
        if (dataset.labels[j] == kUnlabeled) q.col(j).setZero();
    return q;
}

Matrix label_grad_logits(const FactorModel& model, const MultiViewDataset& dataset,
                         int v, LossMode mode) {
    if (mode == LossMode::CrossEntropy) return q_matrix(model, dataset, v);
    Matrix g = 2.0 * (softmax_logits(model, v) - dataset.one_hot());
    for (Eigen::Index j = 0; j < g.cols(); ++j)
        if (dataset.labels[j] == kUnlabeled) g.col(j).setZero();
    return g;
}

double label_loss_term(const FactorModel& model, const MultiViewDataset& dataset,
                       int v, LossMode mode) {
    const Matrix z = softmax_logits(model, v);
    if (mode == LossMode::CrossEntropy)
        return cross_entropy(softmax_columns(z), dataset.labels);
    const Matrix y = dataset.one_hot();
    double loss = 0;
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
        if (dataset.labels[j] == kUnlabeled) continue;
        loss += (y.col(j) - z.col(j)).squaredNorm();
    }
    return loss;
}

Matrix ce_grad_h_block(const FactorModel& model, const MultiViewDataset& dataset,
                       double gamma, BlockRef block) {
    if (block.kind != BlockKind::HCD && block.kind != BlockKind::HSD)
        throw DataError("ce_grad_h_block expects HCD or HSD");
    if (gamma == 0.0) {
        const Matrix& h =
            block.kind == BlockKind::HCD ? model.h_cd : model.h_sd[block.view];
        return Matrix::Zero(h.rows(), h.cols());
    }
    return gamma * label_grad_block(model, dataset, LossMode::CrossEntropy, block);
}

ObjectiveBreakdown total_objective(const FactorModel& model,
                                   const MultiViewDataset& dataset,
                                   const Hyperparams& hp) {
    return combine(compute_terms(model, dataset, hp.loss), hp);
}

TermCache compute_terms(const FactorModel& model, const MultiViewDataset& dataset,
                        LossMode mode) {
    TermCache cache;
    const int n_v = model.num_views();
    cache.recon.resize(n_v);
    cache.orth.resize(n_v);
    cache.label.resize(n_v);
    for (int v = 0; v < n_v; ++v) {
        cache.recon[v] = reconstruction_term(model, dataset, v);
        cache.orth[v] = orthogonality_penalty(model, v);
        cache.label[v] = label_loss_term(model, dataset, v, mode);
    }
    cache.sparsity = sparsity_penalty(model);
    return cache;
}

ObjectiveBreakdown combine(const TermCache& terms, const Hyperparams& hp) {
    ObjectiveBreakdown b;
    for (double r : terms.recon) b.reconstruction += r;
    for (double o : terms.orth) b.orthogonality += o;
    for (double l : terms.label) b.label_loss += l;
    b.sparsity = terms.sparsity;
    b.total = b.reconstruction + hp.alpha * b.orthogonality +
              hp.beta * b.sparsity + hp.gamma * b.label_loss;
    return b;
}

Matrix gradient(const FactorModel& model, const MultiViewDataset& dataset,
                const Hyperparams& hp, BlockRef block) {
    const int v = block.view;
    switch (block.kind) {
        case BlockKind::WCD: {
            Matrix g = -2.0 * residual(model, dataset, v) * model.h_cd;
            if (hp.alpha != 0.0 && model.dims.k1 > 0)
                g += (2.0 * hp.alpha) * discriminative_row_sums(model, v) *
                     Eigen::RowVectorXd::Ones(model.dims.k1);
            return g;
        }
        case BlockKind::WCN:
            return -2.0 * residual(model, dataset, v) * model.h_cn;
        case BlockKind::WSD: {
            Matrix g = -2.0 * residual(model, dataset, v) * model.h_sd[v];
            if (hp.alpha != 0.0 && model.dims.k3 > 0)
                g += (2.0 * hp.alpha) * discriminative_row_sums(model, v) *
                     Eigen::RowVectorXd::Ones(model.dims.k3);
            return g;
        }
        case BlockKind::WSN:
            return -2.0 * residual(model, dataset, v) * model.h_sn[v];
        case BlockKind::HCD: {
            Matrix g = Matrix::Zero(model.h_cd.rows(), model.h_cd.cols());
            for (int u = 0; u < model.num_views(); ++u)
                g.noalias() -= 2.0 * residual(model, dataset, u).transpose() * model.w_cd[u];
            g.array() += hp.beta;
            if (hp.gamma != 0.0)
                g += hp.gamma * label_grad_block(model, dataset, hp.loss, block);
            return g;
        }
        case BlockKind::HCN: {
            Matrix g = Matrix::Zero(model.h_cn.rows(), model.h_cn.cols());
            for (int u = 0; u < model.num_views(); ++u)
                g.noalias() -= 2.0 * residual(model, dataset, u).transpose() * model.w_cn[u];
            return g;
        }
        case BlockKind::HSD: {
            Matrix g = -2.0 * residual(model, dataset, v).transpose() * model.w_sd[v];
            g.array() += hp.beta;
            if (hp.gamma != 0.0)
                g += hp.gamma * label_grad_block(model, dataset, hp.loss, block);
            return g;
        }
        case BlockKind::HSN:
            return -2.0 * residual(model, dataset, v).transpose() * model.w_sn[v];
        case BlockKind::BCD:
        case BlockKind::BSD:
            return hp.gamma * label_grad_block(model, dataset, hp.loss, block);
    }
    throw DataError("gradient: unknown block");
}

}  // namespace mvdnmf::objective
