#include "oracles.hpp"

#include <cmath>
#include <random>

#include "mvdnmf/errors.hpp"

namespace oracle {

using mvdnmf::kUnlabeled;
using mvdnmf::LossMode;
using mvdnmf::objective::BlockKind;
using mvdnmf::objective::BlockRef;

Terms scalar_terms(const FactorModel& model, const MultiViewDataset& dataset,
                   const Hyperparams& hp) {
    Terms t;
    const int n = dataset.num_instances();
    const int c = dataset.num_classes;
    const auto& d = model.dims;

    for (int v = 0; v < dataset.num_views(); ++v) {
        const Matrix& x = dataset.views[v];
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            for (Eigen::Index j = 0; j < x.cols(); ++j) {
                double r = x(i, j);
                for (int k = 0; k < d.k1; ++k) r -= model.w_cd[v](i, k) * model.h_cd(j, k);
                for (int k = 0; k < d.k2; ++k) r -= model.w_cn[v](i, k) * model.h_cn(j, k);
                for (int k = 0; k < d.k3; ++k)
                    r -= model.w_sd[v](i, k) * model.h_sd[v](j, k);
                for (int k = 0; k < d.k4; ++k)
                    r -= model.w_sn[v](i, k) * model.h_sn[v](j, k);
                t.reconstruction += r * r;
            }
        }

        Matrix wd(model.w_cd[v].rows(), d.k1 + d.k3);
        if (d.k1 > 0) wd.leftCols(d.k1) = model.w_cd[v];
        if (d.k3 > 0) wd.rightCols(d.k3) = model.w_sd[v];
        t.orthogonality += gram_l11(wd);

        for (int j = 0; j < n; ++j) {
            const int label = dataset.labels[j];
            if (label == kUnlabeled) continue;
            std::vector<long double> z(c, 0.0L);
            for (int i = 0; i < c; ++i) {
                for (int k = 0; k < d.k1; ++k)
                    z[i] += static_cast<long double>(model.b_cd(i, k)) * model.h_cd(j, k);
                for (int k = 0; k < d.k3; ++k)
                    z[i] += static_cast<long double>(model.b_sd[v](i, k)) *
                            model.h_sd[v](j, k);
            }
            if (hp.loss == LossMode::CrossEntropy) {
                long double denom = 0.0L;
                for (int i = 0; i < c; ++i) denom += expl(z[i]);
                const long double p = expl(z[label]) / denom;
                t.label_loss -= static_cast<double>(logl(p));
            } else {
                for (int i = 0; i < c; ++i) {
                    const double y = i == label ? 1.0 : 0.0;
                    const double diff = y - static_cast<double>(z[i]);
                    t.label_loss += diff * diff;
                }
            }
        }
    }

    for (Eigen::Index j = 0; j < model.h_cd.rows(); ++j)
        for (int k = 0; k < d.k1; ++k) t.sparsity += std::fabs(model.h_cd(j, k));
    for (int v = 0; v < dataset.num_views(); ++v)
        for (Eigen::Index j = 0; j < model.h_sd[v].rows(); ++j)
            for (int k = 0; k < d.k3; ++k) t.sparsity += std::fabs(model.h_sd[v](j, k));

    t.total = t.reconstruction + hp.alpha * t.orthogonality + hp.beta * t.sparsity +
              hp.gamma * t.label_loss;
    return t;
}

Matrix outer_product_residual(const FactorModel& model, const MultiViewDataset& dataset,
                              int v) {
    Matrix r = dataset.views[v];
    const auto subtract_outer = [&](const Matrix& w, const Matrix& h) {
        for (Eigen::Index k = 0; k < w.cols(); ++k)
            r -= w.col(k) * h.col(k).transpose();
    };
    subtract_outer(model.w_cd[v], model.h_cd);
    subtract_outer(model.w_cn[v], model.h_cn);
    subtract_outer(model.w_sd[v], model.h_sd[v]);
    subtract_outer(model.w_sn[v], model.h_sn[v]);
    return r;
}

double gram_l11(const Matrix& wd) {
    double total = 0;
    for (Eigen::Index a = 0; a < wd.cols(); ++a) {
        for (Eigen::Index b = 0; b < wd.cols(); ++b) {
            double dot = 0;
            for (Eigen::Index i = 0; i < wd.rows(); ++i) dot += wd(i, a) * wd(i, b);
            total += std::fabs(dot);
        }
    }
    return total;
}

Matrix softmax_longdouble(const Matrix& z) {
    Matrix p(z.rows(), z.cols());
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
        long double denom = 0.0L;
        for (Eigen::Index i = 0; i < z.rows(); ++i)
            denom += expl(static_cast<long double>(z(i, j)));
        for (Eigen::Index i = 0; i < z.rows(); ++i)
            p(i, j) = static_cast<double>(expl(static_cast<long double>(z(i, j))) / denom);
    }
    return p;
}

Matrix& block_of(FactorModel& model, BlockRef block) {
    switch (block.kind) {
        case BlockKind::WCD: return model.w_cd[block.view];
        case BlockKind::WCN: return model.w_cn[block.view];
        case BlockKind::WSD: return model.w_sd[block.view];
        case BlockKind::WSN: return model.w_sn[block.view];
        case BlockKind::HCD: return model.h_cd;
        case BlockKind::HCN: return model.h_cn;
        case BlockKind::HSD: return model.h_sd[block.view];
        case BlockKind::HSN: return model.h_sn[block.view];
        case BlockKind::BCD: return model.b_cd;
        case BlockKind::BSD: return model.b_sd[block.view];
    }
    throw mvdnmf::DataError("unknown block");
}

Matrix fd_gradient(const FactorModel& model, const MultiViewDataset& dataset,
                   const Hyperparams& hp, BlockRef block, double step) {
    FactorModel work = model;
    Matrix& target = block_of(work, block);
    Matrix grad(target.rows(), target.cols());
    for (Eigen::Index i = 0; i < target.rows(); ++i) {
        for (Eigen::Index j = 0; j < target.cols(); ++j) {
            const double saved = target(i, j);
            target(i, j) = saved + step;
            const double up = mvdnmf::objective::total_objective(work, dataset, hp).total;
            target(i, j) = saved - step;
            const double down =
                mvdnmf::objective::total_objective(work, dataset, hp).total;
            target(i, j) = saved;
            grad(i, j) = (up - down) / (2.0 * step);
        }
    }
    return grad;
}

Matrix fd_ce_gradient(const FactorModel& model, const MultiViewDataset& dataset,
                      double gamma, BlockRef block, double step) {
    FactorModel work = model;
    Matrix& target = block_of(work, block);
    const auto ce_term = [&]() {
        double loss = 0;
        for (int v = 0; v < work.num_views(); ++v)
            loss += mvdnmf::objective::cross_entropy(
                mvdnmf::objective::softmax_columns(
                    mvdnmf::objective::softmax_logits(work, v)),
                dataset.labels);
        return gamma * loss;
    };
    Matrix grad(target.rows(), target.cols());
    for (Eigen::Index i = 0; i < target.rows(); ++i) {
        for (Eigen::Index j = 0; j < target.cols(); ++j) {
            const double saved = target(i, j);
            target(i, j) = saved + step;
            const double up = ce_term();
            target(i, j) = saved - step;
            const double down = ce_term();
            target(i, j) = saved;
            grad(i, j) = (up - down) / (2.0 * step);
        }
    }
    return grad;
}

Matrix ridge_qr(const Matrix& target, const Matrix& h, double lambda) {
    const Eigen::Index k = h.cols();
    Matrix augmented(h.rows() + k, k);
    augmented.topRows(h.rows()) = h;
    augmented.bottomRows(k) = std::sqrt(lambda) * Matrix::Identity(k, k);
    Matrix b(target.rows(), k);
    for (Eigen::Index i = 0; i < target.rows(); ++i) {
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(h.rows() + k);
        rhs.head(h.rows()) = target.row(i).transpose();
        b.row(i) = augmented.colPivHouseholderQr().solve(rhs).transpose();
    }
    return b;
}

double max_rel_gradient_error(const Matrix& analytic, const Matrix& fd) {
    double worst = 0;
    for (Eigen::Index i = 0; i < analytic.rows(); ++i) {
        for (Eigen::Index j = 0; j < analytic.cols(); ++j) {
            const double denom =
                std::max({1.0, std::fabs(analytic(i, j)), std::fabs(fd(i, j))});
            worst = std::max(worst, std::fabs(analytic(i, j) - fd(i, j)) / denom);
        }
    }
    return worst;
}

MultiViewDataset random_dataset(int n, int c, const std::vector<int>& feature_dims,
                                std::uint64_t seed, double unlabeled_fraction) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    MultiViewDataset dataset;
    dataset.num_classes = c;
    for (int m : feature_dims) {
        Matrix x(m, n);
        for (Eigen::Index j = 0; j < x.cols(); ++j)
            for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, j) = unit(rng);
        dataset.views.push_back(std::move(x));
    }
    dataset.labels.resize(n);
    for (int j = 0; j < n; ++j) dataset.labels[j] = j % c;  // every class present
    for (int j = 0; j < n; ++j)
        if (j >= c && unit(rng) < unlabeled_fraction) dataset.labels[j] = kUnlabeled;
    return dataset;
}

void randomize_b(FactorModel& model, std::uint64_t seed, double scale) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> sym(-scale, scale);
    for (Eigen::Index j = 0; j < model.b_cd.cols(); ++j)
        for (Eigen::Index i = 0; i < model.b_cd.rows(); ++i) model.b_cd(i, j) = sym(rng);
    for (Matrix& b : model.b_sd)
        for (Eigen::Index j = 0; j < b.cols(); ++j)
            for (Eigen::Index i = 0; i < b.rows(); ++i) b(i, j) = sym(rng);
}

}  // namespace oracle
