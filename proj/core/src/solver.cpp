#include "mvdnmf/solver.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>

#include "mvdnmf/errors.hpp"

namespace mvdnmf::solver {

namespace {

using objective::BlockKind;
using objective::BlockRef;
using objective::TermCache;

Matrix& block_matrix(FactorModel& model, BlockRef block) {
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
    throw DataError("unknown block kind");
}

// Which cached terms a change to this block invalidates.
struct Affected {
    bool recon_all = false;
    bool recon_view = false;
    bool orth_view = false;
    bool label_all = false;
    bool label_view = false;
    bool sparsity = false;
};

Affected affected_terms(BlockKind kind) {
    switch (kind) {
        case BlockKind::WCD:
        case BlockKind::WSD: return {.recon_view = true, .orth_view = true};
        case BlockKind::WCN:
        case BlockKind::WSN: return {.recon_view = true};
        case BlockKind::HCD:
            return {.recon_all = true, .label_all = true, .sparsity = true};
        case BlockKind::HCN: return {.recon_all = true};
        case BlockKind::HSD:
            return {.recon_view = true, .label_view = true, .sparsity = true};
        case BlockKind::HSN: return {.recon_view = true};
        case BlockKind::BCD: return {.label_all = true};
        case BlockKind::BSD: return {.label_view = true};
    }
    return {};
}

void refresh_terms(TermCache& cache, const FactorModel& model,
                   const MultiViewDataset& dataset, LossMode mode,
                   const Affected& a, int view) {
    const int n_v = model.num_views();
    if (a.recon_all) {
        for (int v = 0; v < n_v; ++v)
            cache.recon[v] = objective::reconstruction_term(model, dataset, v);
    } else if (a.recon_view) {
        cache.recon[view] = objective::reconstruction_term(model, dataset, view);
    }
    if (a.orth_view) cache.orth[view] = objective::orthogonality_penalty(model, view);
    if (a.label_all) {
        for (int v = 0; v < n_v; ++v)
            cache.label[v] = objective::label_loss_term(model, dataset, v, mode);
    } else if (a.label_view) {
        cache.label[view] = objective::label_loss_term(model, dataset, view, mode);
    }
    if (a.sparsity) cache.sparsity = objective::sparsity_penalty(model);
}

// Per-column inverse curvature of the smooth objective terms, used to
// scale the gradient so a unit step approximates an exact coordinate
// minimization. The reconstruction curvature of a basis (coefficient)
// column is twice the squared norm of its coefficient (basis)
// counterpart; the label term adds the projection/coefficient norms.
// Over-estimates only shorten the step; the line search corrects both
// directions.
Matrix preconditioned_direction(const FactorModel& model, const Hyperparams& hp,
                                BlockRef block, const Matrix& grad) {
    const int n_v = model.num_views();
    const int v = block.view;
    Matrix direction = grad;
    for (Eigen::Index t = 0; t < grad.cols(); ++t) {
        double curvature = 0;
        switch (block.kind) {
            case BlockKind::WCD:
                curvature = 2.0 * model.h_cd.col(t).squaredNorm() + 2.0 * hp.alpha;
                break;
            case BlockKind::WCN:
                curvature = 2.0 * model.h_cn.col(t).squaredNorm();
                break;
            case BlockKind::WSD:
                curvature = 2.0 * model.h_sd[v].col(t).squaredNorm() + 2.0 * hp.alpha;
                break;
            case BlockKind::WSN:
                curvature = 2.0 * model.h_sn[v].col(t).squaredNorm();
                break;
            case BlockKind::HCD:
                for (int u = 0; u < n_v; ++u)
                    curvature += 2.0 * model.w_cd[u].col(t).squaredNorm();
                curvature += 2.0 * hp.gamma * n_v * model.b_cd.col(t).squaredNorm();
                break;
            case BlockKind::HCN:
                for (int u = 0; u < n_v; ++u)
                    curvature += 2.0 * model.w_cn[u].col(t).squaredNorm();
                break;
            case BlockKind::HSD:
                curvature = 2.0 * model.w_sd[v].col(t).squaredNorm() +
                            2.0 * hp.gamma * model.b_sd[v].col(t).squaredNorm();
                break;
            case BlockKind::HSN:
                curvature = 2.0 * model.w_sn[v].col(t).squaredNorm();
                break;
            case BlockKind::BCD:
                curvature = 2.0 * hp.gamma * n_v * model.h_cd.col(t).squaredNorm();
                break;
            case BlockKind::BSD:
                curvature = 2.0 * hp.gamma * model.h_sd[v].col(t).squaredNorm();
                break;
        }
        direction.col(t) /= std::max(curvature, 1e-12);
    }
    return direction;
}

// One projected (or free, for B) descent step along the preconditioned
// gradient, with backtracking. The cache must match the model on entry;
// on acceptance both are advanced, otherwise both are left untouched.
StepResult try_gradient_step(FactorModel& model, const MultiViewDataset& dataset,
                             const Hyperparams& hp, BlockRef block,
                             StepPolicy& policy, TermCache& cache, bool project) {
    const double f0 = objective::combine(cache, hp).total;
    Matrix& target = block_matrix(model, block);
    if (target.size() == 0) return {true, 0.0, f0};

    const Matrix direction = preconditioned_direction(
        model, hp, block, objective::gradient(model, dataset, hp, block));
    const Affected a = affected_terms(block.kind);
    double eta = policy.warm_start(block);
    for (int attempt = 0; attempt < policy.max_backtracks; ++attempt) {
        Matrix candidate = target - eta * direction;
        if (project) candidate = candidate.cwiseMax(0.0);
        std::swap(target, candidate);
        TermCache trial = cache;
        refresh_terms(trial, model, dataset, hp.loss, a, block.view);
        const double f1 = objective::combine(trial, hp).total;
        if (f1 <= f0) {
            cache = std::move(trial);
            policy.record(block, eta);
            return {true, eta, f1};
        }
        std::swap(target, candidate);
        eta *= policy.shrink;
    }
    return {false, 0.0, f0};
}

// Projection block update: closed-form ridge solve when it does not
// increase the objective, otherwise a backtracked gradient step.
StepResult try_b_update(FactorModel& model, const MultiViewDataset& dataset,
                        const Hyperparams& hp, BlockRef block, StepPolicy& policy,
                        TermCache& cache) {
    const double f0 = objective::combine(cache, hp).total;
    Matrix& target = block_matrix(model, block);
    if (target.size() == 0) return {true, 0.0, f0};

    Matrix closed = block.kind == BlockKind::BCD
                        ? solve_b_cd(model, dataset, hp)
                        : solve_b_sd(model, dataset, block.view, hp);
    const Affected a = affected_terms(block.kind);
    std::swap(target, closed);
    TermCache trial = cache;
    refresh_terms(trial, model, dataset, hp.loss, a, block.view);
    const double f1 = objective::combine(trial, hp).total;
    if (f1 <= f0) {
        cache = std::move(trial);
        return {true, 0.0, f1};
    }
    std::swap(target, closed);
    return try_gradient_step(model, dataset, hp, block, policy, cache,
                             /*project=*/false);
}

Matrix selected_rows(const Matrix& m, const std::vector<int>& idx) {
    Matrix out(static_cast<Eigen::Index>(idx.size()), m.cols());
    for (int j = 0; j < static_cast<int>(idx.size()); ++j) out.row(j) = m.row(idx[j]);
    return out;
}

Matrix one_hot_columns(const MultiViewDataset& dataset, const std::vector<int>& idx) {
    Matrix y = Matrix::Zero(dataset.num_classes, static_cast<Eigen::Index>(idx.size()));
    for (int j = 0; j < static_cast<int>(idx.size()); ++j)
        y(dataset.labels[idx[j]], j) = 1.0;
    return y;
}

Matrix ridge_solve(const Matrix& target, const Matrix& h, double lambda) {
    const Eigen::Index k = h.cols();
    const Matrix gram =
        h.transpose() * h + lambda * Matrix::Identity(k, k);
    Eigen::LDLT<Matrix> ldlt(gram);
    if (ldlt.info() != Eigen::Success)
        throw SolverError("ridge system factorization failed");
    return ldlt.solve((target * h).transpose()).transpose();
}

// Iteration-level bookkeeping shared by fit and refine_coefficients.
struct SweepStats {
    int accepted = 0;
    int failed = 0;
    double min_step = std::numeric_limits<double>::infinity();
    double max_step = 0;

    void note(const StepResult& r) {
        if (!r.accepted) {
            ++failed;
            return;
        }
        ++accepted;
        if (r.step > 0) {
            min_step = std::min(min_step, r.step);
            max_step = std::max(max_step, r.step);
        }
    }
};

TraceRecord make_record(int iteration, const objective::ObjectiveBreakdown& b,
                        const SweepStats& stats) {
    TraceRecord rec;
    rec.iteration = iteration;
    rec.total = b.total;
    rec.reconstruction = b.reconstruction;
    rec.orthogonality = b.orthogonality;
    rec.sparsity = b.sparsity;
    rec.label_loss = b.label_loss;
    rec.steps_accepted = stats.accepted;
    rec.steps_failed = stats.failed;
    rec.min_step = std::isfinite(stats.min_step) ? stats.min_step : 0.0;
    rec.max_step = stats.max_step;
    return rec;
}

double relative_change(double previous, double current) {
    return std::abs(previous - current) / std::max(std::abs(previous), 1e-30);
}

}  // namespace

double StepPolicy::warm_start(objective::BlockRef block) const {
    const int view = objective::is_shared_block(block.kind) ? -1 : block.view;
    const auto it = last_step_.find({static_cast<int>(block.kind), view});
    if (it == last_step_.end()) return initial_step;
    // One growth notch above the last accepted step, so the line search
    // can re-expand after an early conservative phase. The descent check
    // still gates every trial. The cap keeps a run of free no-op
    // acceptances (blocks parked at a boundary) from inflating the trial
    // beyond what the backtrack budget can recover.
    return std::min(it->second / shrink, 1024.0 * initial_step);
}

void StepPolicy::record(objective::BlockRef block, double step) {
    const int view = objective::is_shared_block(block.kind) ? -1 : block.view;
    last_step_[{static_cast<int>(block.kind), view}] = step;
}

StepPolicy StepPolicy::from(const Hyperparams& hp) {
    StepPolicy policy;
    policy.shrink = hp.step_shrink;
    policy.max_backtracks = hp.max_backtracks;
    return policy;
}

const char* fit_status_name(FitStatus status) {
    switch (status) {
        case FitStatus::Converged: return "converged";
        case FitStatus::MaxIterations: return "max_iterations";
        case FitStatus::Stalled: return "stalled";
    }
    return "?";
}

StepResult update_basis_block(FactorModel& model, const MultiViewDataset& dataset,
                              const Hyperparams& hp, int v,
                              objective::BlockKind kind, StepPolicy& policy) {
    if (kind != BlockKind::WCD && kind != BlockKind::WCN && kind != BlockKind::WSD &&
        kind != BlockKind::WSN)
        throw DataError("update_basis_block expects a W block kind");
    TermCache cache = objective::compute_terms(model, dataset, hp.loss);
    return try_gradient_step(model, dataset, hp, {kind, v}, policy, cache,
                             /*project=*/true);
}

StepResult update_coefficient_block(FactorModel& model, const MultiViewDataset& dataset,
                                    const Hyperparams& hp, objective::BlockRef block,
                                    StepPolicy& policy) {
    if (block.kind != BlockKind::HCD && block.kind != BlockKind::HCN &&
        block.kind != BlockKind::HSD && block.kind != BlockKind::HSN)
        throw DataError("update_coefficient_block expects an H block kind");
    TermCache cache = objective::compute_terms(model, dataset, hp.loss);
    return try_gradient_step(model, dataset, hp, block, policy, cache,
                             /*project=*/true);
}

Matrix solve_b_cd(const FactorModel& model, const MultiViewDataset& dataset,
                  const Hyperparams& hp) {
    const int c = model.num_classes;
    const int k1 = model.dims.k1;
    if (k1 == 0) return Matrix(c, 0);
    const std::vector<int> labeled = dataset.labeled_indices();
    if (labeled.empty())
        throw DataError("solve_b_cd needs at least one labeled instance");

    const Matrix h = selected_rows(model.h_cd, labeled);
    const Matrix y = one_hot_columns(dataset, labeled);
    Matrix target = Matrix::Zero(c, static_cast<Eigen::Index>(labeled.size()));
    for (int v = 0; v < model.num_views(); ++v) {
        target += y;
        if (model.dims.k3 > 0)
            target.noalias() -=
                model.b_sd[v] * selected_rows(model.h_sd[v], labeled).transpose();
    }
    target /= static_cast<double>(model.num_views());
    return ridge_solve(target, h, hp.lambda_ridge);
}

Matrix solve_b_sd(const FactorModel& model, const MultiViewDataset& dataset,
                  int v, const Hyperparams& hp) {
    const int c = model.num_classes;
    const int k3 = model.dims.k3;
    if (k3 == 0) return Matrix(c, 0);
    const std::vector<int> labeled = dataset.labeled_indices();
    if (labeled.empty())
        throw DataError("solve_b_sd needs at least one labeled instance");

    const Matrix h = selected_rows(model.h_sd[v], labeled);
    Matrix target = one_hot_columns(dataset, labeled);
    if (model.dims.k1 > 0)
        target.noalias() -= model.b_cd * selected_rows(model.h_cd, labeled).transpose();
    return ridge_solve(target, h, hp.lambda_ridge);
}

FitResult fit(const MultiViewDataset& dataset, const Hyperparams& hp,
              const IterationCallback& on_iteration) {
    hp.check();
    dataset.check(/*require_label_per_class=*/hp.gamma > 0);

    FitResult result;
    result.model = init_model(dataset, hp);
    FactorModel& model = result.model;
    StepPolicy policy = StepPolicy::from(hp);
    TermCache cache = objective::compute_terms(model, dataset, hp.loss);
    double prev_total = objective::combine(cache, hp).total;
    const bool update_b = hp.gamma > 0 && dataset.num_labeled() > 0;
    const int n_v = model.num_views();
    const BlockDims& d = model.dims;

    result.status = FitStatus::MaxIterations;
    for (int iter = 1; iter <= hp.max_iters; ++iter) {
        SweepStats stats;
        const auto step = [&](BlockRef block, bool project) {
            stats.note(
                try_gradient_step(model, dataset, hp, block, policy, cache, project));
        };
        if (d.k1 > 0)
            for (int v = 0; v < n_v; ++v) step({BlockKind::WCD, v}, true);
        if (d.k2 > 0)
            for (int v = 0; v < n_v; ++v) step({BlockKind::WCN, v}, true);
        if (d.k3 > 0)
            for (int v = 0; v < n_v; ++v) step({BlockKind::WSD, v}, true);
        if (d.k4 > 0)
            for (int v = 0; v < n_v; ++v) step({BlockKind::WSN, v}, true);
        if (d.k1 > 0) step({BlockKind::HCD, -1}, true);
        if (d.k2 > 0) step({BlockKind::HCN, -1}, true);
        if (d.k3 > 0)
            for (int v = 0; v < n_v; ++v) step({BlockKind::HSD, v}, true);
        if (d.k4 > 0)
            for (int v = 0; v < n_v; ++v) step({BlockKind::HSN, v}, true);
        if (update_b) {
            if (d.k1 > 0)
                stats.note(
                    try_b_update(model, dataset, hp, {BlockKind::BCD, -1}, policy, cache));
            if (d.k3 > 0)
                for (int v = 0; v < n_v; ++v)
                    stats.note(
                        try_b_update(model, dataset, hp, {BlockKind::BSD, v}, policy, cache));
        }

        const objective::ObjectiveBreakdown breakdown = objective::combine(cache, hp);
        const TraceRecord rec = make_record(iter, breakdown, stats);
        result.trace.records.push_back(rec);
        if (on_iteration) on_iteration(rec);

        if (stats.accepted == 0) {
            result.status = FitStatus::Stalled;
            break;
        }
        if (relative_change(prev_total, breakdown.total) < hp.rel_tol) {
            result.status = FitStatus::Converged;
            break;
        }
        prev_total = breakdown.total;
    }
    result.final_objective = objective::combine(cache, hp);
    return result;
}

RefineResult refine_coefficients(FactorModel& model, const MultiViewDataset& dataset,
                                 const Hyperparams& hp) {
    hp.check();
    StepPolicy policy = StepPolicy::from(hp);
    TermCache cache = objective::compute_terms(model, dataset, hp.loss);
    double prev_total = objective::combine(cache, hp).total;
    const int n_v = model.num_views();
    const BlockDims& d = model.dims;

    RefineResult result;
    result.status = FitStatus::MaxIterations;
    for (int iter = 1; iter <= hp.max_iters; ++iter) {
        SweepStats stats;
        const auto step = [&](BlockRef block) {
            stats.note(
                try_gradient_step(model, dataset, hp, block, policy, cache, true));
        };
        if (d.k1 > 0) step({BlockKind::HCD, -1});
        if (d.k2 > 0) step({BlockKind::HCN, -1});
        if (d.k3 > 0)
            for (int v = 0; v < n_v; ++v) step({BlockKind::HSD, v});
        if (d.k4 > 0)
            for (int v = 0; v < n_v; ++v) step({BlockKind::HSN, v});

        result.iterations = iter;
        const double total = objective::combine(cache, hp).total;
        if (stats.accepted == 0) {
            result.status = FitStatus::Stalled;
            break;
        }
        if (relative_change(prev_total, total) < hp.rel_tol) {
            result.status = FitStatus::Converged;
            break;
        }
        prev_total = total;
    }
    result.final_objective = objective::combine(cache, hp).total;
    return result;
}

}  // namespace mvdnmf::solver
