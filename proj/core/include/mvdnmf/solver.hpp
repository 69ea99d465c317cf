#pragma once

#include <functional>
#include <map>
#include <utility>

#include "mvdnmf/objective.hpp"

namespace mvdnmf::solver {

// Backtracking line-search policy with a per-block warm start: each block
// opens one growth notch above its last accepted step and shrinks from
// there. A step is accepted only if the total objective does not
// increase.
struct StepPolicy {
    double initial_step = 1.0;
    double shrink = 0.5;
    int max_backtracks = 30;

    double warm_start(objective::BlockRef block) const;
    void record(objective::BlockRef block, double step);

    static StepPolicy from(const Hyperparams& hp);

private:
    std::map<std::pair<int, int>, double> last_step_;
};

struct StepResult {
    bool accepted = false;
    double step = 0;             // accepted step size (0 for closed-form B)
    double objective_after = 0;  // total objective after the update
};

enum class FitStatus { Converged, MaxIterations, Stalled };

const char* fit_status_name(FitStatus status);

struct FitResult {
    FactorModel model;
    SolverTrace trace;
    FitStatus status = FitStatus::MaxIterations;
    objective::ObjectiveBreakdown final_objective;
};

// Projected gradient update of one basis block of view v (kind WCD, WCN,
// WSD or WSN). The block moves against the exact objective gradient, is
// clamped at zero, and the step is backtracked until the total objective
// does not increase. On failure the model is left unchanged.
StepResult update_basis_block(FactorModel& model, const MultiViewDataset& dataset,
                              const Hyperparams& hp, int v,
                              objective::BlockKind kind, StepPolicy& policy);

// Same contract for a coefficient block (HCD, HCN, HSD(v) or HSN(v)).
StepResult update_coefficient_block(FactorModel& model, const MultiViewDataset& dataset,
                                    const Hyperparams& hp, objective::BlockRef block,
                                    StepPolicy& policy);

// Closed-form ridge solve for the common projection block: the minimizer
// of the squared label loss over labeled columns with the other blocks
// fixed. Returns a c x k1 matrix (empty when k1 = 0).
Matrix solve_b_cd(const FactorModel& model, const MultiViewDataset& dataset,
                  const Hyperparams& hp);

// Closed-form ridge solve for view v's projection block; c x k3.
Matrix solve_b_sd(const FactorModel& model, const MultiViewDataset& dataset,
                  int v, const Hyperparams& hp);

struct RefineResult {
    FitStatus status = FitStatus::MaxIterations;
    int iterations = 0;
    double final_objective = 0;
};

// Coefficient-only descent with every basis and projection block frozen
// (the fold-in path): sweeps h_cd, h_cn, h_sd, h_sn under the same
// backtracking and stopping rules as fit.
RefineResult refine_coefficients(FactorModel& model, const MultiViewDataset& dataset,
                                 const Hyperparams& hp);

using IterationCallback = std::function<void(const TraceRecord&)>;

// Full block-coordinate-descent fit. One iteration sweeps, in order: all
// views' w_cd, w_cn, w_sd, w_sn, then h_cd, h_cn, every h_sd, every
// h_sn, then b_cd and every b_sd. B blocks use the closed-form solve
// when it does not increase the objective, otherwise a backtracked
// gradient step. Terminates when the relative objective change falls
// below rel_tol, max_iters is reached, or no block accepts a step.
FitResult fit(const MultiViewDataset& dataset, const Hyperparams& hp,
              const IterationCallback& on_iteration = nullptr);

}  // namespace mvdnmf::solver
