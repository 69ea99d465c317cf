#pragma once

#include <vector>

#include "mvdnmf/model.hpp"

namespace mvdnmf::objective {

// One evaluation of the objective. Component values are unweighted; the
// total applies the alpha/beta/gamma weights.
struct ObjectiveBreakdown {
    double reconstruction = 0;
    double orthogonality = 0;
    double sparsity = 0;
    double label_loss = 0;
    double total = 0;
};

struct SoftmaxOutput {
    Matrix logits;  // c x n
    Matrix probs;   // c x n, column-stochastic
};

enum class BlockKind { WCD, WCN, WSD, WSN, HCD, HCN, HSD, HSN, BCD, BSD };

// Identifies one factor block. view is ignored for the shared blocks
// (HCD, HCN, BCD).
struct BlockRef {
    BlockKind kind;
    int view = -1;
};

const char* block_kind_name(BlockKind kind);
bool is_shared_block(BlockKind kind);

// X^(v) minus all four basis/coefficient products of view v.
Matrix residual(const FactorModel& model, const MultiViewDataset& dataset, int v);

// Squared Frobenius norm of the view residual.
double reconstruction_term(const FactorModel& model, const MultiViewDataset& dataset, int v);

// c x n logits of view v: b_cd h_cd^T + b_sd[v] h_sd[v]^T.
Matrix softmax_logits(const FactorModel& model, int v);

// Column-wise softmax, stabilized by subtracting each column's max.
Matrix softmax_columns(const Matrix& z);

SoftmaxOutput softmax_output(const FactorModel& model, int v);

// -sum over labeled columns of log prob of the true class. Probabilities
// are floored at 1e-15 before the log. Unlabeled entries (label < 0) are
// skipped.
double cross_entropy(const Matrix& probs, const std::vector<int>& labels);

// Sum of absolute inner products between all discriminative basis column
// pairs of view v. For non-negative blocks this equals the squared norm
// of the row-sum vector of [w_cd[v] w_sd[v]], which is the form computed
// here.
double orthogonality_penalty(const FactorModel& model, int v);

// Entry sum of h_cd plus the entry sum of every h_sd[v].
double sparsity_penalty(const FactorModel& model);

// softmax(logits of view v) minus the one-hot label matrix, with
// unlabeled columns zeroed.
Matrix q_matrix(const FactorModel& model, const MultiViewDataset& dataset, int v);

// Gradient of the unweighted view-v label term with respect to the
// logits: the q matrix in cross-entropy mode, 2*(logits - Y) restricted
// to labeled columns in squared-error mode.
Matrix label_grad_logits(const FactorModel& model, const MultiViewDataset& dataset,
                         int v, LossMode mode);

// Unweighted label loss of view v: cross-entropy of the softmax output,
// or the squared error of the raw logits against one-hot labels,
// restricted to labeled columns.
double label_loss_term(const FactorModel& model, const MultiViewDataset& dataset,
                       int v, LossMode mode);

// Gradient of the gamma-weighted cross-entropy term with respect to one
// coefficient block (HCD or HSD).
Matrix ce_grad_h_block(const FactorModel& model, const MultiViewDataset& dataset,
                       double gamma, BlockRef block);

ObjectiveBreakdown total_objective(const FactorModel& model,
                                   const MultiViewDataset& dataset,
                                   const Hyperparams& hp);

// Exact gradient of the total objective with respect to any block.
Matrix gradient(const FactorModel& model, const MultiViewDataset& dataset,
                const Hyperparams& hp, BlockRef block);

// Per-view term values, cached by the solver so a block update only
// recomputes what it touched. combine() reproduces total_objective
// bit-for-bit when the cache matches the model.
struct TermCache {
    std::vector<double> recon;
    std::vector<double> orth;
    std::vector<double> label;
    double sparsity = 0;
};

TermCache compute_terms(const FactorModel& model, const MultiViewDataset& dataset,
                        LossMode mode);
ObjectiveBreakdown combine(const TermCache& terms, const Hyperparams& hp);

}  // namespace mvdnmf::objective
