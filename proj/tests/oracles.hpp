#pragma once

// Independent reference implementations used only by tests: scalar-loop
// objective evaluation, brute-force residuals, extended-precision
// softmax, finite-difference gradients and a QR-route ridge solve. None
// of these share evaluation code with the library paths they check.

#include <cstdint>
#include <vector>

#include "mvdnmf/objective.hpp"

namespace oracle {

using mvdnmf::FactorModel;
using mvdnmf::Hyperparams;
using mvdnmf::Matrix;
using mvdnmf::MultiViewDataset;

struct Terms {
    double reconstruction = 0;
    double orthogonality = 0;
    double sparsity = 0;
    double label_loss = 0;
    double total = 0;
};

// Element-wise evaluation of the full objective with scalar loops.
Terms scalar_terms(const FactorModel& model, const MultiViewDataset& dataset,
                   const Hyperparams& hp);

// X^(v) minus the sum of rank-one outer products of every basis column
// with its coefficient column.
Matrix outer_product_residual(const FactorModel& model, const MultiViewDataset& dataset,
                              int v);

// Sum of |w_i . w_j| over all column pairs of wd, by explicit loops.
double gram_l11(const Matrix& wd);

// Column softmax evaluated in long double without stabilization.
Matrix softmax_longdouble(const Matrix& z);

// Central finite difference of the total objective for one block.
Matrix fd_gradient(const FactorModel& model, const MultiViewDataset& dataset,
                   const Hyperparams& hp, mvdnmf::objective::BlockRef block,
                   double step);

// Central finite difference of the gamma-weighted cross-entropy term.
Matrix fd_ce_gradient(const FactorModel& model, const MultiViewDataset& dataset,
                      double gamma, mvdnmf::objective::BlockRef block, double step);

// min ||target - B H^T||_F^2 + lambda ||B||_F^2 row by row through a QR
// factorization of the augmented system (independent of the library's
// normal-equations route).
Matrix ridge_qr(const Matrix& target, const Matrix& h, double lambda);

// Largest |analytic - fd| / max(1, |analytic|, |fd|) over the block.
double max_rel_gradient_error(const Matrix& analytic, const Matrix& fd);

// Mutable access to any block of a model copy, for perturbation tests.
Matrix& block_of(FactorModel& model, mvdnmf::objective::BlockRef block);

// Deterministic random instances for tests.
MultiViewDataset random_dataset(int n, int c, const std::vector<int>& feature_dims,
                                std::uint64_t seed, double unlabeled_fraction = 0.0);
void randomize_b(FactorModel& model, std::uint64_t seed, double scale = 1.0);

}  // namespace oracle
