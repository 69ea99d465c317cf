#pragma once

#include "mvdnmf/solver.hpp"

namespace mvdnmf {

// Coefficient blocks for a set of instances, either taken from a fitted
// model (transductive) or inferred by fold_in for unseen instances.
struct CoefficientSet {
    Matrix h_cd, h_cn;
    std::vector<Matrix> h_sd, h_sn;

    int num_instances() const { return static_cast<int>(h_cd.rows()); }
    int num_views() const { return static_cast<int>(h_sd.size()); }
};

struct FoldInResult {
    CoefficientSet coefficients;
    solver::FitStatus status = solver::FitStatus::MaxIterations;
    int iterations = 0;
    double final_objective = 0;
};

// The model's own coefficient blocks (for predicting fit-time instances).
CoefficientSet training_coefficients(const FactorModel& model);

// Class probabilities, averaged uniformly over the per-view softmax
// outputs; c x n', columns sum to one.
Matrix predict_proba(const FactorModel& model, const CoefficientSet& coeffs);

// Argmax of each probability column; ties resolve to the lowest class id.
std::vector<int> predict_labels(const Matrix& probs);
std::vector<int> predict_labels(const FactorModel& model, const CoefficientSet& coeffs);

// Infers coefficients for unseen instances with all basis and projection
// blocks frozen, minimizing reconstruction plus the sparsity penalty by
// the same projected block descent the solver uses. Coefficients start
// from the seeded positive initialization fit uses; W and B are never
// modified. Deterministic for a fixed hp.seed.
FoldInResult fold_in(const FactorModel& model, const std::vector<Matrix>& new_views,
                     const Hyperparams& hp);

// Row-wise concatenation [h_cd | h_sd(0) | ... | h_sd(n_v-1)]; the
// feature matrix used for classification and embedding exports.
Matrix discriminative_features(const FactorModel& model);
Matrix discriminative_features(const FactorModel& model, const CoefficientSet& coeffs);

}  // namespace mvdnmf
