#pragma once

#include <cstdint>
#include <string>

#include "mvdnmf/inference.hpp"

namespace mvdnmf::eval {

// Splits the labeled instances into k disjoint folds with per-class
// counts differing by at most one. Unlabeled instances belong to no
// fold. Throws DataError when a class has fewer than k labeled
// instances.
std::vector<std::vector<int>> stratified_kfold(const std::vector<int>& labels,
                                               int k, std::uint64_t seed);

// Fraction of matching entries; throws DataError on length mismatch.
double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth);

struct FoldScore {
    int repeat = 0;
    int fold = 0;
    double accuracy = 0;
};

struct CrossValResult {
    std::vector<FoldScore> fold_scores;
    double mean = 0;
    double stddev = 0;  // population standard deviation over fold scores
};

struct CrossValOptions {
    int folds = 5;
    int repeats = 10;
    int jobs = 1;  // folds evaluated in parallel; results independent of jobs
};

// What each fold's fit actually saw, for leakage audits.
struct FoldAuditRecord {
    int repeat = 0;
    int fold = 0;
    std::vector<int> test_ids;
    std::vector<int> train_ids;          // instance ids handed to fit
    std::vector<int> train_labels_seen;  // labels handed to fit, aligned with train_ids
};

struct MaskingAudit {
    std::vector<FoldAuditRecord> folds;
};

// Repeated stratified cross-validation. Per fold: fit on the training
// instances only (test columns removed, so no test label can reach the
// solver), infer held-out coefficients by fold_in, predict, score.
// Fold seeds are hp.seed + repeat. Scores are reduced in (repeat, fold)
// order regardless of jobs.
CrossValResult cross_validate(const MultiViewDataset& dataset, const Hyperparams& hp,
                              const CrossValOptions& options,
                              MaskingAudit* audit = nullptr);

enum class KnnSpace { SingleView, Concatenated };

// 1-nearest-neighbor prediction for each test instance in the chosen
// feature space; distance ties resolve to the lowest training index.
// Unlabeled training instances are ignored.
std::vector<int> knn_baseline(const MultiViewDataset& dataset,
                              const std::vector<int>& train_idx,
                              const std::vector<int>& test_idx,
                              KnnSpace space, int view = 0);

// 1-NN on explicit feature rows (one instance per row).
std::vector<int> knn_predict(const Matrix& train_rows,
                             const std::vector<int>& train_labels,
                             const Matrix& test_rows);

// Cross-validated 1-NN baseline on raw features, same folds as
// cross_validate for the given seed.
CrossValResult knn_cross_validate(const MultiViewDataset& dataset,
                                  const CrossValOptions& options,
                                  KnnSpace space, int view, std::uint64_t seed);

// Plain NMF baseline: single-view factorization with only view-specific
// discriminative factors and all regularizers off, followed by 1-NN on
// the coefficient rows (fold_in for held-out instances).
CrossValResult nmf_cross_validate(const MultiViewDataset& dataset,
                                  const Hyperparams& hp,
                                  const CrossValOptions& options, int view,
                                  int rank);

struct MethodScores {
    std::string method;
    CrossValResult result;
};

// CSV: method,dataset,repeat,fold,accuracy,mean,std. Per-fold rows leave
// mean/std empty; one summary row per method carries them.
void write_results_csv(const std::vector<MethodScores>& methods,
                       const std::string& dataset_name, const std::string& path);
std::string results_csv_string(const std::vector<MethodScores>& methods,
                               const std::string& dataset_name);

}  // namespace mvdnmf::eval
