#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mvdnmf/dataset.hpp"

namespace mvdnmf {

// Latent factor counts of the four-part decomposition. Every view's data
// matrix is approximated by four basis/coefficient block pairs: common
// discriminative (k1), common non-discriminative (k2), view-specific
// discriminative (k3) and view-specific non-discriminative (k4).
struct BlockDims {
    int k1 = 0;
    int k2 = 0;
    int k3 = 0;
    int k4 = 0;

    int total() const { return k1 + k2 + k3 + k4; }
    void check() const;  // throws DataError
};

enum class LossMode { CrossEntropy, SquaredError };

struct Hyperparams {
    double alpha = 0.1;          // orthogonality weight
    double beta = 0.1;           // sparsity weight
    double gamma = 1.0;          // label-loss weight
    double lambda_ridge = 1e-6;  // ridge term of the closed-form B solves
    BlockDims dims;
    LossMode loss = LossMode::CrossEntropy;
    int max_iters = 300;
    double rel_tol = 1e-5;
    std::uint64_t seed = 0;
    double step_shrink = 0.5;  // backtracking shrink factor, in (0,1)
    int max_backtracks = 30;

    void check() const;  // throws DataError
};

// All factor blocks of the model. Basis matrices (W) are per view; the
// common coefficient blocks h_cd/h_cn and the common projection b_cd are
// stored once and shared by every view. The *_for_view accessors return
// that single storage instance for any view index.
//
// Shapes: w_*[v] is m_v x k, h_cd/h_cn are n x k1 / n x k2, h_sd[v] and
// h_sn[v] are n x k3 / n x k4, b_cd is c x k1, b_sd[v] is c x k3. All W
// and H entries stay non-negative; B entries are unconstrained.
struct FactorModel {
    BlockDims dims;
    int num_classes = 0;

    std::vector<Matrix> w_cd, w_cn, w_sd, w_sn;
    Matrix h_cd, h_cn;
    std::vector<Matrix> h_sd, h_sn;
    Matrix b_cd;
    std::vector<Matrix> b_sd;

    int num_views() const { return static_cast<int>(w_cd.size()); }
    int num_instances() const { return static_cast<int>(h_cd.rows()); }

    Matrix& h_cd_for_view(int) { return h_cd; }
    const Matrix& h_cd_for_view(int) const { return h_cd; }
    Matrix& h_cn_for_view(int) { return h_cn; }
    const Matrix& h_cn_for_view(int) const { return h_cn; }
    Matrix& b_cd_for_view(int) { return b_cd; }
    const Matrix& b_cd_for_view(int) const { return b_cd; }
};

struct TraceRecord {
    int iteration = 0;
    double total = 0;
    double reconstruction = 0;
    double orthogonality = 0;  // unweighted sum over views
    double sparsity = 0;       // unweighted
    double label_loss = 0;     // unweighted
    int steps_accepted = 0;
    int steps_failed = 0;
    double min_step = 0;  // over accepted gradient steps this iteration
    double max_step = 0;
};

struct SolverTrace {
    std::vector<TraceRecord> records;

    bool empty() const { return records.empty(); }
    int iterations() const { return static_cast<int>(records.size()); }
    const TraceRecord& back() const { return records.back(); }
};

struct Violation {
    std::string block;  // e.g. "w_cd[1]"
    int row = -1;
    int col = -1;
    std::string rule;  // broken rule, e.g. "entry >= 0"

    std::string to_string() const;
};

// Seeded model initialization. W and H entries are drawn uniformly from
// (0,1] and scaled by sqrt(mean(X)/K) with K the total factor count, so
// the initial reconstruction matches the data's magnitude; the scale is
// floored at 1e-8 for degenerate all-zero views. Per-view blocks use the
// view's mean, shared coefficient blocks the pooled mean. B starts at
// zero, which pins the initial cross-entropy loss to the uniform-
// prediction value. Bit-reproducible for a fixed seed.
FactorModel init_model(const MultiViewDataset& dataset, const Hyperparams& hp);

// Reports every broken model invariant (shape mismatches, negative or
// non-finite entries) against the dataset's dimensions. Empty result
// means the model is valid.
std::vector<Violation> validate(const FactorModel& model,
                                const MultiViewDataset& dataset);

}  // namespace mvdnmf
