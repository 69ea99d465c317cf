#pragma once

#include <Eigen/Dense>
#include <vector>

namespace mvdnmf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Sentinel label for instances without supervision.
inline constexpr int kUnlabeled = -1;

// Multi-view data: one features x instances matrix per view, all views
// sharing the instance (column) axis. Entries must be non-negative and
// finite. Labels are class ids in [0, num_classes) or kUnlabeled.
struct MultiViewDataset {
    std::vector<Matrix> views;
    std::vector<int> labels;
    int num_classes = 0;

    int num_views() const { return static_cast<int>(views.size()); }
    int num_instances() const {
        return views.empty() ? 0 : static_cast<int>(views.front().cols());
    }
    int feature_dim(int v) const { return static_cast<int>(views[v].rows()); }

    int num_labeled() const;
    std::vector<int> labeled_indices() const;
    // Per-class counts over labeled instances; length num_classes.
    std::vector<int> class_counts() const;

    // c x n one-hot label matrix with all-zero columns for unlabeled
    // instances.
    Matrix one_hot() const;

    // Builds the dataset from a column subset, preserving order.
    MultiViewDataset select_instances(const std::vector<int>& idx) const;

    // Throws DataError on a broken structural invariant. When
    // require_label_per_class is set, additionally demands at least one
    // labeled instance in every class.
    void check(bool require_label_per_class = false) const;
};

}  // namespace mvdnmf
