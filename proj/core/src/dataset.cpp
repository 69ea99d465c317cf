#include "mvdnmf/dataset.hpp"

#include <cmath>
#include <string>

#include "mvdnmf/errors.hpp"

namespace mvdnmf {

int MultiViewDataset::num_labeled() const {
    int count = 0;
    for (int label : labels)
        if (label != kUnlabeled) ++count;
    return count;
}

std::vector<int> MultiViewDataset::labeled_indices() const {
    std::vector<int> idx;
    idx.reserve(labels.size());
    for (int j = 0; j < static_cast<int>(labels.size()); ++j)
        if (labels[j] != kUnlabeled) idx.push_back(j);
    return idx;
}

std::vector<int> MultiViewDataset::class_counts() const {
    std::vector<int> counts(num_classes, 0);
    for (int label : labels)
        if (label != kUnlabeled) ++counts[label];
    return counts;
}

Matrix MultiViewDataset::one_hot() const {
    const int n = num_instances();
    Matrix y = Matrix::Zero(num_classes, n);
    for (int j = 0; j < n; ++j)
        if (labels[j] != kUnlabeled) y(labels[j], j) = 1.0;
    return y;
}

MultiViewDataset MultiViewDataset::select_instances(const std::vector<int>& idx) const {
    MultiViewDataset out;
    out.num_classes = num_classes;
    out.views.reserve(views.size());
    for (const Matrix& x : views) {
        Matrix sub(x.rows(), static_cast<Eigen::Index>(idx.size()));
        for (int j = 0; j < static_cast<int>(idx.size()); ++j)
            sub.col(j) = x.col(idx[j]);
        out.views.push_back(std::move(sub));
    }
    out.labels.reserve(idx.size());
    for (int j : idx) out.labels.push_back(labels[j]);
    return out;
}

void MultiViewDataset::check(bool require_label_per_class) const {
    if (views.empty()) throw DataError("dataset has no views");
    if (num_classes < 2) throw DataError("num_classes must be >= 2");
    const int n = num_instances();
    if (n < 1) throw DataError("dataset has no instances");
    for (int v = 0; v < num_views(); ++v) {
        const Matrix& x = views[v];
        if (x.cols() != n)
            throw DataError("view " + std::to_string(v) + " has " +
                            std::to_string(x.cols()) + " instances, expected " +
                            std::to_string(n));
        if (x.rows() < 1)
            throw DataError("view " + std::to_string(v) + " has no features");
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            for (Eigen::Index i = 0; i < x.rows(); ++i) {
                const double value = x(i, j);
                if (!std::isfinite(value))
                    throw DataError("view " + std::to_string(v) + " entry (" +
                                    std::to_string(i) + "," + std::to_string(j) +
                                    ") is not finite");
                if (value < 0.0)
                    throw DataError("view " + std::to_string(v) + " entry (" +
                                    std::to_string(i) + "," + std::to_string(j) +
                                    ") is negative: " + std::to_string(value));
            }
        }
    }
    if (static_cast<int>(labels.size()) != n)
        throw DataError("labels length " + std::to_string(labels.size()) +
                        " does not match instance count " + std::to_string(n));
    for (int j = 0; j < n; ++j) {
        const int label = labels[j];
        if (label != kUnlabeled && (label < 0 || label >= num_classes))
            throw DataError("label " + std::to_string(label) + " of instance " +
                            std::to_string(j) + " outside [0," +
                            std::to_string(num_classes) + ")");
    }
    if (require_label_per_class) {
        const std::vector<int> counts = class_counts();
        for (int q = 0; q < num_classes; ++q)
            if (counts[q] == 0)
                throw DataError("class " + std::to_string(q) +
                                " has no labeled instance");
    }
}

}  // namespace mvdnmf
