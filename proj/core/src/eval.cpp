#include "mvdnmf/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "mvdnmf/errors.hpp"

namespace mvdnmf::eval {

namespace {

std::string format_double(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

void finish_stats(CrossValResult& result) {
    const double count = static_cast<double>(result.fold_scores.size());
    double mean = 0;
    for (const FoldScore& s : result.fold_scores) mean += s.accuracy;
    mean /= count;
    double var = 0;
    for (const FoldScore& s : result.fold_scores)
        var += (s.accuracy - mean) * (s.accuracy - mean);
    result.mean = mean;
    result.stddev = std::sqrt(var / count);
}

std::vector<int> complement_indices(int n, const std::vector<int>& exclude) {
    std::vector<char> drop(n, 0);
    for (int j : exclude) drop[j] = 1;
    std::vector<int> keep;
    keep.reserve(n - exclude.size());
    for (int j = 0; j < n; ++j)
        if (!drop[j]) keep.push_back(j);
    return keep;
}

std::vector<Matrix> view_columns(const MultiViewDataset& dataset,
                                 const std::vector<int>& idx) {
    std::vector<Matrix> views;
    views.reserve(dataset.views.size());
    for (const Matrix& x : dataset.views) {
        Matrix sub(x.rows(), static_cast<Eigen::Index>(idx.size()));
        for (int j = 0; j < static_cast<int>(idx.size()); ++j)
            sub.col(j) = x.col(idx[j]);
        views.push_back(std::move(sub));
    }
    return views;
}

std::vector<int> labels_at(const std::vector<int>& labels, const std::vector<int>& idx) {
    std::vector<int> out;
    out.reserve(idx.size());
    for (int j : idx) out.push_back(labels[j]);
    return out;
}

struct FoldTask {
    int repeat = 0;
    int fold = 0;
    std::vector<int> test_ids;
};

std::vector<FoldTask> build_tasks(const std::vector<int>& labels,
                                  const CrossValOptions& options, std::uint64_t seed) {
    std::vector<FoldTask> tasks;
    for (int r = 0; r < options.repeats; ++r) {
        const auto folds = stratified_kfold(labels, options.folds, seed + r);
        for (int f = 0; f < options.folds; ++f)
            tasks.push_back({r, f, folds[f]});
    }
    return tasks;
}

// Runs fn(i) for every task index on `jobs` threads; rethrows the first
// failure with its task named.
void run_tasks(int count, int jobs, const std::function<void(int)>& fn) {
    if (jobs <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto worker = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const int n_threads = std::min(jobs, count);
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace

std::vector<std::vector<int>> stratified_kfold(const std::vector<int>& labels,
                                               int k, std::uint64_t seed) {
    if (k < 1) throw DataError("stratified_kfold: k must be >= 1");
    std::map<int, std::vector<int>> by_class;
    for (int j = 0; j < static_cast<int>(labels.size()); ++j)
        if (labels[j] >= 0) by_class[labels[j]].push_back(j);
    if (by_class.empty())
        throw DataError("stratified_kfold: no labeled instances");
    for (const auto& [cls, idx] : by_class)
        if (static_cast<int>(idx.size()) < k)
            throw DataError("class " + std::to_string(cls) + " has only " +
                            std::to_string(idx.size()) + " labeled instances, need >= " +
                            std::to_string(k));

    std::mt19937_64 rng(seed);
    std::vector<std::vector<int>> folds(k);
    for (auto& [cls, idx] : by_class) {
        std::shuffle(idx.begin(), idx.end(), rng);
        for (int i = 0; i < static_cast<int>(idx.size()); ++i)
            folds[i % k].push_back(idx[i]);
    }
    for (auto& fold : folds) std::sort(fold.begin(), fold.end());
    return folds;
}

double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
    if (predicted.size() != truth.size())
        throw DataError("accuracy: got " + std::to_string(predicted.size()) +
                        " predictions for " + std::to_string(truth.size()) + " truths");
    if (predicted.empty()) throw DataError("accuracy: empty inputs");
    int matches = 0;
    for (size_t j = 0; j < predicted.size(); ++j)
        if (predicted[j] == truth[j]) ++matches;
    return static_cast<double>(matches) / static_cast<double>(predicted.size());
}

CrossValResult cross_validate(const MultiViewDataset& dataset, const Hyperparams& hp,
                              const CrossValOptions& options, MaskingAudit* audit) {
    dataset.check();
    hp.check();
    if (options.folds < 2) throw DataError("cross_validate: need >= 2 folds");
    if (options.repeats < 1) throw DataError("cross_validate: need >= 1 repeat");

    const std::vector<FoldTask> tasks = build_tasks(dataset.labels, options, hp.seed);
    const int n = dataset.num_instances();
    std::vector<FoldScore> scores(tasks.size());
    std::vector<FoldAuditRecord> audit_records(audit ? tasks.size() : 0);

    run_tasks(static_cast<int>(tasks.size()), options.jobs, [&](int i) {
        const FoldTask& task = tasks[i];
        try {
            const std::vector<int> train_ids = complement_indices(n, task.test_ids);
            const MultiViewDataset train = dataset.select_instances(train_ids);
            // No test column reaches fit; the audit record proves it.
            if (audit)
                audit_records[i] = {task.repeat, task.fold, task.test_ids, train_ids,
                                    train.labels};
            const solver::FitResult fitted = solver::fit(train, hp);
            const FoldInResult folded =
                fold_in(fitted.model, view_columns(dataset, task.test_ids), hp);
            const std::vector<int> predicted =
                predict_labels(fitted.model, folded.coefficients);
            scores[i] = {task.repeat, task.fold,
                         accuracy(predicted, labels_at(dataset.labels, task.test_ids))};
        } catch (const std::exception& e) {
            throw SolverError("repeat " + std::to_string(task.repeat) + " fold " +
                              std::to_string(task.fold) + ": " + e.what());
        }
    });

    CrossValResult result;
    result.fold_scores = std::move(scores);
    finish_stats(result);
    if (audit) audit->folds = std::move(audit_records);
    return result;
}

std::vector<int> knn_predict(const Matrix& train_rows,
                             const std::vector<int>& train_labels,
                             const Matrix& test_rows) {
    if (train_rows.rows() != static_cast<Eigen::Index>(train_labels.size()))
        throw DataError("knn_predict: label count does not match training rows");
    bool any_labeled = false;
    for (int label : train_labels) any_labeled |= label >= 0;
    if (!any_labeled) throw DataError("knn_predict: no labeled training instance");

    std::vector<int> predicted(test_rows.rows());
    for (Eigen::Index t = 0; t < test_rows.rows(); ++t) {
        double best = std::numeric_limits<double>::infinity();
        int best_label = -1;
        for (Eigen::Index j = 0; j < train_rows.rows(); ++j) {
            if (train_labels[j] < 0) continue;
            const double dist = (train_rows.row(j) - test_rows.row(t)).squaredNorm();
            if (dist < best) {  // ties keep the earliest index
                best = dist;
                best_label = train_labels[j];
            }
        }
        predicted[t] = best_label;
    }
    return predicted;
}

std::vector<int> knn_baseline(const MultiViewDataset& dataset,
                              const std::vector<int>& train_idx,
                              const std::vector<int>& test_idx,
                              KnnSpace space, int view) {
    if (train_idx.empty()) throw DataError("knn_baseline: empty training set");

    const auto instance_rows = [&](const std::vector<int>& idx) {
        if (space == KnnSpace::SingleView) {
            Matrix rows(static_cast<Eigen::Index>(idx.size()),
                        dataset.views[view].rows());
            for (int j = 0; j < static_cast<int>(idx.size()); ++j)
                rows.row(j) = dataset.views[view].col(idx[j]).transpose();
            return rows;
        }
        Eigen::Index width = 0;
        for (const Matrix& x : dataset.views) width += x.rows();
        Matrix rows(static_cast<Eigen::Index>(idx.size()), width);
        for (int j = 0; j < static_cast<int>(idx.size()); ++j) {
            Eigen::Index at = 0;
            for (const Matrix& x : dataset.views) {
                rows.row(j).segment(at, x.rows()) = x.col(idx[j]).transpose();
                at += x.rows();
            }
        }
        return rows;
    };
    return knn_predict(instance_rows(train_idx), labels_at(dataset.labels, train_idx),
                       instance_rows(test_idx));
}

CrossValResult knn_cross_validate(const MultiViewDataset& dataset,
                                  const CrossValOptions& options,
                                  KnnSpace space, int view, std::uint64_t seed) {
    dataset.check();
    const int n = dataset.num_instances();
    CrossValResult result;
    for (int r = 0; r < options.repeats; ++r) {
        const auto folds = stratified_kfold(dataset.labels, options.folds, seed + r);
        for (int f = 0; f < options.folds; ++f) {
            const std::vector<int> train_ids = complement_indices(n, folds[f]);
            const std::vector<int> predicted =
                knn_baseline(dataset, train_ids, folds[f], space, view);
            result.fold_scores.push_back(
                {r, f, accuracy(predicted, labels_at(dataset.labels, folds[f]))});
        }
    }
    finish_stats(result);
    return result;
}

CrossValResult nmf_cross_validate(const MultiViewDataset& dataset,
                                  const Hyperparams& hp,
                                  const CrossValOptions& options, int view,
                                  int rank) {
    dataset.check();
    Hyperparams nmf_hp = hp;
    nmf_hp.dims = BlockDims{0, 0, rank, 0};
    nmf_hp.alpha = 0;
    nmf_hp.beta = 0;
    nmf_hp.gamma = 0;

    const int n = dataset.num_instances();
    CrossValResult result;
    for (int r = 0; r < options.repeats; ++r) {
        const auto folds = stratified_kfold(dataset.labels, options.folds, hp.seed + r);
        for (int f = 0; f < options.folds; ++f) {
            const std::vector<int> train_ids = complement_indices(n, folds[f]);
            MultiViewDataset train;
            train.num_classes = dataset.num_classes;
            train.views.push_back(view_columns(dataset, train_ids)[view]);
            train.labels.assign(train_ids.size(), kUnlabeled);

            const solver::FitResult fitted = solver::fit(train, nmf_hp);
            const FoldInResult folded = fold_in(
                fitted.model, {view_columns(dataset, folds[f])[view]}, nmf_hp);
            const std::vector<int> predicted = knn_predict(
                fitted.model.h_sd[0], labels_at(dataset.labels, train_ids),
                folded.coefficients.h_sd[0]);
            result.fold_scores.push_back(
                {r, f, accuracy(predicted, labels_at(dataset.labels, folds[f]))});
        }
    }
    finish_stats(result);
    return result;
}

std::string results_csv_string(const std::vector<MethodScores>& methods,
                               const std::string& dataset_name) {
    std::ostringstream out;
    out << "method,dataset,repeat,fold,accuracy,mean,std\n";
    for (const MethodScores& m : methods) {
        for (const FoldScore& s : m.result.fold_scores)
            out << m.method << ',' << dataset_name << ',' << s.repeat << ',' << s.fold
                << ',' << format_double(s.accuracy) << ",,\n";
        out << m.method << ',' << dataset_name << ",,,,"
            << format_double(m.result.mean) << ',' << format_double(m.result.stddev)
            << '\n';
    }
    return out.str();
}

void write_results_csv(const std::vector<MethodScores>& methods,
                       const std::string& dataset_name, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << results_csv_string(methods, dataset_name);
    if (!out) throw DataError("failed writing " + path);
}

}  // namespace mvdnmf::eval
