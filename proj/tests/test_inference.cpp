#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mvdnmf/errors.hpp"
#include "mvdnmf/inference.hpp"
#include "mvdnmf/synthetic.hpp"
#include "oracles.hpp"

using namespace mvdnmf;

namespace {

Hyperparams hp_with(BlockDims dims, std::uint64_t seed = 0) {
    Hyperparams hp;
    hp.dims = dims;
    hp.seed = seed;
    return hp;
}

SyntheticData small_planted(std::uint64_t seed, int n = 90) {
    SyntheticSpec spec;
    spec.n = n;
    spec.c = 3;
    spec.n_v = 2;
    spec.m = {12, 16};
    spec.dims = {3, 1, 3, 1};
    spec.sigma = 0.05;
    spec.delta = 1.0;
    spec.seed = seed;
    return generate_synthetic(spec);
}

}  // namespace

TEST_CASE("predict_proba is uniform when projections are zero") {
    const auto data = oracle::random_dataset(6, 3, {4, 5}, 60);
    const FactorModel model = init_model(data, hp_with({2, 1, 2, 1}));
    const Matrix p = predict_proba(model, training_coefficients(model));
    CHECK(p.rows() == 3);
    CHECK(p.cols() == 6);
    for (Eigen::Index j = 0; j < p.cols(); ++j)
        for (Eigen::Index i = 0; i < p.rows(); ++i)
            CHECK(p(i, j) == doctest::Approx(1.0 / 3).epsilon(1e-14));
}

TEST_CASE("single-view prediction equals that view's softmax") {
    const auto data = oracle::random_dataset(5, 3, {4}, 61);
    FactorModel model = init_model(data, hp_with({2, 0, 1, 0}, 61));
    oracle::randomize_b(model, 62);
    const Matrix p = predict_proba(model, training_coefficients(model));
    const Matrix expect =
        objective::softmax_columns(objective::softmax_logits(model, 0));
    CHECK(p == expect);
}

TEST_CASE("two-view prediction averages the softmax columns") {
    MultiViewDataset data = oracle::random_dataset(2, 2, {3, 3}, 63);
    FactorModel model = init_model(data, hp_with({1, 0, 1, 0}, 63));
    model.h_cd << 1.0, 0.5;
    model.b_cd << 0.7, -0.4;
    model.h_sd[0] << 0.2, 0.9;
    model.h_sd[1] << 0.8, 0.1;
    model.b_sd[0] << 1.1, 0.3;
    model.b_sd[1] << -0.2, 0.6;

    const Matrix p = predict_proba(model, training_coefficients(model));
    for (int j = 0; j < 2; ++j) {
        double expect[2] = {0, 0};
        for (int v = 0; v < 2; ++v) {
            double z[2];
            for (int i = 0; i < 2; ++i)
                z[i] = model.b_cd(i, 0) * model.h_cd(j, 0) +
                       model.b_sd[v](i, 0) * model.h_sd[v](j, 0);
            const double denom = std::exp(z[0]) + std::exp(z[1]);
            expect[0] += std::exp(z[0]) / denom;
            expect[1] += std::exp(z[1]) / denom;
        }
        CHECK(p(0, j) == doctest::Approx(expect[0] / 2).epsilon(1e-14));
        CHECK(p(1, j) == doctest::Approx(expect[1] / 2).epsilon(1e-14));
    }
    for (int j = 0; j < 2; ++j)
        CHECK(p.col(j).sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("label prediction takes the argmax with low ties") {
    Matrix probs(3, 2);
    probs << 0.2, 0.5, 0.5, 0.5, 0.3, 0.0;
    const auto labels = predict_labels(probs);
    CHECK(labels[0] == 1);  // 0.5 beats 0.2 and 0.3
    CHECK(labels[1] == 0);  // exact tie goes to the lowest class
}

TEST_CASE("argmax is invariant under monotone probability transforms") {
    const auto data = oracle::random_dataset(12, 4, {5}, 64);
    FactorModel model = init_model(data, hp_with({2, 0, 2, 0}, 64));
    oracle::randomize_b(model, 65);
    const Matrix p = predict_proba(model, training_coefficients(model));
    const auto base = predict_labels(p);
    const Matrix cubed = p.array().pow(3).matrix();
    const Matrix affine = (2.0 * p).array() + 1.0;
    CHECK(predict_labels(cubed) == base);
    CHECK(predict_labels(affine) == base);
}

TEST_CASE("fold_in of all-zero instances stays at zero") {
    const auto planted = small_planted(66, 40);
    Hyperparams hp = hp_with(planted.planted.dims, 66);
    hp.max_iters = 40;
    const auto fitted = solver::fit(planted.dataset, hp);

    std::vector<Matrix> zero_views;
    for (const Matrix& x : planted.dataset.views)
        zero_views.push_back(Matrix::Zero(x.rows(), 3));
    const FoldInResult folded = fold_in(fitted.model, zero_views, hp);
    CHECK(folded.coefficients.h_cd.isZero(0.0));
    CHECK(folded.coefficients.h_cn.isZero(0.0));
    CHECK(folded.coefficients.h_sd[0].isZero(0.0));
    CHECK(folded.coefficients.h_sn[1].isZero(0.0));
    CHECK(folded.status == solver::FitStatus::Converged);
}

TEST_CASE("fold_in never touches basis or projection blocks") {
    const auto planted = small_planted(67, 50);
    Hyperparams hp = hp_with(planted.planted.dims, 67);
    hp.max_iters = 30;
    const auto fitted = solver::fit(planted.dataset, hp);
    const FactorModel before = fitted.model;

    std::vector<Matrix> new_views;
    for (const Matrix& x : planted.dataset.views) new_views.push_back(x.leftCols(7));
    fold_in(fitted.model, new_views, hp);
    for (int v = 0; v < 2; ++v) {
        CHECK(fitted.model.w_cd[v] == before.w_cd[v]);
        CHECK(fitted.model.w_cn[v] == before.w_cn[v]);
        CHECK(fitted.model.w_sd[v] == before.w_sd[v]);
        CHECK(fitted.model.w_sn[v] == before.w_sn[v]);
        CHECK(fitted.model.b_sd[v] == before.b_sd[v]);
    }
    CHECK(fitted.model.b_cd == before.b_cd);
    CHECK(fitted.model.h_cd == before.h_cd);  // training coefficients too
}

TEST_CASE("fold_in of a training column reproduces its residual") {
    const auto planted = small_planted(68, 60);
    Hyperparams hp = hp_with(planted.planted.dims, 68);
    hp.max_iters = 80;
    const auto fitted = solver::fit(planted.dataset, hp);

    const int j = 11;
    std::vector<Matrix> one_column;
    for (const Matrix& x : planted.dataset.views) one_column.push_back(x.col(j));
    const FoldInResult folded = fold_in(fitted.model, one_column, hp);

    double train_sq = 0;
    double fold_sq = 0;
    for (int v = 0; v < 2; ++v) {
        train_sq +=
            objective::residual(fitted.model, planted.dataset, v).col(j).squaredNorm();
        Matrix recon = Matrix::Zero(one_column[v].rows(), 1);
        recon += fitted.model.w_cd[v] * folded.coefficients.h_cd.transpose();
        recon += fitted.model.w_cn[v] * folded.coefficients.h_cn.transpose();
        recon += fitted.model.w_sd[v] * folded.coefficients.h_sd[v].transpose();
        recon += fitted.model.w_sn[v] * folded.coefficients.h_sn[v].transpose();
        fold_sq += (one_column[v] - recon).squaredNorm();
    }
    CHECK(std::sqrt(fold_sq) <= 2.0 * std::sqrt(train_sq));
}

TEST_CASE("fold_in accuracy tracks the transductive accuracy on planted data") {
    const auto planted = small_planted(69, 120);
    const int n_train = 90;
    std::vector<int> train_ids, test_ids;
    for (int j = 0; j < 120; ++j)
        (j < n_train ? train_ids : test_ids).push_back(j);

    const MultiViewDataset train = planted.dataset.select_instances(train_ids);
    Hyperparams hp = hp_with(planted.planted.dims, 69);
    hp.max_iters = 100;
    const auto fitted = solver::fit(train, hp);

    const auto transductive =
        predict_labels(fitted.model, training_coefficients(fitted.model));
    std::vector<int> train_truth, test_truth;
    for (int j : train_ids) train_truth.push_back(planted.true_labels[j]);
    for (int j : test_ids) test_truth.push_back(planted.true_labels[j]);
    double acc_train = 0;
    for (size_t j = 0; j < train_truth.size(); ++j)
        acc_train += transductive[j] == train_truth[j] ? 1.0 : 0.0;
    acc_train /= train_truth.size();

    std::vector<Matrix> test_views;
    for (const Matrix& x : planted.dataset.views) {
        Matrix sub(x.rows(), static_cast<Eigen::Index>(test_ids.size()));
        for (size_t j = 0; j < test_ids.size(); ++j) sub.col(j) = x.col(test_ids[j]);
        test_views.push_back(std::move(sub));
    }
    const FoldInResult folded = fold_in(fitted.model, test_views, hp);
    const auto inductive = predict_labels(fitted.model, folded.coefficients);
    double acc_test = 0;
    for (size_t j = 0; j < test_truth.size(); ++j)
        acc_test += inductive[j] == test_truth[j] ? 1.0 : 0.0;
    acc_test /= test_truth.size();

    CHECK(acc_test >= acc_train - 0.05);
}

TEST_CASE("fold_in validates the new views") {
    const auto planted = small_planted(70, 30);
    Hyperparams hp = hp_with(planted.planted.dims, 70);
    hp.max_iters = 10;
    const auto fitted = solver::fit(planted.dataset, hp);

    SUBCASE("wrong view count") {
        CHECK_THROWS_AS(fold_in(fitted.model, {planted.dataset.views[0]}, hp), DataError);
    }
    SUBCASE("wrong feature dimension") {
        std::vector<Matrix> bad = {Matrix::Zero(5, 2), Matrix::Zero(16, 2)};
        CHECK_THROWS_AS(fold_in(fitted.model, bad, hp), DataError);
    }
    SUBCASE("mismatched instance counts") {
        std::vector<Matrix> bad = {Matrix::Zero(12, 2), Matrix::Zero(16, 3)};
        CHECK_THROWS_AS(fold_in(fitted.model, bad, hp), DataError);
    }
}

TEST_CASE("discriminative feature matrix layout") {
    SUBCASE("no view-specific block returns the common block alone") {
        const auto data = oracle::random_dataset(7, 2, {4, 5}, 71);
        FactorModel model = init_model(data, hp_with({3, 1, 0, 1}, 71));
        CHECK(discriminative_features(model) == model.h_cd);
    }
    SUBCASE("no common block concatenates the view blocks") {
        const auto data = oracle::random_dataset(6, 2, {4, 5}, 72);
        FactorModel model = init_model(data, hp_with({0, 1, 2, 1}, 72));
        const Matrix f = discriminative_features(model);
        CHECK(f.cols() == 4);  // 2 views x k3 = 2
        CHECK(f.leftCols(2) == model.h_sd[0]);
        CHECK(f.rightCols(2) == model.h_sd[1]);
    }
    SUBCASE("blocks appear verbatim") {
        const auto data = oracle::random_dataset(8, 3, {4, 5}, 73);
        FactorModel model = init_model(data, hp_with({2, 1, 3, 1}, 73));
        const Matrix f = discriminative_features(model);
        CHECK(f.cols() == 2 + 2 * 3);
        CHECK(f.middleCols(0, 2) == model.h_cd);
        CHECK(f.middleCols(2, 3) == model.h_sd[0]);
        CHECK(f.middleCols(5, 3) == model.h_sd[1]);
    }
}
