#include "mvdnmf/synthetic.hpp"

#include <random>
#include <string>

#include "mvdnmf/errors.hpp"

namespace mvdnmf {

namespace {

void fill_unit(Matrix& m, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = unit(rng);
}

// Class-coded coefficients: component t belongs to class t mod c; rows of
// that class get delta on top of the U(0,0.1) base.
Matrix fill_discriminative(int n, int k, const std::vector<int>& labels, int c,
                           double delta, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> base(0.0, 0.1);
    Matrix h(n, k);
    for (int t = 0; t < k; ++t) {
        const int owner = t % c;
        for (int j = 0; j < n; ++j)
            h(j, t) = base(rng) + (labels[j] == owner ? delta : 0.0);
    }
    return h;
}

}  // namespace

void SyntheticSpec::check() const {
    if (n < 1) throw DataError("synthetic spec: n must be >= 1");
    if (c < 2) throw DataError("synthetic spec: c must be >= 2");
    if (n_v < 1) throw DataError("synthetic spec: n_v must be >= 1");
    if (static_cast<int>(m.size()) != n_v)
        throw DataError("synthetic spec: need one feature dim per view (" +
                        std::to_string(m.size()) + " given for " +
                        std::to_string(n_v) + " views)");
    for (int dim : m)
        if (dim < 1) throw DataError("synthetic spec: feature dims must be >= 1");
    dims.check();
    if (sigma < 0) throw DataError("synthetic spec: sigma must be >= 0");
    if (delta <= 0) throw DataError("synthetic spec: delta must be > 0");
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
    spec.check();
    std::mt19937_64 rng(spec.seed);

    SyntheticData out;
    out.true_labels.resize(spec.n);
    for (int j = 0; j < spec.n; ++j) out.true_labels[j] = j % spec.c;

    FactorModel& planted = out.planted;
    planted.dims = spec.dims;
    planted.num_classes = spec.c;
    for (int v = 0; v < spec.n_v; ++v) {
        Matrix wcd(spec.m[v], spec.dims.k1), wcn(spec.m[v], spec.dims.k2);
        Matrix wsd(spec.m[v], spec.dims.k3), wsn(spec.m[v], spec.dims.k4);
        fill_unit(wcd, rng);
        fill_unit(wcn, rng);
        fill_unit(wsd, rng);
        fill_unit(wsn, rng);
        planted.w_cd.push_back(std::move(wcd));
        planted.w_cn.push_back(std::move(wcn));
        planted.w_sd.push_back(std::move(wsd));
        planted.w_sn.push_back(std::move(wsn));
    }
    planted.h_cd = fill_discriminative(spec.n, spec.dims.k1, out.true_labels, spec.c,
                                       spec.delta, rng);
    planted.h_cn.resize(spec.n, spec.dims.k2);
    fill_unit(planted.h_cn, rng);
    for (int v = 0; v < spec.n_v; ++v) {
        planted.h_sd.push_back(fill_discriminative(spec.n, spec.dims.k3,
                                                   out.true_labels, spec.c,
                                                   spec.delta, rng));
        Matrix hsn(spec.n, spec.dims.k4);
        fill_unit(hsn, rng);
        planted.h_sn.push_back(std::move(hsn));
    }
    planted.b_cd = Matrix::Zero(spec.c, spec.dims.k1);
    for (int v = 0; v < spec.n_v; ++v)
        planted.b_sd.push_back(Matrix::Zero(spec.c, spec.dims.k3));

    out.dataset.num_classes = spec.c;
    out.dataset.labels = out.true_labels;
    std::normal_distribution<double> noise(0.0, spec.sigma > 0 ? spec.sigma : 1.0);
    for (int v = 0; v < spec.n_v; ++v) {
        Matrix x = Matrix::Zero(spec.m[v], spec.n);
        if (spec.dims.k1 > 0) x.noalias() += planted.w_cd[v] * planted.h_cd.transpose();
        if (spec.dims.k2 > 0) x.noalias() += planted.w_cn[v] * planted.h_cn.transpose();
        if (spec.dims.k3 > 0)
            x.noalias() += planted.w_sd[v] * planted.h_sd[v].transpose();
        if (spec.dims.k4 > 0)
            x.noalias() += planted.w_sn[v] * planted.h_sn[v].transpose();
        if (spec.sigma > 0) {
            for (Eigen::Index j = 0; j < x.cols(); ++j)
                for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, j) += noise(rng);
            x = x.cwiseMax(0.0);
        }
        out.dataset.views.push_back(std::move(x));
    }
    out.dataset.check();
    return out;
}

}  // namespace mvdnmf
