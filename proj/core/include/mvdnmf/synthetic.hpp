#pragma once

#include "mvdnmf/model.hpp"

namespace mvdnmf {

// Parameters of the planted-model generator. Data is produced from a
// ground-truth factorization with the same block structure the solver
// estimates, so recovery can be checked against a known answer.
struct SyntheticSpec {
    int n = 200;   // instances
    int c = 4;     // classes
    int n_v = 2;   // views
    std::vector<int> m = {30, 40};  // per-view feature dims
    BlockDims dims{4, 2, 4, 2};
    double sigma = 0.01;  // additive Gaussian noise, clamped at zero
    double delta = 1.0;   // class-separation strength
    std::uint64_t seed = 0;

    void check() const;  // throws DataError

    // True when every class gets at least one discriminative component
    // (k1 + k3 >= c); generation proceeds either way.
    bool class_coverage_ok() const { return dims.k1 + dims.k3 >= c; }
};

struct SyntheticData {
    MultiViewDataset dataset;  // fully labeled
    FactorModel planted;       // generating factorization (B blocks zero)
    std::vector<int> true_labels;
};

// Labels are assigned round-robin. Discriminative coefficient rows get
// delta + U(0,0.1) in the components assigned to their class (components
// cycle through classes) and U(0,0.1) elsewhere; non-discriminative
// coefficients and all bases are U(0,1). Each view is the planted
// product plus N(0,sigma) noise clamped at zero. Pure function of the
// spec.
SyntheticData generate_synthetic(const SyntheticSpec& spec);

}  // namespace mvdnmf
