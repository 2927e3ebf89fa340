#pragma once

#include "mkvlab/coeffs.hpp"

namespace testutil {

inline mkvlab::coeffs::CoefficientSet zero_set(int d = 1, int m = 1) {
    mkvlab::coeffs::CoefficientSet cs;
    cs.dim = d;
    cs.noise_dim = m;
    cs.drift = mkvlab::coeffs::fields::zero(d);
    cs.sigma = mkvlab::coeffs::fields::zero(d * d);
    cs.sigma_bar = mkvlab::coeffs::fields::zero(d * m);
    return cs;
}

/// b=0, sigma=I, sigma_bar=0
inline mkvlab::coeffs::CoefficientSet bm_set(int d = 1) {
    auto cs = zero_set(d, 1);
    cs.sigma = mkvlab::coeffs::fields::scaled_identity(d, 1.0);
    cs.sigma_sup = 1.0;
    cs.kappa = 1.0;
    return cs;
}

/// sigma=0, sigma_bar=1 (degenerate, all particles ride the common noise)
inline mkvlab::coeffs::CoefficientSet common_only_set() {
    auto cs = zero_set(1, 1);
    cs.sigma_bar = mkvlab::coeffs::fields::constant({1.0});
    cs.sigma_bar_sup = 1.0;
    return cs;
}

inline mkvlab::coeffs::CoefficientSet drifted_bm_set(double b, int d = 1) {
    auto cs = bm_set(d);
    cs.drift = mkvlab::coeffs::fields::constant(std::vector<double>(static_cast<std::size_t>(d), b));
    cs.drift_sup = std::abs(b);
    return cs;
}

}  // namespace testutil
