#pragma once

#include <span>

#include "mkvlab/coeffs.hpp"
#include "mkvlab/common.hpp"
#include "mkvlab/measure.hpp"
#include "mkvlab/test_functions.hpp"

namespace mkvlab::ops {

struct OperatorContext {
    const coeffs::CoefficientSet* cs = nullptr;
    double t = 0;
};

/// (L_t(lambda)phi)(x) = b . grad phi + (1/2) a : hess phi with
/// a = sigma sigma^T + sigma_bar sigma_bar^T symmetrized before contraction.
double apply_L(const OperatorContext& ctx, const MeasureView& lambda, const TestFunction& phi,
               std::span<const double> x);

/// A_t(lambda)[phi] = lambda[L_t(lambda) phi]. Throws when lambda is not a
/// probability measure (the map is +infinity off the probability simplex).
double char_A(const OperatorContext& ctx, const MeasureView& lambda, const TestFunction& phi);

/// Q_t(lambda)[phi,psi] = lambda[sigma_bar^T grad phi] . lambda[sigma_bar^T grad psi].
double char_Q(const OperatorContext& ctx, const MeasureView& lambda, const TestFunction& phi,
              const TestFunction& psi);

/// C_t(lambda)[phi,psi] = lambda[(sigma^T grad phi) . (sigma^T grad psi)].
double char_C(const OperatorContext& ctx, const MeasureView& lambda, const TestFunction& phi,
              const TestFunction& psi);

/// The three characteristics evaluated together on a (phi, psi) pair.
/// Q and C are symmetric in (phi, psi) and nonnegative on the diagonal.
struct CharacteristicValues {
    double A = 0;  // of phi
    double Q = 0;
    double C = 0;
};

CharacteristicValues characteristics(const OperatorContext& ctx, const MeasureView& lambda,
                                     const TestFunction& phi, const TestFunction& psi);

/// ||b|| s1 + (||sigma||^2 + ||sigma_bar||^2)/2 s2, the two-seminorm bound
/// on |char_A|.
double tight_generator_bound(const coeffs::CoefficientSet& cs, double phi_seminorm1,
                             double phi_seminorm2);

/// Certified coarse bound c_{b,sigma,sigma_bar} ||phi||_2*, seminorm taken on
/// the probe grid.
double drift_bound(const coeffs::CoefficientSet& cs, const TestFunction& phi,
                   const UniformGrid& probe);

}  // namespace mkvlab::ops
