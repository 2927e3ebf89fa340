#include "mkvlab/ops.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "mkvlab/hermite.hpp"

namespace mkvlab::ops {

namespace {

void require_probability(const MeasureView& lambda) {
    if (std::abs(lambda.total_mass() - 1.0) > 1e-9)
        throw std::invalid_argument("characteristics: measure is not a probability (mass != 1)");
    if (lambda.weights)
        for (std::size_t i = 0; i < lambda.count; ++i)
            if (lambda.weights[i] < 0)
                throw std::invalid_argument("characteristics: negative weight");
}

}  // namespace

double apply_L(const OperatorContext& ctx, const MeasureView& lambda, const TestFunction& phi,
               std::span<const double> x) {
    const auto& cs = *ctx.cs;
    const int d = cs.dim, m = cs.noise_dim;
    const auto dd = static_cast<std::size_t>(d);
    const auto mm = static_cast<std::size_t>(m);
    if (phi.dim != d || static_cast<int>(x.size()) != d)
        throw std::invalid_argument("apply_L: dimension mismatch");
    std::vector<double> bv(dd), sg(dd * dd), sb(dd * mm), grad(dd), hess(dd * dd);
    cs.drift(ctx.t, x.data(), lambda, bv.data());
    cs.sigma(ctx.t, x.data(), lambda, sg.data());
    cs.sigma_bar(ctx.t, x.data(), lambda, sb.data());
    double v = 0;
    phi.eval(x, &v, grad.data(), hess.data());
    double out = 0;
    for (std::size_t a = 0; a < dd; ++a) out += bv[a] * grad[a];
    // a = sigma sigma^T + sigma_bar sigma_bar^T, contracted against the
    // symmetrized Hessian
    for (std::size_t a = 0; a < dd; ++a)
        for (std::size_t b = 0; b < dd; ++b) {
            double aa = 0;
            for (std::size_t k = 0; k < dd; ++k) aa += sg[a * dd + k] * sg[b * dd + k];
            for (std::size_t k = 0; k < mm; ++k) aa += sb[a * mm + k] * sb[b * mm + k];
            out += 0.5 * aa * 0.5 * (hess[a * dd + b] + hess[b * dd + a]);
        }
    return out;
}

double char_A(const OperatorContext& ctx, const MeasureView& lambda, const TestFunction& phi) {
    require_probability(lambda);
    double acc = 0;
    for (std::size_t i = 0; i < lambda.count; ++i)
        acc += lambda.weight(i) * apply_L(ctx, lambda, phi, lambda.point(i));
    return acc;
}

double char_Q(const OperatorContext& ctx, const MeasureView& lambda, const TestFunction& phi,
              const TestFunction& psi) {
    require_probability(lambda);
    const auto& cs = *ctx.cs;
    const auto dd = static_cast<std::size_t>(cs.dim);
    const auto mm = static_cast<std::size_t>(cs.noise_dim);
    std::vector<double> sb(dd * mm), g1(dd), g2(dd), r1(mm, 0.0), r2(mm, 0.0);
    double v = 0;
    for (std::size_t i = 0; i < lambda.count; ++i) {
        const auto x = lambda.point(i);
        const double w = lambda.weight(i);
        cs.sigma_bar(ctx.t, x.data(), lambda, sb.data());
        phi.eval(x, &v, g1.data(), nullptr);
        psi.eval(x, &v, g2.data(), nullptr);
        for (std::size_t c = 0; c < mm; ++c) {
            double a1 = 0, a2 = 0;
            for (std::size_t a = 0; a < dd; ++a) {
                a1 += sb[a * mm + c] * g1[a];
                a2 += sb[a * mm + c] * g2[a];
            }
            r1[c] += w * a1;
            r2[c] += w * a2;
        }
    }
    double out = 0;
    for (std::size_t c = 0; c < mm; ++c) out += r1[c] * r2[c];
    return out;
}

double char_C(const OperatorContext& ctx, const MeasureView& lambda, const TestFunction& phi,
              const TestFunction& psi) {
    require_probability(lambda);
    const auto& cs = *ctx.cs;
    const auto dd = static_cast<std::size_t>(cs.dim);
    std::vector<double> sg(dd * dd), g1(dd), g2(dd);
    double v = 0, out = 0;
    for (std::size_t i = 0; i < lambda.count; ++i) {
        const auto x = lambda.point(i);
        const double w = lambda.weight(i);
        cs.sigma(ctx.t, x.data(), lambda, sg.data());
        phi.eval(x, &v, g1.data(), nullptr);
        psi.eval(x, &v, g2.data(), nullptr);
        double dot = 0;
        for (std::size_t c = 0; c < dd; ++c) {
            double a1 = 0, a2 = 0;
            for (std::size_t a = 0; a < dd; ++a) {
                a1 += sg[a * dd + c] * g1[a];
                a2 += sg[a * dd + c] * g2[a];
            }
            dot += a1 * a2;
        }
        out += w * dot;
    }
    return out;
}

CharacteristicValues characteristics(const OperatorContext& ctx, const MeasureView& lambda,
                                     const TestFunction& phi, const TestFunction& psi) {
    CharacteristicValues v;
    v.A = char_A(ctx, lambda, phi);
    v.Q = char_Q(ctx, lambda, phi, psi);
    v.C = char_C(ctx, lambda, phi, psi);
    return v;
}

double tight_generator_bound(const coeffs::CoefficientSet& cs, double phi_seminorm1,
                             double phi_seminorm2) {
    return cs.drift_sup * phi_seminorm1 +
           0.5 * (cs.sigma_sup * cs.sigma_sup + cs.sigma_bar_sup * cs.sigma_bar_sup) * phi_seminorm2;
}

double drift_bound(const coeffs::CoefficientSet& cs, const TestFunction& phi,
                   const UniformGrid& probe) {
    return cs.generator_constant() * hermite::seminorm_m_star(phi, 2, probe);
}

}  // namespace mkvlab::ops
