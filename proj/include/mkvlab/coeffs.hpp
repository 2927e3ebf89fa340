#pragma once

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mkvlab/common.hpp"
#include "mkvlab/measure.hpp"

namespace mkvlab::coeffs {

/// Coefficient field (t, x, mu) -> out. Output sizes: drift d, sigma d*d,
/// sigma_bar d*m, row-major. Fields must be pure and safe for concurrent
/// calls.
using CoeffField = std::function<void(double t, const double* x, const MeasureView& mu, double* out)>;

struct CoefficientSet {
    int dim = 1;
    int noise_dim = 1;
    CoeffField drift;
    CoeffField sigma;
    CoeffField sigma_bar;
    double drift_sup = 0;
    double sigma_sup = 0;
    double sigma_bar_sup = 0;
    double kappa = 0;           // declared ellipticity constant of sigma sigma^T
    double holder_beta = 1.0;   // declared Holder exponent

    /// c_{b,sigma,sigma_bar} = ||b|| + (||sigma||^2 + ||sigma_bar||^2)/2.
    double generator_constant() const {
        return drift_sup + 0.5 * (sigma_sup * sigma_sup + sigma_bar_sup * sigma_bar_sup);
    }
};

// --- example drifts -------------------------------------------------------

/// Mass of mu in the open ball of radius R around x.
double drift_indicator(std::span<const double> x, const MeasureView& mu, double R);

/// Hegselmann-Krause drift -sum_i w_i k(x - y_i), k(u) = u 1_{|u|<=R}; d=1.
double drift_hk(double x, const MeasureView& mu, double R);

namespace fields {
CoeffField zero(int out_size);
CoeffField constant(std::vector<double> values);
CoeffField scaled_identity(int d, double s);
CoeffField indicator_drift(int d, double R);
CoeffField hk_drift(double R);
CoeffField hk_mollified_drift(double R, double delta);
/// d=1 step drift 1_{x <= 0}.
CoeffField step_drift();
/// sigma(x, lambda) = s0 (1 + a tanh(lambda[rho])) I with rho(y) = tanh(y_1).
CoeffField statistic_tanh_sigma(int d, double s0, double a);
/// d=1 sigma(x) = base + amp * min(sqrt|x|, cap): Holder-1/2 in x.
CoeffField holder_sqrt_sigma(double base, double amp, double cap);
/// d=1 sigma(t) = (a + b t), state-independent.
CoeffField time_affine_sigma(double a, double b);
}  // namespace fields

// --- mollification --------------------------------------------------------

/// Compactly supported approximate identity: h(u) = c exp(-1/(1-|u|^2)) on
/// |u| < 1, zero outside, with c fixed so the quadrature mass is 1.
/// h_delta(x) = delta^{-d} h(x/delta).
struct Mollifier {
    int dim = 1;
    double delta = 0.1;
    double support_radius = 1.0;

    Mollifier(int dim_, double delta_);
    double profile(std::span<const double> u) const;  // h(u)
    double scaled(std::span<const double> x) const;   // h_delta(x)
    /// Quadrature mass of the profile under an n-node tensor rule.
    double profile_mass(int nodes_per_axis) const;

    double normalization = 0;
};

struct MollifyOptions {
    int conv_nodes_per_axis = 4096;  // d=1 default; use ~96 in d=2
};

/// Values of b^delta = b(t, ., mu) * h_delta on the evaluation grid
/// (grid.size() x d, row-major). The convolution is a normalized midpoint
/// rule over the support of h, so constants are reproduced exactly and
/// sup |b^delta| <= sup |b| holds by convexity.
std::vector<double> mollify_drift(const CoeffField& b, int d, double t, const MeasureView& mu,
                                  double delta, const UniformGrid& eval_grid,
                                  const MollifyOptions& opt = {});

// --- assumption checks ----------------------------------------------------

struct CoeffSample {
    double t = 0;
    std::vector<double> x;
    WeightedSampleMeasure mu;
    std::vector<double> z;  // direction for ellipticity quotients
};

std::vector<CoeffSample> sample_coefficient_inputs(int d, std::size_t count, std::uint64_t seed,
                                                   double box = 3.0, std::size_t support = 8);

struct EllipticityReport {
    double min_quotient = 0;
    double kappa = 0;
    std::size_t samples = 0;
    bool pass = false;
};

/// min over samples of z^T (sigma sigma^T) z / |z|^2 against declared kappa.
EllipticityReport check_ellipticity(const CoefficientSet& cs, std::span<const CoeffSample> samples);

struct HolderReport {
    double max_ratio = 0;
    double C = 0;
    double beta = 0;
    std::size_t pairs = 0;
    bool pass = false;
};

/// max over pairs of |sigma - sigma'|_F / (|x-x'|^beta + W1(mu,mu')^beta).
/// Exact W1 needs d=1; in higher dimension both measures of a pair must
/// coincide.
HolderReport check_holder(const CoefficientSet& cs,
                          std::span<const std::pair<CoeffSample, CoeffSample>> pairs, double C,
                          double beta);

/// Exact Kantorovich-Rubinstein distance of two discrete measures on R
/// (area between the CDFs). Unsupported for dim > 1.
double w1_distance(const WeightedSampleMeasure& mu, const WeightedSampleMeasure& nu);

// --- narrow local continuity (Assumption-style falsification probe) -------

using MeasureDrift = std::function<double(std::span<const double> x, const MeasureView& mu)>;

struct NarrowContinuityReport {
    std::vector<std::size_t> ks;
    std::vector<double> sup_gaps;
    bool decreasing = false;
};

/// sup_{x in K} |b(x, mu_k) - b(x, mu)| along a concrete approximating
/// sequence; a falsification probe, not a certificate.
NarrowContinuityReport narrow_local_continuity_test(
    const MeasureDrift& b, const MeasureView& target,
    const std::function<WeightedSampleMeasure(std::size_t)>& approximant,
    std::span<const std::size_t> ks, const UniformGrid& compact_probe);

}  // namespace mkvlab::coeffs
