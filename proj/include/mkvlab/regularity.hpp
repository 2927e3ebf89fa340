#pragma once

#include <span>
#include <string>
#include <vector>

#include "mkvlab/coeffs.hpp"
#include "mkvlab/common.hpp"
#include "mkvlab/sim.hpp"

namespace mkvlab::reg {

struct GridDensity {
    UniformGrid grid;
    std::vector<double> values;
    bool mass_warning = false;  // trapezoid mass off 1 by more than 1e-3

    double mass() const;
    void finalize();  // validates shapes, nonnegativity; sets mass_warning
    /// Weighted sample view (nodes with normalized trapezoid weights), so a
    /// grid density can stand in wherever a sampled measure is accepted.
    WeightedSampleMeasure as_measure() const;
};

/// Pooled single-particle marginal density at time t through the one-step
/// Gaussian predictor with window eps: the mixture over all replications and
/// particles of N(X_{t-eps}, Sigma_{eps,t}), evaluated on the grid.
/// Requires eps >= 4 dt (covariance aggregated over >= 4 substeps) and a
/// grid that captures the mass. Degenerate covariances are an error.
GridDensity estimate_density(const sim::SimConfig& cfg, const coeffs::CoefficientSet& cs, double t,
                             double eps, const UniformGrid& grid, int workers);

/// Same pooling restricted to a replication block [rep_begin, rep_end).
GridDensity estimate_density_block(const sim::SimConfig& cfg, const coeffs::CoefficientSet& cs,
                                   double t, double eps, const UniformGrid& grid, int rep_begin,
                                   int rep_end, int workers);

/// Trapezoid approximation of (int |p|^r)^{1/r}.
double lr_norm(const GridDensity& p, double r);

/// Bessel-potential norm ||J^s p||_{L^r} with J^s the Fourier multiplier
/// <xi>^s in angular frequency, computed on a zero-padded discrete transform
/// (d = 1 or 2). Appends to *warning when the spectrum has not decayed at
/// the grid's Nyquist frequency (aliasing).
double bessel_norm(const GridDensity& p, double r, double s, int min_fft_size = 0,
                   std::string* warning = nullptr);

struct DecayFit {
    std::vector<double> abscissae;
    std::vector<double> ordinates;
    std::vector<double> ses;
    double exponent = 0;     // of the fitted power law ordinate ~ abscissa^exponent
    double exponent_se = 0;
    double ci_lo = 0, ci_hi = 0;
    double target = 0;
};

/// L^q norms of the coupling gap |X_t - Y_t^{eps,t}| per eps (the predictor
/// built from the same noise), with the fitted decay exponent in eps.
/// Requires cfg.store_noise.
DecayFit coupling_rate(const sim::SimConfig& cfg, const coeffs::CoefficientSet& cs, double t,
                       std::span<const double> eps_list, double q, int workers);

struct InterpolationParams {
    double r = 0;       // 1 < r < 2
    double r_conj = 0;  // r' = r/(r-1)
    double s = 0;
    double xi = 0;
    double gamma = 0;   // (d/r' + s)/2
    double u = 0;       // 1 + d/r'
    double eps0 = 1.0;
    bool feasible = false;  // gamma < 1
};

/// Feasible (r, s) with gamma < 1: r' = max(2.1, 2d), s = (2 - d/r')/2.
InterpolationParams select_interpolation(int d, double xi);

/// c_a eps0^{-(d/r'+s)/2} + c_e eps0^{(1+xi)/2} (outer constant reported as 1).
double interpolation_bound(const InterpolationParams& p, double c_a, double c_e);

/// ||p^{1,n}(t)||_{L^r} over a t-list with eps(t) = min(t, eps_max), fitted
/// decay exponent of the small-t branch (gamma-hat = -slope), block-resampled
/// CI over replications.
DecayFit blowup_fit(const sim::SimConfig& cfg, const coeffs::CoefficientSet& cs,
                    std::span<const double> ts, double r, double eps_max, const UniformGrid& grid,
                    int blocks, int workers);

/// Per-eps ratios ||N(0,eps)||_{H_r^s} / (eps^{-(s+d/r')/2} ||N(0,1)||_{H_r^s})
/// in d=1: the discrete probe of the Gaussian scaling identity. The identity
/// is exact for the homogeneous symbol |xi|^s; with the inhomogeneous <xi>^s
/// the same quotient is only an upper-bounded one (ratios <= 1).
std::vector<double> gaussian_scaling_ratios(std::span<const double> eps_list, double r, double s,
                                            double half_width, int points,
                                            bool homogeneous = false);

/// ||N(0, eps I)||_{H_r^s} on an analytic grid (d=1 helper for scaling fits);
/// homogeneous switches the multiplier from <xi>^s to |xi|^s.
double gaussian_bessel_norm(double eps, double r, double s, double half_width, int points,
                            bool homogeneous = false);

}  // namespace mkvlab::reg
