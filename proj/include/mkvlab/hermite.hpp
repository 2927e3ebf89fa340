#pragma once

#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "mkvlab/common.hpp"
#include "mkvlab/measure.hpp"
#include "mkvlab/test_functions.hpp"

namespace mkvlab::hermite {

// Basis convention: with g the standard normal density, the axis functions
// are f_j(x) = (j!)^{-1/2} He_j(x) g(x)^{1/2}, evaluated through the
// normalized three-term recurrence
//   f_0(x) = (2pi)^{-1/4} exp(-x^2/4),  f_{j+1} = (x f_j - sqrt(j) f_{j-1}) / sqrt(j+1),
// which never forms He_j or j! explicitly. Index j here corresponds to the
// (j+1)'st function of the 1-based convention in the literature. Tensor
// products over axes give the basis on R^d.

inline constexpr int kMaxDegree = 8192;

struct MultiIndex {
    std::vector<int> k;

    MultiIndex() = default;
    MultiIndex(std::initializer_list<int> entries) : k(entries) {}
    explicit MultiIndex(std::vector<int> entries) : k(std::move(entries)) {}

    int dim() const { return static_cast<int>(k.size()); }
    int max_entry() const;
    /// <k> = (1 + |k|^2)^{1/2}; equals 1 at the zero index.
    double bracket() const;
    void validate() const;
};

/// Fills out[j] = f_j(x) for j = 0..out.size()-1 on one axis.
void eval_axis(double x, std::span<double> out);

/// h_k(x) as the product of axis evaluations.
double eval(const MultiIndex& k, std::span<const double> x);

struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
    /// Nodes of the n-point rule mapped to [a, b].
    static GaussLegendre on(int n, double a, double b);
};

/// Quadrature domain for coefficient integrals; the caller guarantees the
/// integrand's mass is captured by [-half_width, half_width]^d.
struct Quadrature {
    double half_width = 12.0;
    int nodes = 400;
};

struct HermiteBasis {
    int dim = 1;
    int max_degree = 60;

    HermiteBasis(int dim_, int max_degree_);

    double eval(const MultiIndex& k, std::span<const double> x) const;
    double sup_bound() const;  // (2pi)^{d/4}, the uniform bound
    /// Max |<h_j, h_k> - delta_jk| over axis degrees <= upto under quad.
    double orthonormality_error(const Quadrature& quad, int upto) const;
};

struct CoeffVector {
    int dim = 1;
    int kmax = 0;
    std::vector<double> c;  // (kmax+1)^dim, row-major over axes

    static CoeffVector zeros(int dim, int kmax);

    std::size_t flat(const MultiIndex& k) const;
    double at(const MultiIndex& k) const { return c[flat(k)]; }
    double& at(const MultiIndex& k) { return c[flat(k)]; }

    std::string to_json() const;
    static CoeffVector from_json(const std::string& text);
};

/// Quadrature Hermite coefficients of a function on R^d (d <= 2). Appends a
/// note to *warning when the integrand is not negligible at the domain
/// boundary (domain too small).
CoeffVector coeffs_of_function(const std::function<double(std::span<const double>)>& f,
                               const HermiteBasis& basis, const Quadrature& quad,
                               std::string* warning = nullptr);

/// Coefficients of a weighted sample measure: sum_i w_i h_k(x_i).
CoeffVector coeffs_of_measure(const MeasureView& mu, int dim, int kmax);

/// Truncated H_p norm (sum over k of (<k>^{p/d} c_k)^2)^{1/2}.
double hp_norm(const CoeffVector& v, double p);

/// Truncated duality pairing sum_k lambda_k phi_k; truncations must match.
double pairing(const CoeffVector& lambda, const CoeffVector& phi);

/// Grid-maximized lower estimate of max_{|a|<=m} sup |<x>^m D^a phi|.
/// Orders <= 2 use the supplied derivatives, higher orders central
/// differences on top of them.
double seminorm_m_star(const TestFunction& phi, int m, const UniformGrid& probe);

}  // namespace mkvlab::hermite
