#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mkvlab {

/// Uniform rectangular grid on a box in R^d, node i along axis a at
/// origin[a] + i * spacing[a].
struct UniformGrid {
    int dim = 1;
    std::vector<double> origin;
    std::vector<double> spacing;
    std::vector<int> counts;

    static UniformGrid line(double lo, double hi, int n);
    static UniformGrid box2(double lo, double hi, int n);

    std::size_t size() const;
    void point(std::size_t flat, double* out) const;
    double cell_volume() const;
    /// Trapezoid weight of a node (product of 1/2 at axis endpoints).
    double trapezoid_weight(std::size_t flat) const;
    void validate() const;
};

struct LinFitResult {
    double slope = 0;
    double intercept = 0;
    double slope_se = 0;
};

LinFitResult linear_fit(std::span<const double> x, std::span<const double> y);
LinFitResult loglog_fit(std::span<const double> x, std::span<const double> y);

struct MeanSE {
    double mean = 0;
    double se = 0;
    std::size_t count = 0;
};

MeanSE mean_se(std::span<const double> values);

/// Mean computed over a sorted copy: the result does not depend on the
/// order of the input values (exact exchangeability).
double stable_mean(std::span<const double> values);

/// Runs fn(i) for i in [0, count) on up to `workers` threads. Work items
/// must not depend on scheduling; the first thrown exception is rethrown.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

/// <=0 resolves to the hardware concurrency.
int resolve_workers(int requested);

std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t v);

/// Shortest-exact decimal formatting used by every writer (%.17g trimmed).
std::string format_double(double v);

}  // namespace mkvlab
