#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mkvlab {

/// Non-owning view of a weighted point cloud in R^d. Null weights mean the
/// uniform weights 1/count.
struct MeasureView {
    const double* points = nullptr;  // count x dim, row-major
    const double* weights = nullptr;
    std::size_t count = 0;
    int dim = 1;

    double weight(std::size_t i) const { return weights ? weights[i] : 1.0 / static_cast<double>(count); }
    std::span<const double> point(std::size_t i) const {
        return {points + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
    }
    double total_mass() const;
};

struct WeightedSampleMeasure {
    int dim = 1;
    std::vector<double> points;   // count x dim
    std::vector<double> weights;  // empty = uniform

    std::size_t count() const { return points.size() / static_cast<std::size_t>(dim); }
    MeasureView view() const {
        return {points.data(), weights.empty() ? nullptr : weights.data(), count(), dim};
    }

    static WeightedSampleMeasure dirac(std::span<const double> x);
    static WeightedSampleMeasure equal(int dim, std::vector<double> pts);

    /// Throws unless weights are nonnegative and sum to 1 within tol.
    void validate(double tol = 1e-9) const;
};

}  // namespace mkvlab
