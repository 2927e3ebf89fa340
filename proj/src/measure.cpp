#include "mkvlab/measure.hpp"

#include <cmath>
#include <stdexcept>

namespace mkvlab {

double MeasureView::total_mass() const {
    if (!weights) return count == 0 ? 0.0 : 1.0;
    double s = 0;
    for (std::size_t i = 0; i < count; ++i) s += weights[i];
    return s;
}

WeightedSampleMeasure WeightedSampleMeasure::dirac(std::span<const double> x) {
    WeightedSampleMeasure m;
    m.dim = static_cast<int>(x.size());
    m.points.assign(x.begin(), x.end());
    m.weights = {1.0};
    return m;
}

WeightedSampleMeasure WeightedSampleMeasure::equal(int dim, std::vector<double> pts) {
    if (dim < 1 || pts.empty() || pts.size() % static_cast<std::size_t>(dim) != 0)
        throw std::invalid_argument("WeightedSampleMeasure::equal: bad point buffer");
    WeightedSampleMeasure m;
    m.dim = dim;
    m.points = std::move(pts);
    return m;
}

void WeightedSampleMeasure::validate(double tol) const {
    if (dim < 1) throw std::invalid_argument("measure: dim < 1");
    if (!weights.empty()) {
        if (weights.size() != count()) throw std::invalid_argument("measure: weight/point mismatch");
        double s = 0;
        for (double w : weights) {
            if (w < 0) throw std::invalid_argument("measure: negative weight");
            s += w;
        }
        if (std::abs(s - 1.0) > tol) throw std::invalid_argument("measure: total mass != 1");
    }
}

}  // namespace mkvlab
