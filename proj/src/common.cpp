#include "mkvlab/common.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

namespace mkvlab {

UniformGrid UniformGrid::line(double lo, double hi, int n) {
    if (n < 2 || !(hi > lo)) throw std::invalid_argument("UniformGrid::line: need n >= 2 and hi > lo");
    UniformGrid g;
    g.dim = 1;
    g.origin = {lo};
    g.spacing = {(hi - lo) / (n - 1)};
    g.counts = {n};
    return g;
}

UniformGrid UniformGrid::box2(double lo, double hi, int n) {
    UniformGrid g = line(lo, hi, n);
    g.dim = 2;
    g.origin = {lo, lo};
    g.spacing = {g.spacing[0], g.spacing[0]};
    g.counts = {n, n};
    return g;
}

std::size_t UniformGrid::size() const {
    std::size_t s = 1;
    for (int c : counts) s *= static_cast<std::size_t>(c);
    return s;
}

void UniformGrid::point(std::size_t flat, double* out) const {
    for (int a = dim - 1; a >= 0; --a) {
        const auto c = static_cast<std::size_t>(counts[a]);
        out[a] = origin[a] + spacing[a] * static_cast<double>(flat % c);
        flat /= c;
    }
}

double UniformGrid::cell_volume() const {
    double v = 1;
    for (int a = 0; a < dim; ++a) v *= spacing[a];
    return v;
}

double UniformGrid::trapezoid_weight(std::size_t flat) const {
    double w = 1;
    for (int a = dim - 1; a >= 0; --a) {
        const auto c = static_cast<std::size_t>(counts[a]);
        const std::size_t i = flat % c;
        if (i == 0 || i + 1 == c) w *= 0.5;
        flat /= c;
    }
    return w;
}

void UniformGrid::validate() const {
    if (dim < 1 || static_cast<int>(origin.size()) != dim ||
        static_cast<int>(spacing.size()) != dim || static_cast<int>(counts.size()) != dim)
        throw std::invalid_argument("UniformGrid: inconsistent dimensions");
    for (int a = 0; a < dim; ++a)
        if (counts[a] < 2 || !(spacing[a] > 0))
            throw std::invalid_argument("UniformGrid: need counts >= 2 and spacing > 0");
}

LinFitResult linear_fit(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n != y.size() || n < 2) throw std::invalid_argument("linear_fit: need >= 2 matching points");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) { mx += x[i]; my += y[i]; }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx <= 0) throw std::invalid_argument("linear_fit: degenerate abscissae");
    LinFitResult f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double rss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        rss += r * r;
    }
    f.slope_se = (n > 2) ? std::sqrt(rss / (static_cast<double>(n) - 2.0) / sxx) : 0.0;
    return f;
}

LinFitResult loglog_fit(std::span<const double> x, std::span<const double> y) {
    std::vector<double> lx(x.size()), ly(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0) || !(y[i] > 0)) throw std::invalid_argument("loglog_fit: inputs must be positive");
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
    }
    return linear_fit(lx, ly);
}

MeanSE mean_se(std::span<const double> values) {
    MeanSE r;
    r.count = values.size();
    if (r.count == 0) return r;
    double m = 0;
    for (double v : values) m += v;
    m /= static_cast<double>(r.count);
    double s2 = 0;
    for (double v : values) s2 += (v - m) * (v - m);
    r.mean = m;
    r.se = (r.count > 1) ? std::sqrt(s2 / (static_cast<double>(r.count) - 1.0) / static_cast<double>(r.count)) : 0.0;
    return r;
}

double stable_mean(std::span<const double> values) {
    if (values.empty()) return 0;
    std::vector<double> tmp(values.begin(), values.end());
    std::sort(tmp.begin(), tmp.end());
    double s = 0;
    for (double v : tmp) s += v;
    return s / static_cast<double>(tmp.size());
}

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
    const int w = std::min<std::size_t>(std::max(1, workers), count == 0 ? 1 : count);
    if (count == 0) return;
    if (w == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex err_mutex;
    auto body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lk(err_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(w));
    for (int t = 0; t < w; ++t) pool.emplace_back(body);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

int resolve_workers(int requested) {
    if (requested > 0) return requested;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace mkvlab
