#include "mkvlab/coeffs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "mkvlab/hermite.hpp"
#include "mkvlab/rng.hpp"

namespace mkvlab::coeffs {

double drift_indicator(std::span<const double> x, const MeasureView& mu, double R) {
    if (!(R > 0)) throw std::invalid_argument("drift_indicator: R <= 0");
    if (static_cast<int>(x.size()) != mu.dim) throw std::invalid_argument("drift_indicator: dim mismatch");
    const double r2 = R * R;
    double mass = 0;
    for (std::size_t i = 0; i < mu.count; ++i) {
        const auto y = mu.point(i);
        double q = 0;
        for (int a = 0; a < mu.dim; ++a) q += (y[a] - x[a]) * (y[a] - x[a]);
        if (q < r2) mass += mu.weight(i);
    }
    return mass;
}

double drift_hk(double x, const MeasureView& mu, double R) {
    if (mu.dim != 1) throw std::invalid_argument("drift_hk: only d=1");
    double s = 0;
    for (std::size_t i = 0; i < mu.count; ++i) {
        const double u = x - mu.point(i)[0];
        if (std::abs(u) <= R) s += mu.weight(i) * u;
    }
    return -s;
}

namespace fields {

CoeffField zero(int out_size) {
    return [out_size](double, const double*, const MeasureView&, double* out) {
        std::fill(out, out + out_size, 0.0);
    };
}

CoeffField constant(std::vector<double> values) {
    return [values](double, const double*, const MeasureView&, double* out) {
        std::copy(values.begin(), values.end(), out);
    };
}

CoeffField scaled_identity(int d, double s) {
    return [d, s](double, const double*, const MeasureView&, double* out) {
        std::fill(out, out + d * d, 0.0);
        for (int a = 0; a < d; ++a) out[a * d + a] = s;
    };
}

CoeffField indicator_drift(int d, double R) {
    return [d, R](double, const double* x, const MeasureView& mu, double* out) {
        const double v = drift_indicator({x, static_cast<std::size_t>(d)}, mu, R);
        std::fill(out, out + d, v);
    };
}

CoeffField hk_drift(double R) {
    return [R](double, const double* x, const MeasureView& mu, double* out) {
        out[0] = drift_hk(x[0], mu, R);
    };
}

CoeffField hk_mollified_drift(double R, double delta) {
    // tabulate the mollified kernel k * h_delta once, k(u) = u 1_{|u|<=R}
    const std::size_t table_n = 8193;
    const double lim = R + delta;
    auto table = std::make_shared<std::vector<double>>(table_n);
    {
        Mollifier moll(1, delta);
        const int conv = 4096;
        std::vector<double> u(conv), w(conv);
        double wsum = 0;
        for (int q = 0; q < conv; ++q) {
            u[static_cast<std::size_t>(q)] = -1.0 + (q + 0.5) * 2.0 / conv;
            const double uu = u[static_cast<std::size_t>(q)];
            w[static_cast<std::size_t>(q)] = moll.profile({&uu, 1});
            wsum += w[static_cast<std::size_t>(q)];
        }
        for (double& ww : w) ww /= wsum;
        for (std::size_t i = 0; i < table_n; ++i) {
            const double xv = -lim + static_cast<double>(i) * (2 * lim) / (table_n - 1);
            double s = 0;
            for (int q = 0; q < conv; ++q) {
                const double arg = xv - delta * u[static_cast<std::size_t>(q)];
                if (std::abs(arg) <= R) s += w[static_cast<std::size_t>(q)] * arg;
            }
            (*table)[i] = s;
        }
    }
    return [lim, table](double, const double* x, const MeasureView& mu, double* out) {
        const double step = (2 * lim) / static_cast<double>(table->size() - 1);
        double s = 0;
        for (std::size_t i = 0; i < mu.count; ++i) {
            const double u = x[0] - mu.point(i)[0];
            if (std::abs(u) >= lim) continue;
            const double pos = (u + lim) / step;
            const auto i0 = static_cast<std::size_t>(pos);
            const double frac = pos - static_cast<double>(i0);
            const double k =
                (*table)[i0] * (1 - frac) + (*table)[std::min(i0 + 1, table->size() - 1)] * frac;
            s += mu.weight(i) * k;
        }
        out[0] = -s;
    };
}

CoeffField step_drift() {
    return [](double, const double* x, const MeasureView&, double* out) {
        out[0] = x[0] <= 0.0 ? 1.0 : 0.0;
    };
}

CoeffField statistic_tanh_sigma(int d, double s0, double a) {
    return [d, s0, a](double, const double*, const MeasureView& mu, double* out) {
        double stat = 0;
        for (std::size_t i = 0; i < mu.count; ++i) stat += mu.weight(i) * std::tanh(mu.point(i)[0]);
        const double v = s0 * (1.0 + a * std::tanh(stat));
        std::fill(out, out + d * d, 0.0);
        for (int i = 0; i < d; ++i) out[i * d + i] = v;
    };
}

CoeffField holder_sqrt_sigma(double base, double amp, double cap) {
    return [base, amp, cap](double, const double* x, const MeasureView&, double* out) {
        out[0] = base + amp * std::min(std::sqrt(std::abs(x[0])), cap);
    };
}

CoeffField time_affine_sigma(double a, double b) {
    return [a, b](double t, const double*, const MeasureView&, double* out) {
        out[0] = a + b * t;
    };
}

}  // namespace fields

Mollifier::Mollifier(int dim_, double delta_) : dim(dim_), delta(delta_) {
    if (dim < 1 || dim > 2) throw std::invalid_argument("Mollifier: dim must be 1 or 2");
    if (!(delta > 0)) throw std::invalid_argument("Mollifier: delta <= 0");
    const auto gl = hermite::GaussLegendre::on(240, -1.0, 1.0);
    double mass = 0;
    if (dim == 1) {
        for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
            const double r2 = gl.nodes[q] * gl.nodes[q];
            if (r2 < 1.0) mass += gl.weights[q] * std::exp(-1.0 / (1.0 - r2));
        }
    } else {
        for (std::size_t q1 = 0; q1 < gl.nodes.size(); ++q1)
            for (std::size_t q2 = 0; q2 < gl.nodes.size(); ++q2) {
                const double r2 = gl.nodes[q1] * gl.nodes[q1] + gl.nodes[q2] * gl.nodes[q2];
                if (r2 < 1.0) mass += gl.weights[q1] * gl.weights[q2] * std::exp(-1.0 / (1.0 - r2));
            }
    }
    normalization = 1.0 / mass;
}

double Mollifier::profile(std::span<const double> u) const {
    double r2 = 0;
    for (double v : u) r2 += v * v;
    r2 /= support_radius * support_radius;
    if (r2 >= 1.0) return 0.0;
    return normalization * std::exp(-1.0 / (1.0 - r2));
}

double Mollifier::scaled(std::span<const double> x) const {
    std::vector<double> u(x.size());
    for (std::size_t a = 0; a < x.size(); ++a) u[a] = x[a] / delta;
    return profile(u) / std::pow(delta, dim);
}

double Mollifier::profile_mass(int nodes_per_axis) const {
    const double step = 2.0 / nodes_per_axis;
    double mass = 0;
    if (dim == 1) {
        for (int q = 0; q < nodes_per_axis; ++q) {
            const double u = -1.0 + (q + 0.5) * step;
            mass += profile({&u, 1}) * step;
        }
    } else {
        for (int q1 = 0; q1 < nodes_per_axis; ++q1)
            for (int q2 = 0; q2 < nodes_per_axis; ++q2) {
                const double u[2] = {-1.0 + (q1 + 0.5) * step, -1.0 + (q2 + 0.5) * step};
                mass += profile(u) * step * step;
            }
    }
    return mass;
}

std::vector<double> mollify_drift(const CoeffField& b, int d, double t, const MeasureView& mu,
                                  double delta, const UniformGrid& eval_grid,
                                  const MollifyOptions& opt) {
    if (!(delta > 0)) throw std::invalid_argument("mollify_drift: delta <= 0");
    eval_grid.validate();
    if (eval_grid.dim != d) throw std::invalid_argument("mollify_drift: grid dim mismatch");
    if (d > 2) throw std::invalid_argument("mollify_drift: dim > 2 not supported");
    Mollifier moll(d, delta);
    const int n = opt.conv_nodes_per_axis;
    const double conv_spacing = 2.0 * delta * moll.support_radius / n;
    if (conv_spacing > delta * moll.support_radius / 8.0)
        throw std::invalid_argument(
            "mollify_drift: convolution quadrature underresolved (need >= 16 nodes per axis)");

    // normalized midpoint weights over the unit box; b^delta is then a convex
    // combination of translates of b
    const double step = 2.0 / n;
    std::vector<double> nodes;
    std::vector<double> w;
    if (d == 1) {
        for (int q = 0; q < n; ++q) {
            const double u = -1.0 + (q + 0.5) * step;
            const double pw = moll.profile({&u, 1});
            if (pw > 0) {
                nodes.push_back(u);
                w.push_back(pw);
            }
        }
    } else {
        for (int q1 = 0; q1 < n; ++q1)
            for (int q2 = 0; q2 < n; ++q2) {
                const double u[2] = {-1.0 + (q1 + 0.5) * step, -1.0 + (q2 + 0.5) * step};
                const double pw = moll.profile(u);
                if (pw > 0) {
                    nodes.push_back(u[0]);
                    nodes.push_back(u[1]);
                    w.push_back(pw);
                }
            }
    }
    double wsum = 0;
    for (double v : w) wsum += v;
    for (double& v : w) v /= wsum;

    const std::size_t npts = eval_grid.size();
    const auto dd = static_cast<std::size_t>(d);
    std::vector<double> out(npts * dd, 0.0);
    std::vector<double> x(dd), shifted(dd), bval(dd);
    for (std::size_t p = 0; p < npts; ++p) {
        eval_grid.point(p, x.data());
        double* acc = &out[p * dd];
        for (std::size_t q = 0; q < w.size(); ++q) {
            for (std::size_t a = 0; a < dd; ++a) shifted[a] = x[a] - delta * nodes[q * dd + a];
            b(t, shifted.data(), mu, bval.data());
            for (std::size_t a = 0; a < dd; ++a) acc[a] += w[q] * bval[a];
        }
    }
    return out;
}

std::vector<CoeffSample> sample_coefficient_inputs(int d, std::size_t count, std::uint64_t seed,
                                                   double box, std::size_t support) {
    rng::UniformStream u(seed);
    std::vector<CoeffSample> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        CoeffSample s;
        s.t = u.in(0, 1);
        s.x.resize(static_cast<std::size_t>(d));
        for (double& v : s.x) v = u.in(-box, box);
        s.mu.dim = d;
        s.mu.points.resize(support * static_cast<std::size_t>(d));
        for (double& v : s.mu.points) v = u.in(-box, box);
        s.z.resize(static_cast<std::size_t>(d));
        double zn = 0;
        for (double& v : s.z) {
            v = u.in(-1, 1);
            zn += v * v;
        }
        if (zn == 0) s.z[0] = 1;
        out.push_back(std::move(s));
    }
    return out;
}

EllipticityReport check_ellipticity(const CoefficientSet& cs, std::span<const CoeffSample> samples) {
    EllipticityReport rep;
    rep.kappa = cs.kappa;
    rep.samples = samples.size();
    rep.min_quotient = std::numeric_limits<double>::infinity();
    const int d = cs.dim;
    const auto dd = static_cast<std::size_t>(d);
    std::vector<double> sig(dd * dd), sz(dd);
    for (const auto& s : samples) {
        cs.sigma(s.t, s.x.data(), s.mu.view(), sig.data());
        // z^T sigma sigma^T z equals |sigma^T z|^2
        double num = 0, den = 0;
        for (std::size_t a = 0; a < dd; ++a) {
            double acc = 0;
            for (std::size_t b = 0; b < dd; ++b) acc += sig[b * dd + a] * s.z[b];
            sz[a] = acc;
        }
        for (std::size_t a = 0; a < dd; ++a) {
            num += sz[a] * sz[a];
            den += s.z[a] * s.z[a];
        }
        rep.min_quotient = std::min(rep.min_quotient, num / den);
    }
    rep.pass = rep.min_quotient >= cs.kappa;
    return rep;
}

HolderReport check_holder(const CoefficientSet& cs,
                          std::span<const std::pair<CoeffSample, CoeffSample>> pairs, double C,
                          double beta) {
    HolderReport rep;
    rep.C = C;
    rep.beta = beta;
    rep.pairs = pairs.size();
    const auto dd = static_cast<std::size_t>(cs.dim);
    std::vector<double> s1(dd * dd), s2(dd * dd);
    for (const auto& [a, b] : pairs) {
        double w1 = 0;
        const bool same_measure = a.mu.points == b.mu.points && a.mu.weights == b.mu.weights;
        if (!same_measure) {
            if (cs.dim != 1)
                throw std::invalid_argument("check_holder: W1 is exact only in d=1; use equal measures");
            w1 = w1_distance(a.mu, b.mu);
        }
        cs.sigma(a.t, a.x.data(), a.mu.view(), s1.data());
        cs.sigma(b.t, b.x.data(), b.mu.view(), s2.data());
        double dist2 = 0, dx2 = 0;
        for (std::size_t i = 0; i < s1.size(); ++i) dist2 += (s1[i] - s2[i]) * (s1[i] - s2[i]);
        for (std::size_t i = 0; i < dd; ++i) dx2 += (a.x[i] - b.x[i]) * (a.x[i] - b.x[i]);
        const double denom = std::pow(std::sqrt(dx2), beta) + std::pow(w1, beta);
        if (denom > 0) rep.max_ratio = std::max(rep.max_ratio, std::sqrt(dist2) / denom);
    }
    rep.pass = rep.max_ratio <= C;
    return rep;
}

double w1_distance(const WeightedSampleMeasure& mu, const WeightedSampleMeasure& nu) {
    if (mu.dim != 1 || nu.dim != 1)
        throw std::invalid_argument("w1_distance: unsupported for dim > 1 (quantile coupling is d=1)");
    mu.validate();
    nu.validate();
    struct Event {
        double x;
        double df;
    };
    std::vector<Event> ev;
    ev.reserve(mu.count() + nu.count());
    for (std::size_t i = 0; i < mu.count(); ++i)
        ev.push_back({mu.points[i],
                      mu.weights.empty() ? 1.0 / static_cast<double>(mu.count()) : mu.weights[i]});
    for (std::size_t i = 0; i < nu.count(); ++i)
        ev.push_back({nu.points[i],
                      -(nu.weights.empty() ? 1.0 / static_cast<double>(nu.count()) : nu.weights[i])});
    std::sort(ev.begin(), ev.end(), [](const Event& a, const Event& b) { return a.x < b.x; });
    double dist = 0, cdf_gap = 0;
    for (std::size_t i = 0; i < ev.size(); ++i) {
        cdf_gap += ev[i].df;
        if (i + 1 < ev.size()) dist += std::abs(cdf_gap) * (ev[i + 1].x - ev[i].x);
    }
    return dist;
}

NarrowContinuityReport narrow_local_continuity_test(
    const MeasureDrift& b, const MeasureView& target,
    const std::function<WeightedSampleMeasure(std::size_t)>& approximant,
    std::span<const std::size_t> ks, const UniformGrid& compact_probe) {
    compact_probe.validate();
    NarrowContinuityReport rep;
    const std::size_t npts = compact_probe.size();
    std::vector<double> x(static_cast<std::size_t>(compact_probe.dim));
    std::vector<double> bt(npts);
    for (std::size_t p = 0; p < npts; ++p) {
        compact_probe.point(p, x.data());
        bt[p] = b(x, target);
    }
    for (std::size_t k : ks) {
        const WeightedSampleMeasure muk = approximant(k);
        const MeasureView v = muk.view();
        double gap = 0;
        for (std::size_t p = 0; p < npts; ++p) {
            compact_probe.point(p, x.data());
            gap = std::max(gap, std::abs(b(x, v) - bt[p]));
        }
        rep.ks.push_back(k);
        rep.sup_gaps.push_back(gap);
    }
    rep.decreasing = true;
    for (std::size_t i = 0; i + 1 < rep.sup_gaps.size(); ++i)
        if (rep.sup_gaps[i + 1] >= rep.sup_gaps[i]) rep.decreasing = false;
    return rep;
}

}  // namespace mkvlab::coeffs
