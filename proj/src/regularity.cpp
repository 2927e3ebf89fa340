#include "mkvlab/regularity.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace mkvlab::reg {

namespace {

std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

// complex DFT via FFTW; planning is serialized, execution is per-plan
void dft(std::vector<std::complex<double>>& data, const std::vector<int>& shape, bool inverse) {
    fftw_plan plan;
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    {
        std::lock_guard<std::mutex> lk(fftw_planner_mutex());
        plan = fftw_plan_dft(static_cast<int>(shape.size()), shape.data(), ptr, ptr,
                             inverse ? FFTW_BACKWARD : FFTW_FORWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lk(fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }
    if (inverse) {
        double count = 1;
        for (int s : shape) count *= s;
        for (auto& v : data) v /= count;
    }
}

int next_pow2(int n) {
    int p = 1;
    while (p < n) p *= 2;
    return p;
}

}  // namespace

double GridDensity::mass() const {
    double s = 0;
    for (std::size_t i = 0; i < values.size(); ++i) s += grid.trapezoid_weight(i) * values[i];
    return s * grid.cell_volume();
}

void GridDensity::finalize() {
    grid.validate();
    if (values.size() != grid.size()) throw std::invalid_argument("GridDensity: value count mismatch");
    for (double v : values)
        if (v < 0) throw std::invalid_argument("GridDensity: negative value");
    mass_warning = std::abs(mass() - 1.0) > 1e-3;
}

WeightedSampleMeasure GridDensity::as_measure() const {
    WeightedSampleMeasure m;
    m.dim = grid.dim;
    const std::size_t npts = grid.size();
    m.points.resize(npts * static_cast<std::size_t>(grid.dim));
    m.weights.resize(npts);
    double total = 0;
    for (std::size_t i = 0; i < npts; ++i) {
        grid.point(i, m.points.data() + i * static_cast<std::size_t>(grid.dim));
        m.weights[i] = grid.trapezoid_weight(i) * values[i];
        total += m.weights[i];
    }
    if (total <= 0) throw std::runtime_error("GridDensity::as_measure: zero mass");
    for (double& w : m.weights) w /= total;
    return m;
}

GridDensity estimate_density_block(const sim::SimConfig& cfg, const coeffs::CoefficientSet& cs,
                                   double t, double eps, const UniformGrid& grid, int rep_begin,
                                   int rep_end, int workers) {
    grid.validate();
    if (grid.dim != cfg.d) throw std::invalid_argument("estimate_density: grid dim mismatch");
    if (cfg.d > 2) throw std::invalid_argument("estimate_density: dim > 2 not supported");
    if (rep_begin < 0 || rep_end > cfg.replications || rep_begin >= rep_end)
        throw std::invalid_argument("estimate_density: bad replication block");
    const int jt = cfg.grid_index(t);
    const int je = cfg.grid_index(t - eps);
    if (jt - je < 4)
        throw std::invalid_argument("estimate_density: eps must cover at least 4 substeps (eps >= 4 dt)");

    const std::size_t npts = grid.size();
    const auto nblocks = static_cast<std::size_t>(rep_end - rep_begin);
    // per-replication partial grids, merged in index order afterwards
    std::vector<std::vector<double>> partial(nblocks);
    std::vector<int> ok(nblocks, 0);
    parallel_for(nblocks, workers, [&](std::size_t slot) {
        const int rep = rep_begin + static_cast<int>(slot);
        const auto path = sim::simulate_replication(cfg, cs, rep);
        if (!path.ok) return;
        const auto mix = sim::one_step_gaussian(path, cfg, cs, t, eps);
        mix.validate(1e-12);  // refuses degenerate covariance
        auto& buf = partial[slot];
        buf.assign(npts, 0.0);
        std::vector<double> y(static_cast<std::size_t>(cfg.d));
        if (cfg.d == 1) {
            for (const auto& comp : mix.components) {
                const double mu = comp.mean[0];
                const double var = comp.cov[0];
                const double inv2v = 0.5 / var;
                const double norm = 1.0 / std::sqrt(2 * std::numbers::pi * var);
                for (std::size_t p = 0; p < npts; ++p) {
                    const double dy = grid.origin[0] + grid.spacing[0] * static_cast<double>(p) - mu;
                    buf[p] += norm * std::exp(-dy * dy * inv2v);
                }
            }
        } else {
            for (const auto& comp : mix.components) {
                for (std::size_t p = 0; p < npts; ++p) {
                    grid.point(p, y.data());
                    // 2x2 pdf via the mixture component directly
                    const double a = comp.cov[0], b = comp.cov[1], c = comp.cov[3];
                    const double det = a * c - b * b;
                    const double dx = y[0] - comp.mean[0], dy = y[1] - comp.mean[1];
                    const double qf = (c * dx * dx - 2 * b * dx * dy + a * dy * dy) / det;
                    buf[p] += std::exp(-0.5 * qf) / (2 * std::numbers::pi * std::sqrt(det));
                }
            }
        }
        const double cw = 1.0 / static_cast<double>(mix.components.size());
        for (double& v : buf) v *= cw;
        ok[slot] = 1;
    });

    GridDensity out;
    out.grid = grid;
    out.values.assign(npts, 0.0);
    std::size_t used = 0;
    for (std::size_t slot = 0; slot < nblocks; ++slot) {
        if (!ok[slot]) continue;
        ++used;
        for (std::size_t p = 0; p < npts; ++p) out.values[p] += partial[slot][p];
    }
    if (used == 0) throw std::runtime_error("estimate_density: every replication aborted");
    for (double& v : out.values) v /= static_cast<double>(used);
    out.finalize();
    if (out.mass_warning)
        throw std::runtime_error("estimate_density: grid too small, trapezoid mass off by > 1e-3");
    return out;
}

GridDensity estimate_density(const sim::SimConfig& cfg, const coeffs::CoefficientSet& cs, double t,
                             double eps, const UniformGrid& grid, int workers) {
    return estimate_density_block(cfg, cs, t, eps, grid, 0, cfg.replications, workers);
}

double lr_norm(const GridDensity& p, double r) {
    if (r < 1) throw std::invalid_argument("lr_norm: need r >= 1");
    double s = 0;
    for (std::size_t i = 0; i < p.values.size(); ++i)
        s += p.grid.trapezoid_weight(i) * std::pow(std::abs(p.values[i]), r);
    return std::pow(s * p.grid.cell_volume(), 1.0 / r);
}

namespace {

double bessel_norm_values(std::span<const double> values, const UniformGrid& grid, double r,
                          double s, int min_fft_size, std::string* warning,
                          bool homogeneous = false) {
    const int d = grid.dim;
    std::vector<int> shape(static_cast<std::size_t>(d));
    std::vector<std::vector<double>> xifreq(static_cast<std::size_t>(d));
    std::size_t total = 1;
    for (int a = 0; a < d; ++a) {
        const int n = grid.counts[static_cast<std::size_t>(a)];
        int nfft = next_pow2(4 * n);
        if (min_fft_size > 0) nfft = std::max(nfft, next_pow2(min_fft_size));
        shape[static_cast<std::size_t>(a)] = nfft;
        total *= static_cast<std::size_t>(nfft);
        auto& xs = xifreq[static_cast<std::size_t>(a)];
        xs.resize(static_cast<std::size_t>(nfft));
        const double dxi = 2 * std::numbers::pi / (nfft * grid.spacing[static_cast<std::size_t>(a)]);
        for (int k = 0; k < nfft; ++k) {
            const int kk = k <= nfft / 2 ? k : k - nfft;
            xs[static_cast<std::size_t>(k)] = dxi * kk;
        }
    }

    std::vector<std::complex<double>> buf(total, 0.0);
    // embed the samples into the zero-padded box
    if (d == 1) {
        for (int i = 0; i < grid.counts[0]; ++i) buf[static_cast<std::size_t>(i)] = values[static_cast<std::size_t>(i)];
    } else {
        const int n0 = grid.counts[0], n1 = grid.counts[1], f1 = shape[1];
        for (int i = 0; i < n0; ++i)
            for (int j = 0; j < n1; ++j)
                buf[static_cast<std::size_t>(i) * f1 + j] = values[static_cast<std::size_t>(i) * n1 + j];
    }
    dft(buf, shape, false);

    // aliasing check: spectrum should have decayed at the Nyquist band
    if (warning) {
        double peak = 0, tail = 0;
        if (d == 1) {
            const int nfft = shape[0];
            for (int k = 0; k < nfft; ++k) peak = std::max(peak, std::abs(buf[static_cast<std::size_t>(k)]));
            for (int k = 3 * nfft / 8; k <= nfft / 2; ++k)
                tail = std::max(tail, std::abs(buf[static_cast<std::size_t>(k)]));
        } else {
            for (std::size_t k = 0; k < total; ++k) peak = std::max(peak, std::abs(buf[k]));
            const int half0 = shape[0] / 2, f1 = shape[1];
            for (int j = 0; j < f1; ++j)
                tail = std::max(tail, std::abs(buf[static_cast<std::size_t>(half0) * f1 + j]));
        }
        if (peak > 0 && tail > 1e-4 * peak)
            *warning += "bessel_norm: high-frequency tail above 1e-4 of the peak (aliasing); ";
    }

    if (d == 1) {
        for (int k = 0; k < shape[0]; ++k) {
            const double xi = xifreq[0][static_cast<std::size_t>(k)];
            buf[static_cast<std::size_t>(k)] *=
                homogeneous ? std::pow(std::abs(xi), s) : std::pow(1.0 + xi * xi, 0.5 * s);
        }
    } else {
        const int f1 = shape[1];
        for (int k0 = 0; k0 < shape[0]; ++k0)
            for (int k1 = 0; k1 < f1; ++k1) {
                const double x0 = xifreq[0][static_cast<std::size_t>(k0)];
                const double x1 = xifreq[1][static_cast<std::size_t>(k1)];
                buf[static_cast<std::size_t>(k0) * f1 + k1] *= std::pow(1.0 + x0 * x0 + x1 * x1, 0.5 * s);
            }
    }
    dft(buf, shape, true);

    // L^r on the original grid (trapezoid)
    double acc = 0;
    if (d == 1) {
        for (int i = 0; i < grid.counts[0]; ++i) {
            const double w = (i == 0 || i + 1 == grid.counts[0]) ? 0.5 : 1.0;
            acc += w * std::pow(std::abs(buf[static_cast<std::size_t>(i)].real()), r);
        }
    } else {
        const int n0 = grid.counts[0], n1 = grid.counts[1], f1 = shape[1];
        for (int i = 0; i < n0; ++i)
            for (int j = 0; j < n1; ++j) {
                double w = 1.0;
                if (i == 0 || i + 1 == n0) w *= 0.5;
                if (j == 0 || j + 1 == n1) w *= 0.5;
                acc += w * std::pow(std::abs(buf[static_cast<std::size_t>(i) * f1 + j].real()), r);
            }
    }
    return std::pow(acc * grid.cell_volume(), 1.0 / r);
}

}  // namespace

double bessel_norm(const GridDensity& p, double r, double s, int min_fft_size, std::string* warning) {
    if (r <= 1) throw std::invalid_argument("bessel_norm: need r > 1");
    if (p.grid.dim > 2) throw std::invalid_argument("bessel_norm: dim > 2 not supported");
    return bessel_norm_values(p.values, p.grid, r, s, min_fft_size, warning);
}

DecayFit coupling_rate(const sim::SimConfig& cfg, const coeffs::CoefficientSet& cs, double t,
                       std::span<const double> eps_list, double q, int workers) {
    if (!cfg.store_noise)
        throw std::invalid_argument("coupling_rate: config must set store_noise");
    const int jt = cfg.grid_index(t);
    std::vector<int> jes;
    for (double eps : eps_list) {
        const int je = cfg.grid_index(t - eps);
        if (je >= jt) throw std::invalid_argument("coupling_rate: eps must be positive");
        jes.push_back(je);
    }
    const auto reps = static_cast<std::size_t>(cfg.replications);
    const auto ne = eps_list.size();
    std::vector<double> gaps(ne * reps, std::numeric_limits<double>::quiet_NaN());
    const int d = cfg.d, m = cfg.m;
    const auto dd = static_cast<std::size_t>(d);
    const auto mm = static_cast<std::size_t>(m);

    sim::for_each_replication(cfg, cs, workers, [&](const sim::ReplicationPath& path) {
        if (!path.ok) return;
        std::vector<double> sg(dd * dd), sb(dd * mm), y(dd);
        for (std::size_t e = 0; e < ne; ++e) {
            const int je = jes[e];
            const MeasureView mu = path.measure_at(je);
            double acc = 0;
            for (int i = 0; i < path.n; ++i) {
                const auto xs = path.state(je, i);
                y.assign(xs.begin(), xs.end());
                // frozen coefficients over [t-eps, t], driven by the same noise
                for (int l = je; l < jt; ++l) {
                    cs.sigma(cfg.time_at(l), xs.data(), mu, sg.data());
                    const auto db = path.idio_increment(i, l);
                    for (std::size_t a = 0; a < dd; ++a) {
                        double v = 0;
                        for (std::size_t b = 0; b < dd; ++b) v += sg[a * dd + b] * db[b];
                        y[a] += v;
                    }
                }
                cs.sigma_bar(cfg.time_at(je), xs.data(), mu, sb.data());
                const auto zt = path.common_noise_at(jt);
                const auto ze = path.common_noise_at(je);
                for (std::size_t a = 0; a < dd; ++a)
                    for (std::size_t c = 0; c < mm; ++c) y[a] += sb[a * mm + c] * (zt[c] - ze[c]);
                const auto xt = path.state(jt, i);
                double g2 = 0;
                for (std::size_t a = 0; a < dd; ++a) g2 += (xt[a] - y[a]) * (xt[a] - y[a]);
                acc += std::pow(g2, 0.5 * q);
            }
            gaps[e * reps + static_cast<std::size_t>(path.rep)] = acc / path.n;
        }
    });

    DecayFit fit;
    fit.target = 0.5 + 0.5 * cs.holder_beta;
    for (std::size_t e = 0; e < ne; ++e) {
        std::vector<double> vals;
        for (std::size_t rp = 0; rp < reps; ++rp) {
            const double v = gaps[e * reps + rp];
            if (std::isfinite(v)) vals.push_back(v);
        }
        if (vals.empty()) throw std::runtime_error("coupling_rate: every replication aborted");
        const auto ms = mean_se(vals);
        fit.abscissae.push_back(eps_list[e]);
        fit.ordinates.push_back(std::pow(ms.mean, 1.0 / q));
        // delta-method SE for the q-th root
        fit.ses.push_back(ms.mean > 0 ? ms.se * std::pow(ms.mean, 1.0 / q - 1.0) / q : 0.0);
    }
    const bool all_zero = std::all_of(fit.ordinates.begin(), fit.ordinates.end(),
                                      [](double v) { return v == 0.0; });
    if (all_zero) {
        fit.exponent = 0;
        fit.exponent_se = 0;
        fit.ci_lo = fit.ci_hi = 0;
        return fit;
    }
    const auto lf = loglog_fit(fit.abscissae, fit.ordinates);
    fit.exponent = lf.slope;
    fit.exponent_se = lf.slope_se;
    fit.ci_lo = lf.slope - 2 * lf.slope_se;
    fit.ci_hi = lf.slope + 2 * lf.slope_se;
    return fit;
}

InterpolationParams select_interpolation(int d, double xi) {
    if (d < 1) throw std::invalid_argument("select_interpolation: d < 1");
    if (!(xi > 0)) throw std::invalid_argument("select_interpolation: xi <= 0");
    InterpolationParams p;
    p.xi = xi;
    p.r_conj = std::max(2.1, 2.0 * static_cast<double>(d));
    p.r = p.r_conj / (p.r_conj - 1.0);
    const double dr = static_cast<double>(d) / p.r_conj;
    p.s = 0.5 * (2.0 - dr);
    p.gamma = 0.5 * (dr + p.s);
    p.u = 1.0 + dr;
    p.feasible = p.gamma < 1.0;
    return p;
}

double interpolation_bound(const InterpolationParams& p, double c_a, double c_e) {
    if (c_a < 0 || c_e < 0) throw std::invalid_argument("interpolation_bound: negative constants");
    const double dr = p.r_conj > 0 ? p.gamma * 2.0 : 0.0;  // d/r' + s
    return c_a * std::pow(p.eps0, -0.5 * dr) + c_e * std::pow(p.eps0, 0.5 * (1.0 + p.xi));
}

DecayFit blowup_fit(const sim::SimConfig& cfg, const coeffs::CoefficientSet& cs,
                    std::span<const double> ts, double r, double eps_max, const UniformGrid& grid,
                    int blocks, int workers) {
    if (ts.size() < 4) throw std::invalid_argument("blowup_fit: need at least 4 time points");
    if (blocks < 2) throw std::invalid_argument("blowup_fit: need at least 2 replication blocks");
    DecayFit fit;
    std::vector<std::vector<double>> block_norms(static_cast<std::size_t>(blocks));
    const int per_block = cfg.replications / blocks;
    if (per_block < 1) throw std::invalid_argument("blowup_fit: fewer replications than blocks");

    for (double t : ts) {
        const double eps = std::min(t, eps_max);
        // full-sample norm
        const auto dens = estimate_density(cfg, cs, t, eps, grid, workers);
        fit.abscissae.push_back(t);
        fit.ordinates.push_back(lr_norm(dens, r));
        // per-block norms for the CI on the exponent
        for (int b = 0; b < blocks; ++b) {
            const int lo = b * per_block;
            const int hi = (b + 1 == blocks) ? cfg.replications : (b + 1) * per_block;
            const auto part = estimate_density_block(cfg, cs, t, eps, grid, lo, hi, workers);
            block_norms[static_cast<std::size_t>(b)].push_back(lr_norm(part, r));
        }
    }
    const auto lf = loglog_fit(fit.abscissae, fit.ordinates);
    fit.exponent = lf.slope;
    fit.exponent_se = lf.slope_se;
    std::vector<double> block_slopes;
    for (int b = 0; b < blocks; ++b)
        block_slopes.push_back(loglog_fit(fit.abscissae, block_norms[static_cast<std::size_t>(b)]).slope);
    const auto ms = mean_se(block_slopes);
    fit.ci_lo = fit.exponent - 2 * ms.se;
    fit.ci_hi = fit.exponent + 2 * ms.se;
    fit.ses.assign(ts.size(), 0.0);
    return fit;
}

double gaussian_bessel_norm(double eps, double r, double s, double half_width, int points,
                            bool homogeneous) {
    GridDensity p;
    p.grid = UniformGrid::line(-half_width, half_width, points);
    p.values.resize(p.grid.size());
    for (std::size_t i = 0; i < p.values.size(); ++i) {
        const double x = p.grid.origin[0] + p.grid.spacing[0] * static_cast<double>(i);
        p.values[i] = std::exp(-0.5 * x * x / eps) / std::sqrt(2 * std::numbers::pi * eps);
    }
    p.finalize();
    return bessel_norm_values(p.values, p.grid, r, s, 0, nullptr, homogeneous);
}

std::vector<double> gaussian_scaling_ratios(std::span<const double> eps_list, double r, double s,
                                            double half_width, int points, bool homogeneous) {
    const double rp = r / (r - 1.0);
    const double gamma_s = 0.5 * (s + 1.0 / rp);
    const double ref = gaussian_bessel_norm(1.0, r, s, half_width, points, homogeneous);
    std::vector<double> out;
    for (double eps : eps_list)
        out.push_back(gaussian_bessel_norm(eps, r, s, half_width, points, homogeneous) /
                      (std::pow(eps, -gamma_s) * ref));
    return out;
}

}  // namespace mkvlab::reg
