#include "mkvlab/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "mkvlab/rng.hpp"

namespace mkvlab::sim {

int SimConfig::grid_index(double t) const {
    const double pos = t / dt();
    const int j = static_cast<int>(std::lround(pos));
    if (j < 0 || j > steps || std::abs(pos - j) > 1e-9 * std::max(1.0, static_cast<double>(steps)))
        throw std::invalid_argument("SimConfig: time not aligned with the grid");
    return j;
}

void SimConfig::validate() const {
    if (n < 1) throw std::invalid_argument("sim.n: must be >= 1");
    if (d < 1) throw std::invalid_argument("sim.d: must be >= 1");
    if (m < 1) throw std::invalid_argument("sim.m: must be >= 1");
    if (!(T > 0)) throw std::invalid_argument("sim.T: must be > 0");
    if (steps < 1) throw std::invalid_argument("sim.steps: must be >= 1");
    if (replications < 1) throw std::invalid_argument("sim.replications: must be >= 1");
    if (!x0.empty() && static_cast<int>(x0.size()) != d)
        throw std::invalid_argument("sim.x0: size must match d");
}

int EmpiricalFlowEnsemble::aborted() const {
    int c = 0;
    for (const auto& r : reps)
        if (!r.ok) ++c;
    return c;
}

ReplicationPath simulate_replication(const SimConfig& cfg, const coeffs::CoefficientSet& cs, int rep) {
    cfg.validate();
    if (cs.dim != cfg.d || cs.noise_dim != cfg.m)
        throw std::invalid_argument("simulate: coefficient dimensions do not match the config");
    const int n = cfg.n, d = cfg.d, m = cfg.m, steps = cfg.steps;
    const auto nn = static_cast<std::size_t>(n);
    const auto dd = static_cast<std::size_t>(d);
    const auto mm = static_cast<std::size_t>(m);
    const auto ss = static_cast<std::size_t>(steps);
    const double dt = cfg.dt();
    const double sdt = std::sqrt(dt);

    ReplicationPath path;
    path.rep = rep;
    path.n = n;
    path.d = d;
    path.m = m;
    path.steps = steps;
    path.x.assign((ss + 1) * nn * dd, 0.0);
    path.z.assign((ss + 1) * mm, 0.0);
    path.db.assign(ss * nn * dd, 0.0);

    for (std::size_t i = 0; i < nn; ++i)
        for (std::size_t a = 0; a < dd; ++a)
            path.x[i * dd + a] = cfg.x0.empty() ? 0.0 : cfg.x0[a];

    // common-noise stream: one per replication, reused across n-sweeps
    {
        rng::NormalStream zs(rng::derive_seed(cfg.master_seed, static_cast<std::uint64_t>(rep),
                                              rng::kStreamCommonNoise, 0));
        for (std::size_t j = 0; j < ss; ++j)
            for (std::size_t c = 0; c < mm; ++c)
                path.z[(j + 1) * mm + c] = path.z[j * mm + c] + sdt * zs.next();
    }
    // idiosyncratic stream per particle, independent of n and worker count
    for (std::size_t i = 0; i < nn; ++i) {
        rng::NormalStream bs(rng::derive_seed(cfg.master_seed, static_cast<std::uint64_t>(rep),
                                              rng::kStreamIdiosyncratic, i));
        bs.fill({path.db.data() + i * ss * dd, ss * dd}, sdt);
    }

    std::vector<double> bv(dd), sg(dd * dd), sb(dd * mm);
    for (int j = 0; j < steps; ++j) {
        const double tj = cfg.time_at(j);
        const MeasureView mu = path.measure_at(j);
        const double* zfrom = path.z.data() + static_cast<std::size_t>(j) * mm;
        const double* zto = path.z.data() + (static_cast<std::size_t>(j) + 1) * mm;
        for (std::size_t i = 0; i < nn; ++i) {
            const double* xi = path.x.data() + (static_cast<std::size_t>(j) * nn + i) * dd;
            double* xo = path.x.data() + ((static_cast<std::size_t>(j) + 1) * nn + i) * dd;
            const double* dbi = path.db.data() + (i * ss + static_cast<std::size_t>(j)) * dd;
            cs.drift(tj, xi, mu, bv.data());
            cs.sigma(tj, xi, mu, sg.data());
            cs.sigma_bar(tj, xi, mu, sb.data());
            bool finite = true;
            for (std::size_t a = 0; a < dd; ++a) {
                double v = xi[a] + bv[a] * dt;
                for (std::size_t b = 0; b < dd; ++b) v += sg[a * dd + b] * dbi[b];
                for (std::size_t c = 0; c < mm; ++c) v += sb[a * mm + c] * (zto[c] - zfrom[c]);
                xo[a] = v;
                finite = finite && std::isfinite(v);
            }
            if (!finite) {
                path.ok = false;
                path.error = "nonfinite state at step " + std::to_string(j + 1) + ", particle " +
                             std::to_string(i) + "; replication aborted";
                if (!cfg.store_noise) path.db.clear();
                return path;
            }
        }
    }
    if (!cfg.store_noise) path.db.clear();
    return path;
}

EmpiricalFlowEnsemble simulate(const SimConfig& cfg, const coeffs::CoefficientSet& cs, int workers) {
    EmpiricalFlowEnsemble ens;
    ens.config = cfg;
    ens.reps.resize(static_cast<std::size_t>(cfg.replications));
    parallel_for(static_cast<std::size_t>(cfg.replications), workers,
                 [&](std::size_t r) { ens.reps[r] = simulate_replication(cfg, cs, static_cast<int>(r)); });
    return ens;
}

void for_each_replication(const SimConfig& cfg, const coeffs::CoefficientSet& cs, int workers,
                          const std::function<void(const ReplicationPath&)>& fn) {
    parallel_for(static_cast<std::size_t>(cfg.replications), workers,
                 [&](std::size_t r) { fn(simulate_replication(cfg, cs, static_cast<int>(r))); });
}

double eval_measure(const ReplicationPath& path, int j, const TestFunction& phi) {
    if (phi.dim != path.d) throw std::invalid_argument("eval_measure: dimension mismatch");
    if (j < 0 || j > path.steps) throw std::invalid_argument("eval_measure: step index out of range");
    std::vector<double> vals(static_cast<std::size_t>(path.n));
    for (int i = 0; i < path.n; ++i) vals[static_cast<std::size_t>(i)] = phi.value(path.state(j, i));
    return stable_mean(vals);
}

namespace {

double rep_sup_moment(const ReplicationPath& p, double q) {
    // mean over particles of sup_t |X_t^i|^q
    double acc = 0;
    for (int i = 0; i < p.n; ++i) {
        double sup2 = 0;
        for (int j = 0; j <= p.steps; ++j) {
            const auto xi = p.state(j, i);
            double n2 = 0;
            for (double v : xi) n2 += v * v;
            sup2 = std::max(sup2, n2);
        }
        acc += std::pow(sup2, 0.5 * q);
    }
    return acc / p.n;
}

bool rep_excursion(const ReplicationPath& p, double K, double eps) {
    for (int j = 0; j <= p.steps; ++j) {
        int outside = 0;
        for (int i = 0; i < p.n; ++i) {
            for (double v : p.state(j, i))
                if (std::abs(v) > K) {
                    ++outside;
                    break;
                }
        }
        if (static_cast<double>(p.n - outside) / p.n < 1.0 - eps) return true;
    }
    return false;
}

ConcentrationReport concentration_from_counts(std::size_t events, std::size_t reps, double K,
                                              double eps, double q, double c_q) {
    ConcentrationReport rep;
    rep.K = K;
    rep.eps = eps;
    rep.q = q;
    rep.c_q = c_q;
    rep.events = events;
    rep.reps = reps;
    rep.frequency = reps ? static_cast<double>(events) / static_cast<double>(reps) : 0.0;
    rep.se = reps ? std::sqrt(std::max(rep.frequency * (1 - rep.frequency), 1e-12) /
                              static_cast<double>(reps))
                  : 0.0;
    rep.bound = c_q / (eps * std::pow(K, q));
    rep.pass = rep.frequency <= rep.bound + 2 * rep.se;
    return rep;
}

}  // namespace

MomentEstimate moment_check(const SimConfig& cfg, const coeffs::CoefficientSet& cs, double q,
                            int workers) {
    if (!(q > 1)) throw std::invalid_argument("moment_check: need q > 1");
    std::vector<double> vals(static_cast<std::size_t>(cfg.replications),
                             std::numeric_limits<double>::quiet_NaN());
    for_each_replication(cfg, cs, workers, [&](const ReplicationPath& p) {
        if (p.ok) vals[static_cast<std::size_t>(p.rep)] = rep_sup_moment(p, q);
    });
    MomentEstimate est;
    est.q = q;
    std::vector<double> clean;
    for (double v : vals)
        if (std::isfinite(v)) clean.push_back(v);
    est.aborted = static_cast<int>(vals.size() - clean.size());
    if (clean.empty()) throw std::runtime_error("moment_check: every replication aborted");
    est.value = mean_se(clean);
    return est;
}

MomentEstimate moment_check(const EmpiricalFlowEnsemble& ens, double q) {
    if (!(q > 1)) throw std::invalid_argument("moment_check: need q > 1");
    MomentEstimate est;
    est.q = q;
    std::vector<double> clean;
    for (const auto& p : ens.reps) {
        if (p.ok)
            clean.push_back(rep_sup_moment(p, q));
        else
            ++est.aborted;
    }
    if (clean.empty()) throw std::runtime_error("moment_check: every replication aborted");
    est.value = mean_se(clean);
    return est;
}

ConcentrationReport concentration_check(const SimConfig& cfg, const coeffs::CoefficientSet& cs,
                                        double K, double eps, double q, double c_q, int workers) {
    std::vector<int> flags(static_cast<std::size_t>(cfg.replications), -1);
    for_each_replication(cfg, cs, workers, [&](const ReplicationPath& p) {
        if (p.ok) flags[static_cast<std::size_t>(p.rep)] = rep_excursion(p, K, eps) ? 1 : 0;
    });
    std::size_t events = 0, reps = 0;
    for (int f : flags)
        if (f >= 0) {
            ++reps;
            events += static_cast<std::size_t>(f);
        }
    return concentration_from_counts(events, reps, K, eps, q, c_q);
}

ConcentrationReport concentration_check(const EmpiricalFlowEnsemble& ens, double K, double eps,
                                        double q, double c_q) {
    std::size_t events = 0, reps = 0;
    for (const auto& p : ens.reps)
        if (p.ok) {
            ++reps;
            if (rep_excursion(p, K, eps)) ++events;
        }
    return concentration_from_counts(events, reps, K, eps, q, c_q);
}

std::vector<double> cholesky(std::span<const double> a, int d, double floor) {
    const auto dd = static_cast<std::size_t>(d);
    if (a.size() != dd * dd) throw std::invalid_argument("cholesky: bad matrix size");
    std::vector<double> L(dd * dd, 0.0);
    for (std::size_t i = 0; i < dd; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a[i * dd + j];
            for (std::size_t k = 0; k < j; ++k) s -= L[i * dd + k] * L[j * dd + k];
            if (i == j) {
                if (s <= floor) throw std::runtime_error("cholesky: matrix not positive definite");
                L[i * dd + i] = std::sqrt(s);
            } else {
                L[i * dd + j] = s / L[j * dd + j];
            }
        }
    }
    return L;
}

void GaussianMixture::validate(double spd_floor) const {
    double mass = 0;
    for (const auto& c : components) {
        if (static_cast<int>(c.mean.size()) != dim || static_cast<int>(c.cov.size()) != dim * dim)
            throw std::invalid_argument("GaussianMixture: component shape mismatch");
        if (c.weight < 0) throw std::invalid_argument("GaussianMixture: negative weight");
        mass += c.weight;
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j)
                if (std::abs(c.cov[static_cast<std::size_t>(i) * dim + j] -
                             c.cov[static_cast<std::size_t>(j) * dim + i]) > 1e-12)
                    throw std::invalid_argument("GaussianMixture: covariance not symmetric");
        cholesky(c.cov, dim, spd_floor);  // SPD or throw
    }
    if (std::abs(mass - 1.0) > 1e-9)
        throw std::invalid_argument("GaussianMixture: weights must sum to 1");
}

double GaussianMixture::pdf(std::span<const double> y) const {
    const auto dd = static_cast<std::size_t>(dim);
    double acc = 0;
    std::vector<double> w(dd);
    for (const auto& c : components) {
        const auto L = cholesky(c.cov, dim, 0.0);
        double q = 0, logdet = 0;
        for (std::size_t i = 0; i < dd; ++i) {
            double s = y[i] - c.mean[i];
            for (std::size_t k = 0; k < i; ++k) s -= L[i * dd + k] * w[k];
            w[i] = s / L[i * dd + i];
            q += w[i] * w[i];
            logdet += std::log(L[i * dd + i]);
        }
        acc += c.weight * std::exp(-0.5 * q - logdet) *
               std::pow(2 * std::numbers::pi, -0.5 * static_cast<double>(dim));
    }
    return acc;
}

GaussianMixture one_step_gaussian(const ReplicationPath& path, const SimConfig& cfg,
                                  const coeffs::CoefficientSet& cs, double t, double eps) {
    if (!(eps > 0) || eps > t) throw std::invalid_argument("one_step_gaussian: need 0 < eps <= t");
    const int jt = cfg.grid_index(t);
    const int je = cfg.grid_index(t - eps);
    const int d = cfg.d, m = cfg.m;
    const auto dd = static_cast<std::size_t>(d);
    const auto mm = static_cast<std::size_t>(m);
    const double dt = cfg.dt();
    const MeasureView mu = path.measure_at(je);

    GaussianMixture mix;
    mix.dim = d;
    mix.components.resize(static_cast<std::size_t>(path.n));
    std::vector<double> sg(dd * dd), sb(dd * mm);
    for (int i = 0; i < path.n; ++i) {
        auto& comp = mix.components[static_cast<std::size_t>(i)];
        const auto xi = path.state(je, i);
        comp.mean.assign(xi.begin(), xi.end());
        comp.weight = 1.0 / path.n;
        comp.cov.assign(dd * dd, 0.0);
        for (int l = je; l < jt; ++l) {
            cs.sigma(cfg.time_at(l), xi.data(), mu, sg.data());
            for (std::size_t a = 0; a < dd; ++a)
                for (std::size_t b = 0; b < dd; ++b) {
                    double s = 0;
                    for (std::size_t k = 0; k < dd; ++k) s += sg[a * dd + k] * sg[b * dd + k];
                    comp.cov[a * dd + b] += s * dt;
                }
        }
        cs.sigma_bar(cfg.time_at(je), xi.data(), mu, sb.data());
        for (std::size_t a = 0; a < dd; ++a)
            for (std::size_t b = 0; b < dd; ++b) {
                double s = 0;
                for (std::size_t k = 0; k < mm; ++k) s += sb[a * mm + k] * sb[b * mm + k];
                comp.cov[a * dd + b] += eps * s;
            }
    }
    return mix;
}

}  // namespace mkvlab::sim
