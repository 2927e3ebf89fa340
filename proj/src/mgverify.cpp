#include "mkvlab/mgverify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mkvlab::mg {

namespace {

// particle order sorted by state (lexicographic); ties carry bitwise-equal
// contributions, so any tie order yields the same sums
void state_order(const sim::ReplicationPath& path, int j, std::vector<int>& order) {
    const int n = path.n, d = path.d;
    order.resize(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    const double* base = path.x.data() + static_cast<std::size_t>(j) * n * d;
    std::sort(order.begin(), order.end(), [base, d](int a, int b) {
        const double* xa = base + static_cast<std::size_t>(a) * d;
        const double* xb = base + static_cast<std::size_t>(b) * d;
        for (int k = 0; k < d; ++k) {
            if (xa[k] < xb[k]) return true;
            if (xa[k] > xb[k]) return false;
        }
        return false;
    });
}

}  // namespace

PathFunctionals path_functionals(const sim::ReplicationPath& path, const sim::SimConfig& cfg,
                                 const coeffs::CoefficientSet& cs,
                                 std::span<const TestFunction> phis) {
    const int n = path.n, d = path.d, m = path.m, steps = path.steps;
    const auto dd = static_cast<std::size_t>(d);
    const auto mm = static_cast<std::size_t>(m);
    const auto np = phis.size();
    const double dt = cfg.dt();

    PathFunctionals out;
    out.rep = path.rep;
    out.ok = path.ok;
    out.per_phi.resize(np);
    out.realized_qv.assign(np, 0.0);
    out.predicted_qv.assign(np, 0.0);
    out.predicted_q.assign(np, 0.0);
    out.predicted_c.assign(np, 0.0);
    if (!path.ok) return out;
    for (auto& mp : out.per_phi) {
        mp.m.assign(static_cast<std::size_t>(steps) + 1, 0.0);
        mp.lambda_phi.assign(static_cast<std::size_t>(steps) + 1, 0.0);
    }

    // per-particle scratch, reused per step
    std::vector<double> vals(np * static_cast<std::size_t>(n));
    std::vector<double> lvals(np * static_cast<std::size_t>(n));
    std::vector<double> rvals(np * mm * static_cast<std::size_t>(n));
    std::vector<double> cvals(np * static_cast<std::size_t>(n));
    std::vector<double> bv(dd), sg(dd * dd), sb(dd * mm), grad(dd), hess(dd * dd), avg(dd * dd);
    std::vector<int> order;
    std::vector<double> cum_a(np, 0.0);  // running sum of A_l dt per phi

    for (int j = 0; j <= steps; ++j) {
        const double tj = cfg.time_at(j);
        const MeasureView mu = path.measure_at(j);
        const bool with_ops = j < steps;
        for (int i = 0; i < n; ++i) {
            const double* xi = path.x.data() + (static_cast<std::size_t>(j) * n + i) * dd;
            if (with_ops) {
                cs.drift(tj, xi, mu, bv.data());
                cs.sigma(tj, xi, mu, sg.data());
                cs.sigma_bar(tj, xi, mu, sb.data());
                for (std::size_t a = 0; a < dd; ++a)
                    for (std::size_t b = 0; b < dd; ++b) {
                        double aa = 0;
                        for (std::size_t k = 0; k < dd; ++k) aa += sg[a * dd + k] * sg[b * dd + k];
                        for (std::size_t k = 0; k < mm; ++k) aa += sb[a * mm + k] * sb[b * mm + k];
                        avg[a * dd + b] = aa;
                    }
            }
            for (std::size_t p = 0; p < np; ++p) {
                double v = 0;
                phis[p].eval({xi, dd}, &v, with_ops ? grad.data() : nullptr,
                             with_ops ? hess.data() : nullptr);
                vals[p * n + static_cast<std::size_t>(i)] = v;
                if (!with_ops) continue;
                double lv = 0;
                for (std::size_t a = 0; a < dd; ++a) lv += bv[a] * grad[a];
                for (std::size_t a = 0; a < dd; ++a)
                    for (std::size_t b = 0; b < dd; ++b)
                        lv += 0.5 * avg[a * dd + b] * 0.5 * (hess[a * dd + b] + hess[b * dd + a]);
                lvals[p * n + static_cast<std::size_t>(i)] = lv;
                for (std::size_t c = 0; c < mm; ++c) {
                    double rv = 0;
                    for (std::size_t a = 0; a < dd; ++a) rv += sb[a * mm + c] * grad[a];
                    rvals[(p * mm + c) * n + static_cast<std::size_t>(i)] = rv;
                }
                double cv = 0;
                for (std::size_t c = 0; c < dd; ++c) {
                    double uv = 0;
                    for (std::size_t a = 0; a < dd; ++a) uv += sg[a * dd + c] * grad[a];
                    cv += uv * uv;
                }
                cvals[p * n + static_cast<std::size_t>(i)] = cv;
            }
        }

        state_order(path, j, order);
        for (std::size_t p = 0; p < np; ++p) {
            double lam = 0;
            for (int i : order) lam += vals[p * n + static_cast<std::size_t>(i)];
            lam /= n;
            auto& mp = out.per_phi[p];
            mp.lambda_phi[static_cast<std::size_t>(j)] = lam;
            mp.m[static_cast<std::size_t>(j)] = lam - mp.lambda_phi[0] - cum_a[p];
            if (j > 0) {
                const double dm = mp.m[static_cast<std::size_t>(j)] - mp.m[static_cast<std::size_t>(j) - 1];
                out.realized_qv[p] += dm * dm;
            }
            if (!with_ops) continue;
            double a_mean = 0, c_mean = 0;
            for (int i : order) {
                a_mean += lvals[p * n + static_cast<std::size_t>(i)];
                c_mean += cvals[p * n + static_cast<std::size_t>(i)];
            }
            a_mean /= n;
            c_mean /= n;
            double q_term = 0;
            for (std::size_t c = 0; c < mm; ++c) {
                double r_mean = 0;
                for (int i : order) r_mean += rvals[(p * mm + c) * n + static_cast<std::size_t>(i)];
                r_mean /= n;
                q_term += r_mean * r_mean;
            }
            out.predicted_q[p] += q_term * dt;
            out.predicted_c[p] += c_mean * dt;
            out.predicted_qv[p] += (q_term + c_mean / n) * dt;
            cum_a[p] += a_mean * dt;
        }
    }
    return out;
}

MartingalePath compute_M(const sim::ReplicationPath& path, const sim::SimConfig& cfg,
                         const coeffs::CoefficientSet& cs, const TestFunction& phi) {
    const TestFunction phis[1] = {phi};
    auto pf = path_functionals(path, cfg, cs, phis);
    if (!pf.ok) throw std::runtime_error("compute_M: replication aborted: " + path.error);
    return std::move(pf.per_phi[0]);
}

PastFunctional PastFunctional::one() {
    PastFunctional g;
    g.id = "one";
    g.map = [](std::span<const double>) { return 1.0; };
    g.bound = 1.0;
    return g;
}

PastFunctional PastFunctional::tanh_of(double time, std::size_t phi_index) {
    PastFunctional g;
    g.id = "tanh";
    g.anchors.emplace_back(time, phi_index);
    g.map = [](std::span<const double> v) { return std::tanh(v[0]); };
    g.bound = 1.0;
    return g;
}

namespace {

double eval_past(const PastFunctional& g, const PathFunctionals& pf, const sim::SimConfig& cfg) {
    std::vector<double> args;
    args.reserve(g.anchors.size());
    for (const auto& [time, phi_idx] : g.anchors) {
        const int j = cfg.grid_index(time);
        args.push_back(pf.per_phi.at(phi_idx).lambda_phi[static_cast<std::size_t>(j)]);
    }
    return g.map(args);
}

}  // namespace

VerifyReport residual_battery(const sim::SimConfig& cfg, const coeffs::CoefficientSet& cs,
                              std::span<const TestFunction> phis,
                              std::span<const ResidualSpec> specs,
                              std::span<const PastFunctional> gs, double z,
                              double battery_threshold, int workers) {
    for (const auto& s : specs) {
        if (s.phi >= phis.size() || s.g >= gs.size())
            throw std::invalid_argument("residual_battery: spec index out of range");
        if (s.s > s.t) throw std::invalid_argument("residual_battery: need s <= t");
        for (const auto& [atime, aphi] : gs[s.g].anchors) {
            if (atime > s.s + 1e-12)
                throw std::invalid_argument("residual_battery: g anchored after s");
            (void)aphi;
        }
    }
    const std::size_t ns = specs.size();
    const auto reps = static_cast<std::size_t>(cfg.replications);
    std::vector<double> contrib(ns * reps, std::numeric_limits<double>::quiet_NaN());
    sim::for_each_replication(cfg, cs, workers, [&](const sim::ReplicationPath& path) {
        if (!path.ok) return;
        const auto pf = path_functionals(path, cfg, cs, phis);
        for (std::size_t s = 0; s < ns; ++s) {
            const auto& spec = specs[s];
            const auto& mp = pf.per_phi[spec.phi];
            const int js = cfg.grid_index(spec.s);
            const int jt = cfg.grid_index(spec.t);
            const double dm = mp.m[static_cast<std::size_t>(jt)] - mp.m[static_cast<std::size_t>(js)];
            contrib[s * reps + static_cast<std::size_t>(path.rep)] = dm * eval_past(gs[spec.g], pf, cfg);
        }
    });

    VerifyReport rep;
    rep.z = z;
    rep.threshold = battery_threshold;
    std::size_t ok_reps = 0;
    int passed = 0;
    for (std::size_t s = 0; s < ns; ++s) {
        std::vector<double> vals;
        vals.reserve(reps);
        for (std::size_t r = 0; r < reps; ++r) {
            const double v = contrib[s * reps + r];
            if (std::isfinite(v)) vals.push_back(v);
        }
        ok_reps = vals.size();
        const auto ms = mean_se(vals);
        ResidualResult res;
        res.spec = specs[s];
        res.stat = ms.mean;
        res.se = ms.se;
        res.z = z;
        res.pass = (ms.se > 0) ? (std::abs(ms.mean) <= z * ms.se) : (ms.mean == 0.0);
        passed += res.pass ? 1 : 0;
        rep.tests.push_back(res);
    }
    rep.reps = ok_reps;
    rep.aborted = static_cast<int>(reps - ok_reps);
    rep.battery_pass_rate = ns ? static_cast<double>(passed) / static_cast<double>(ns) : 1.0;
    rep.pass = rep.battery_pass_rate >= battery_threshold;
    return rep;
}

ResidualResult residual_test(const sim::SimConfig& cfg, const coeffs::CoefficientSet& cs,
                             std::span<const TestFunction> phis, const ResidualSpec& spec,
                             std::span<const PastFunctional> gs, double z, int workers) {
    const ResidualSpec specs[1] = {spec};
    return residual_battery(cfg, cs, phis, specs, gs, z, 1.0, workers).tests.at(0);
}

QvReport qv_match(const sim::SimConfig& cfg, const coeffs::CoefficientSet& cs,
                  const TestFunction& phi, int workers) {
    const TestFunction phis[1] = {phi};
    const auto reps = static_cast<std::size_t>(cfg.replications);
    std::vector<double> realized(reps, std::numeric_limits<double>::quiet_NaN());
    std::vector<double> predicted(reps, std::numeric_limits<double>::quiet_NaN());
    sim::for_each_replication(cfg, cs, workers, [&](const sim::ReplicationPath& path) {
        if (!path.ok) return;
        const auto pf = path_functionals(path, cfg, cs, phis);
        realized[static_cast<std::size_t>(path.rep)] = pf.realized_qv[0];
        predicted[static_cast<std::size_t>(path.rep)] = pf.predicted_qv[0];
    });
    QvReport rep;
    double racc = 0, pacc = 0;
    for (std::size_t r = 0; r < reps; ++r) {
        if (!std::isfinite(realized[r])) {
            ++rep.aborted;
            continue;
        }
        racc += realized[r];
        pacc += predicted[r];
        ++rep.reps;
    }
    if (rep.reps == 0) throw std::runtime_error("qv_match: every replication aborted");
    rep.mean_realized = racc / static_cast<double>(rep.reps);
    rep.mean_predicted = pacc / static_cast<double>(rep.reps);
    if (rep.mean_predicted > 1e-14 * std::max(1.0, rep.mean_realized)) {
        rep.ratio = rep.mean_realized / rep.mean_predicted;
    } else if (rep.mean_realized <= 1e-12) {
        rep.ratio = 1.0;  // both vanish
    } else {
        rep.flagged = true;  // coefficients predict no noise but paths move
        rep.ratio = std::numeric_limits<double>::infinity();
    }
    return rep;
}

NScaleReport n_scaling(const sim::SimConfig& base, const coeffs::CoefficientSet& cs,
                       const TestFunction& phi, std::span<const int> ns, int workers) {
    NScaleReport rep;
    for (int n : ns) {
        sim::SimConfig cfg = base;
        cfg.n = n;
        const auto qv = qv_match(cfg, cs, phi, workers);
        rep.ns.push_back(n);
        rep.mean_qv.push_back(qv.mean_realized);
    }
    rep.fit = n_scaling_fit(rep.ns, rep.mean_qv);
    return rep;
}

LinFitResult n_scaling_fit(std::span<const int> ns, std::span<const double> mean_qv) {
    if (ns.size() < 3) throw std::invalid_argument("n_scaling: need at least 3 particle counts");
    if (ns.size() != mean_qv.size()) throw std::invalid_argument("n_scaling: size mismatch");
    std::vector<double> x(ns.size());
    for (std::size_t i = 0; i < ns.size(); ++i) x[i] = static_cast<double>(ns[i]);
    return loglog_fit(x, mean_qv);
}

double energy_distance(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("energy_distance: empty sample");
    std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    auto mean_within = [](const std::vector<double>& v) {
        // sum_{i<j} (v_j - v_i) over a sorted sample, as a V-statistic
        double s = 0, prefix = 0;
        for (std::size_t j = 0; j < v.size(); ++j) {
            s += v[j] * static_cast<double>(j) - prefix;
            prefix += v[j];
        }
        return 2.0 * s / (static_cast<double>(v.size()) * static_cast<double>(v.size()));
    };
    // sum over pairs |a_i - b_j| via a sorted merge
    double cross = 0;
    {
        std::size_t ia = 0, ib = 0;
        double suma = 0, sumb = 0;
        double cnta = 0, cntb = 0;
        while (ia < sa.size() || ib < sb.size()) {
            const bool take_a = ib >= sb.size() || (ia < sa.size() && sa[ia] <= sb[ib]);
            if (take_a) {
                cross += sa[ia] * cntb - sumb;
                suma += sa[ia];
                cnta += 1;
                ++ia;
            } else {
                cross += sb[ib] * cnta - suma;
                sumb += sb[ib];
                cntb += 1;
                ++ib;
            }
        }
        cross /= static_cast<double>(sa.size()) * static_cast<double>(sb.size());
    }
    return 2 * cross - mean_within(sa) - mean_within(sb);
}

ChaosReport chaos_trend(const sim::SimConfig& base, const coeffs::CoefficientSet& cs,
                        std::span<const TestFunction> phis, std::span<const ChaosAnchor> anchors,
                        std::span<const int> ns, int workers) {
    if (anchors.empty()) throw std::invalid_argument("chaos_trend: need anchors");
    const auto reps = static_cast<std::size_t>(base.replications);
    // samples[n-index][anchor][rep]
    std::vector<std::vector<std::vector<double>>> samples(ns.size());
    for (std::size_t ni = 0; ni < ns.size(); ++ni) {
        sim::SimConfig cfg = base;
        cfg.n = ns[ni];
        samples[ni].assign(anchors.size(),
                           std::vector<double>(reps, std::numeric_limits<double>::quiet_NaN()));
        sim::for_each_replication(cfg, cs, workers, [&](const sim::ReplicationPath& path) {
            if (!path.ok) return;
            const auto pf = path_functionals(path, cfg, cs, phis);
            for (std::size_t a = 0; a < anchors.size(); ++a) {
                const int j = cfg.grid_index(anchors[a].time);
                samples[ni][a][static_cast<std::size_t>(path.rep)] =
                    pf.per_phi[anchors[a].phi].lambda_phi[static_cast<std::size_t>(j)];
            }
        });
    }
    ChaosReport rep;
    rep.ns.assign(ns.begin(), ns.end());
    for (std::size_t ni = 0; ni + 1 < ns.size(); ++ni) {
        double dmax = 0;
        for (std::size_t a = 0; a < anchors.size(); ++a) {
            std::vector<double> sa, sb;
            for (double v : samples[ni][a])
                if (std::isfinite(v)) sa.push_back(v);
            for (double v : samples[ni + 1][a])
                if (std::isfinite(v)) sb.push_back(v);
            dmax = std::max(dmax, energy_distance(sa, sb));
        }
        rep.distances.push_back(dmax);
    }
    rep.non_increasing = true;
    for (std::size_t i = 0; i + 1 < rep.distances.size(); ++i)
        if (rep.distances[i + 1] > rep.distances[i]) rep.non_increasing = false;
    return rep;
}

double m_bound(const coeffs::CoefficientSet& cs, double T, double phi_seminorm2) {
    return (2.0 + T * cs.generator_constant()) * phi_seminorm2;
}

}  // namespace mkvlab::mg
