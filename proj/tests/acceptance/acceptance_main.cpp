// Acceptance suite: one line per criterion, exit 0 iff all pass.
// Sizes and tolerances are pinned here; MKVLAB_ACCEPT_WORKERS overrides the
// worker count (which never changes any number).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <vector>

#include "mkvlab/coeffs.hpp"
#include "mkvlab/hermite.hpp"
#include "mkvlab/mgverify.hpp"
#include "mkvlab/ops.hpp"
#include "mkvlab/regularity.hpp"
#include "mkvlab/rng.hpp"
#include "mkvlab/runner.hpp"
#include "mkvlab/sim.hpp"

using namespace mkvlab;
namespace fs = std::filesystem;

namespace {

int g_workers = 4;
int g_failures = 0;

void report(int idx, const char* name, bool pass, const std::string& detail) {
    std::printf("[%s] %2d. %s: %s\n", pass ? "PASS" : "FAIL", idx, name, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

coeffs::CoefficientSet bm_set() {
    coeffs::CoefficientSet cs;
    cs.dim = 1;
    cs.noise_dim = 1;
    cs.drift = coeffs::fields::zero(1);
    cs.sigma = coeffs::fields::scaled_identity(1, 1.0);
    cs.sigma_bar = coeffs::fields::zero(1);
    cs.sigma_sup = 1.0;
    cs.kappa = 1.0;
    return cs;
}

coeffs::CoefficientSet common_only_set() {
    auto cs = bm_set();
    cs.sigma = coeffs::fields::zero(1);
    cs.sigma_sup = 0;
    cs.kappa = 0;
    cs.sigma_bar = coeffs::fields::constant({1.0});
    cs.sigma_bar_sup = 1.0;
    return cs;
}

std::vector<TestFunction> roster() {
    return {testfn::gaussian_bump(1), testfn::x_gaussian(), testfn::compact_bump(1, 3.0),
            testfn::sine_gaussian(2.0)};
}

// 1. Martingale residual battery on the null preset, 20 master seeds.
void criterion_1() {
    Timer timer;
    const auto phis = roster();
    const auto bat = run::default_battery(phis.size(), {{0.25, 0.5}, {0.25, 1.0}, {0.5, 1.0}});
    const auto cs = bm_set();
    int seeds_passed = 0;
    double worst_rate = 1.0;
    for (int seed = 0; seed < 20; ++seed) {
        sim::SimConfig cfg;
        cfg.n = 100;
        cfg.steps = 256;
        cfg.T = 1.0;
        cfg.replications = 2000;
        cfg.master_seed = 20240811 + static_cast<std::uint64_t>(seed);
        const auto rep =
            mg::residual_battery(cfg, cs, phis, bat.specs, bat.gs, 3.0, 0.95, g_workers);
        if (rep.pass) ++seeds_passed;
        worst_rate = std::min(worst_rate, rep.battery_pass_rate);
    }
    std::ostringstream os;
    os << seeds_passed << "/20 seeds with a 24-test battery pass rate >= 0.95 (need >= 18)"
       << ", worst rate " << worst_rate << ", " << timer.seconds() << "s";
    report(1, "martingale residual battery (null case)", seeds_passed >= 18, os.str());
}

// 2. Quadratic-variation structure for the two degenerate noise routes.
void criterion_2() {
    Timer timer;
    const auto phi = testfn::x_gaussian();
    sim::SimConfig cfg;
    cfg.n = 50;
    cfg.steps = 512;
    cfg.replications = 500;
    cfg.master_seed = 71;
    const auto common = mg::qv_match(cfg, common_only_set(), phi, g_workers);

    sim::SimConfig cfg2;
    cfg2.n = 100;
    cfg2.steps = 512;
    cfg2.replications = 2000;
    cfg2.master_seed = 72;
    const auto idio = mg::qv_match(cfg2, bm_set(), phi, g_workers);

    const bool pass = common.ratio >= 0.9 && common.ratio <= 1.1 && idio.ratio >= 0.9 &&
                      idio.ratio <= 1.1 && !common.flagged && !idio.flagged;
    std::ostringstream os;
    os << "realized/predicted: common-noise " << common.ratio << ", idiosyncratic " << idio.ratio
       << " (band [0.9, 1.1]), " << timer.seconds() << "s";
    report(2, "quadratic-variation structure", pass, os.str());
}

// 3. 1/n decay of the idiosyncratic quadratic variation.
void criterion_3() {
    Timer timer;
    sim::SimConfig cfg;
    cfg.steps = 256;
    cfg.replications = 400;
    cfg.master_seed = 73;
    const std::vector<int> ns = {50, 100, 200, 400};
    const auto rep = mg::n_scaling(cfg, bm_set(), testfn::x_gaussian(), ns, g_workers);
    const bool pass = rep.fit.slope >= -1.15 && rep.fit.slope <= -0.85;
    std::ostringstream os;
    os << "log-log slope " << rep.fit.slope << " (band [-1.15, -0.85]), " << timer.seconds() << "s";
    report(3, "1/n decay of the realized QV", pass, os.str());
}

// 4. Uniform generator and martingale bounds.
void criterion_4() {
    Timer timer;
    const auto probe = UniformGrid::line(-12, 12, 4801);
    const auto phis = roster();
    std::vector<double> s1(phis.size()), s2(phis.size());
    for (std::size_t p = 0; p < phis.size(); ++p) {
        s1[p] = hermite::seminorm_m_star(phis[p], 1, probe);
        s2[p] = hermite::seminorm_m_star(phis[p], 2, probe);
    }

    rng::UniformStream u(424242);
    int violations = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        coeffs::CoefficientSet cs;
        cs.dim = 1;
        cs.noise_dim = 1;
        const double b = u.in(-2, 2), s0 = u.in(0.2, 1.5), a = u.in(-0.8, 0.8),
                     sb = u.in(-1.5, 1.5);
        cs.drift = [b](double, const double* x, const MeasureView&, double* out) {
            out[0] = b * std::tanh(x[0]);
        };
        cs.drift_sup = std::abs(b);
        cs.sigma = coeffs::fields::statistic_tanh_sigma(1, s0, a);
        cs.sigma_sup = s0 * (1 + std::abs(a));
        cs.sigma_bar = coeffs::fields::constant({sb});
        cs.sigma_bar_sup = std::abs(sb);
        std::vector<double> pts(10);
        for (double& p : pts) p = u.in(-3, 3);
        const auto mu = WeightedSampleMeasure::equal(1, std::move(pts));
        const ops::OperatorContext ctx{&cs, u.in(0, 1)};
        const std::size_t p = u.bits() % phis.size();
        const double val = std::abs(ops::char_A(ctx, mu.view(), phis[p]));
        if (val > ops::tight_generator_bound(cs, s1[p], s2[p]) * (1 + 1e-12)) ++violations;
        if (val > cs.generator_constant() * s2[p] * (1 + 1e-12)) ++violations;
    }

    // |M_t[phi]| bound on every simulated path across three coefficient regimes
    int m_violations = 0;
    auto check_paths = [&](const coeffs::CoefficientSet& cs, std::uint64_t seed, int reps) {
        sim::SimConfig cfg;
        cfg.n = 100;
        cfg.steps = 256;
        cfg.replications = reps;
        cfg.master_seed = seed;
        std::vector<double> bounds(phis.size());
        for (std::size_t p = 0; p < phis.size(); ++p)
            bounds[p] = mg::m_bound(cs, cfg.T, s2[p]) * 1.05;
        std::vector<int> bad(static_cast<std::size_t>(reps), 0);
        sim::for_each_replication(cfg, cs, g_workers, [&](const sim::ReplicationPath& path) {
            if (!path.ok) return;
            const auto pf = mg::path_functionals(path, cfg, cs, phis);
            for (std::size_t p = 0; p < phis.size(); ++p)
                for (double v : pf.per_phi[p].m)
                    if (std::abs(v) > bounds[p]) bad[static_cast<std::size_t>(path.rep)] = 1;
        });
        for (int b2 : bad) m_violations += b2;
    };
    check_paths(bm_set(), 9001, 300);
    check_paths(common_only_set(), 9002, 300);
    {
        coeffs::CoefficientSet hk;
        hk.dim = 1;
        hk.noise_dim = 1;
        hk.drift = coeffs::fields::hk_drift(1.0);
        hk.drift_sup = 1.0;
        hk.sigma = coeffs::fields::scaled_identity(1, 0.5);
        hk.sigma_sup = 0.5;
        hk.sigma_bar = coeffs::fields::constant({0.3});
        hk.sigma_bar_sup = 0.3;
        hk.kappa = 0.25;
        check_paths(hk, 9003, 200);
    }

    std::ostringstream os;
    os << violations << " generator-bound violations in 1000 tuples, " << m_violations
       << " path-bound violations (need 0), " << timer.seconds() << "s";
    report(4, "uniform bounds on char_A and M", violations == 0 && m_violations == 0, os.str());
}

// 5. Gaussian Bessel-norm scaling exponent.
void criterion_5() {
    Timer timer;
    const std::vector<double> eps = {0.25, 0.125, 0.0625, 0.03125, 0.015625, 0.0078125};
    std::vector<double> norms;
    for (double e : eps) norms.push_back(reg::gaussian_bessel_norm(e, 1.5, 0.5, 8.0, 2048));
    const auto fit = loglog_fit(eps, norms);
    const double target = -(0.5 + 1.0 / 3.0) / 2.0;
    const double rel = std::abs(fit.slope - target) / std::abs(target);
    std::ostringstream os;
    os << "slope " << fit.slope << " vs " << target << " (rel err " << rel << ", tol 0.10), "
       << timer.seconds() << "s";
    report(5, "Gaussian Bessel-norm scaling (r=1.5, s=0.5)", rel <= 0.10, os.str());
}

// 6. Coupling rate of the one-step predictor.
void criterion_6() {
    Timer timer;
    sim::SimConfig cfg;
    cfg.n = 100;
    cfg.steps = 512;
    cfg.replications = 200;
    cfg.master_seed = 77;
    cfg.store_noise = true;
    std::vector<double> eps;
    for (int k : {4, 8, 16, 32, 64}) eps.push_back(k * cfg.dt());

    auto cs_const = bm_set();
    cs_const.drift = coeffs::fields::constant({1.0});
    cs_const.drift_sup = 1;
    const auto fit_const = reg::coupling_rate(cfg, cs_const, 1.0, eps, 2.0, g_workers);

    coeffs::CoefficientSet cs_hold;
    cs_hold.dim = 1;
    cs_hold.noise_dim = 1;
    cs_hold.drift = coeffs::fields::zero(1);
    cs_hold.sigma = coeffs::fields::holder_sqrt_sigma(0.6, 0.5, 1.0);
    cs_hold.sigma_sup = 1.1;
    cs_hold.sigma_bar = coeffs::fields::zero(1);
    cs_hold.kappa = 0.36;
    cs_hold.holder_beta = 0.5;
    sim::SimConfig cfg2 = cfg;
    cfg2.master_seed = 78;
    const auto fit_hold = reg::coupling_rate(cfg2, cs_hold, 1.0, eps, 2.0, g_workers);

    const bool pass = fit_const.exponent >= 0.9 && fit_hold.exponent >= 0.55;
    std::ostringstream os;
    os << "constant-sigma exponent " << fit_const.exponent << " (need >= 0.9), Holder-1/2 exponent "
       << fit_hold.exponent << " (need >= 0.55, analytic 0.75), " << timer.seconds() << "s";
    report(6, "coupling rate of the one-step predictor", pass, os.str());
}

// 7. Blow-up exponent of the single-particle marginal density.
void criterion_7() {
    Timer timer;
    const std::vector<double> ts = {0.0625, 0.125, 0.1875, 0.25, 0.375, 0.5};
    const auto grid = UniformGrid::line(-6, 6, 769);
    const double eps_max = 0.03125;

    std::vector<std::pair<double, double>> cis;
    bool bm_band = true;
    double g50 = 0, g200 = 0;
    for (int n : {50, 200}) {
        sim::SimConfig cfg;
        cfg.n = n;
        cfg.steps = 512;
        cfg.replications = 400;
        cfg.master_seed = 79;
        const auto fit = reg::blowup_fit(cfg, bm_set(), ts, 2.0, eps_max, grid, 8, g_workers);
        const double gamma_hat = -fit.exponent;
        (n == 50 ? g50 : g200) = gamma_hat;
        bm_band = bm_band && gamma_hat >= 0.2 && gamma_hat <= 0.3;
        cis.emplace_back(-fit.ci_hi, -fit.ci_lo);
    }
    const bool overlap =
        std::max(cis[0].first, cis[1].first) <= std::min(cis[0].second, cis[1].second);

    sim::SimConfig cfgd;
    cfgd.n = 100;
    cfgd.steps = 512;
    cfgd.replications = 400;
    cfgd.master_seed = 80;
    auto cs_drift = bm_set();
    cs_drift.drift = coeffs::fields::constant({1.0});
    cs_drift.drift_sup = 1;
    const auto fitd = reg::blowup_fit(cfgd, cs_drift, ts, 2.0, eps_max, grid, 8, g_workers);
    const double gd = -fitd.exponent;

    const bool pass = bm_band && overlap && gd < 1.0;
    std::ostringstream os;
    os << "BM gamma-hat n=50: " << g50 << ", n=200: " << g200
       << " (band [0.2, 0.3], analytic 0.25), CIs overlap: " << (overlap ? "yes" : "no")
       << ", drifted gamma-hat " << gd << " (< 1), " << timer.seconds() << "s";
    report(7, "density blow-up exponent", pass, os.str());
}

// 8. Mollifier lemma suite.
void criterion_8() {
    Timer timer;
    bool pass = true;
    std::ostringstream why;

    const coeffs::Mollifier moll(1, 0.25);
    if (std::abs(moll.profile_mass(4096) - 1.0) > 1e-8) {
        pass = false;
        why << "unit mass violated; ";
    }
    const double outside = 1.2;
    if (moll.profile({&outside, 1}) != 0.0) {
        pass = false;
        why << "support violated; ";
    }

    const auto b = coeffs::fields::step_drift();
    WeightedSampleMeasure mu;
    mu.dim = 1;
    mu.points = {0.0};
    mu.weights = {1.0};

    // continuity + interior agreement with the analytic convolution oracle
    {
        const double delta = 0.25;
        const auto grid = UniformGrid::line(-0.2, 0.2, 21);
        const auto vals = coeffs::mollify_drift(b, 1, 0.0, mu.view(), delta, grid,
                                                {.conv_nodes_per_axis = 1 << 20});
        std::vector<double> x(1);
        for (std::size_t p = 0; p < grid.size(); ++p) {
            grid.point(p, x.data());
            const double v = x[0] / delta;
            double want = v <= -1 ? 1.0 : 0.0;
            if (v > -1 && v < 1) {
                want = 0.0;
                const auto gl = hermite::GaussLegendre::on(400, v, 1.0);
                for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
                    const double uq = gl.nodes[q];
                    want += gl.weights[q] * moll.profile({&uq, 1});
                }
            }
            if (std::abs(vals[p] - want) > 1e-5) {
                pass = false;
                why << "oracle gap " << std::abs(vals[p] - want) << " at x=" << x[0] << "; ";
            }
        }
    }
    // sup bound and restricted L^r bound, plus the strictly decreasing L^2 gap
    {
        const auto grid = UniformGrid::line(-2, 2, 2001);
        std::vector<double> gaps;
        for (double delta : {0.4, 0.2, 0.1, 0.05}) {
            const auto vals = coeffs::mollify_drift(b, 1, 0.0, mu.view(), delta, grid,
                                                    {.conv_nodes_per_axis = 8192});
            double sup = 0, acc = 0;
            std::vector<double> x(1);
            for (std::size_t p = 0; p < grid.size(); ++p) {
                grid.point(p, x.data());
                sup = std::max(sup, std::abs(vals[p]));
                const double raw = x[0] <= 0 ? 1.0 : 0.0;
                const double w = (p == 0 || p + 1 == grid.size()) ? 0.5 : 1.0;
                acc += w * (vals[p] - raw) * (vals[p] - raw);
            }
            gaps.push_back(std::sqrt(acc * grid.spacing[0]));
            if (sup > 1.0 + 1e-10) {
                pass = false;
                why << "sup bound violated at delta=" << delta << "; ";
            }
            for (double r : {1.0, 2.0}) {
                const auto K = UniformGrid::line(-1, 1, 2001);
                const auto kv = coeffs::mollify_drift(b, 1, 0.0, mu.view(), delta, K,
                                                      {.conv_nodes_per_axis = 4096});
                double lacc = 0;
                for (std::size_t p = 0; p < K.size(); ++p) {
                    const double w = (p == 0 || p + 1 == K.size()) ? 0.5 : 1.0;
                    lacc += w * std::pow(std::abs(kv[p]), r);
                }
                const double lhs = std::pow(lacc * K.spacing[0], 1.0 / r);
                const double rhs = std::pow(1.0 + delta, 1.0 / r);  // ||b||_{L^r([-1-delta, 1+delta])}
                if (lhs > rhs + 1e-3) {
                    pass = false;
                    why << "restricted L^" << r << " bound violated; ";
                }
            }
        }
        for (std::size_t i = 0; i + 1 < gaps.size(); ++i)
            if (gaps[i + 1] >= gaps[i]) {
                pass = false;
                why << "L^2 gap not strictly decreasing; ";
            }
    }
    std::ostringstream os;
    os << (pass ? "unit mass, support, sup/restriction bounds, oracle match, decreasing L2 gap"
                : why.str())
       << ", " << timer.seconds() << "s";
    report(8, "mollifier lemma suite", pass, os.str());
}

// 9. Sandwich continuity of the indicator drift.
void criterion_9() {
    Timer timer;
    WeightedSampleMeasure target;
    target.dim = 1;
    target.points.resize(100000);
    for (std::size_t i = 0; i < target.points.size(); ++i)
        target.points[i] = (static_cast<double>(i) + 0.5) / 100000.0;
    const auto probe = UniformGrid::line(-2, 2, 801);
    const std::vector<std::size_t> ks = {100, 1000, 10000};
    auto bfun = [](std::span<const double> x, const MeasureView& m) {
        return coeffs::drift_indicator(x, m, 1.0);
    };
    std::vector<std::vector<double>> per_k(ks.size());
    for (int seed = 0; seed < 20; ++seed) {
        const auto rep = coeffs::narrow_local_continuity_test(
            bfun, target.view(),
            [seed](std::size_t k) {
                rng::UniformStream u(
                    rng::derive_seed(20240811, static_cast<std::uint64_t>(seed), rng::kStreamAux, 1));
                std::vector<double> pts(k);
                for (double& p : pts) p = u.next();
                return WeightedSampleMeasure::equal(1, std::move(pts));
            },
            ks, probe);
        for (std::size_t i = 0; i < ks.size(); ++i) per_k[i].push_back(rep.sup_gaps[i]);
    }
    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return v[v.size() / 2];
    };
    const double m0 = median(per_k[0]), m1 = median(per_k[1]), m2 = median(per_k[2]);
    const bool pass = m2 <= 0.05 && m1 < m0 && m2 < m1;
    std::ostringstream os;
    os << "median sup gaps " << m0 << " > " << m1 << " > " << m2 << " (final <= 0.05), "
       << timer.seconds() << "s";
    report(9, "sandwich continuity of the indicator drift", pass, os.str());
}

// 10. Hermite / H_p suite.
void criterion_10() {
    Timer timer;
    bool pass = true;
    std::ostringstream why;

    hermite::HermiteBasis basis(1, 12);
    const double orth = basis.orthonormality_error(hermite::Quadrature{}, 12);
    if (orth > 1e-8) {
        pass = false;
        why << "orthonormality error " << orth << "; ";
    }
    double supworst = 0;
    std::vector<double> vals(61);
    for (int i = 0; i <= 1200; ++i) {
        hermite::eval_axis(-15.0 + i * 0.025, vals);
        for (double v : vals) supworst = std::max(supworst, std::abs(v));
    }
    if (supworst > std::pow(2 * std::numbers::pi, 0.25) * (1 + 1e-10)) {
        pass = false;
        why << "sup bound " << supworst << "; ";
    }
    rng::UniformStream u(515);
    for (int trial = 0; trial < 100; ++trial) {
        auto v = hermite::CoeffVector::zeros(1, 24);
        for (double& c : v.c) c = u.in(-1, 1);
        double p1 = u.in(-3, 3), p2 = u.in(-3, 3);
        if (p1 > p2) std::swap(p1, p2);
        if (hermite::hp_norm(v, p1) > hermite::hp_norm(v, p2) * (1 + 1e-12)) {
            pass = false;
            why << "H_p monotonicity violated; ";
        }
    }
    {
        hermite::HermiteBasis b60(1, 60);
        const auto phik = hermite::coeffs_of_function(
            [](std::span<const double> x) { return std::exp(-0.5 * x[0] * x[0]); }, b60,
            hermite::Quadrature{});
        const double zero = 0.0;
        const auto delta = WeightedSampleMeasure::dirac(std::span<const double>(&zero, 1));
        const auto dk = hermite::coeffs_of_measure(delta.view(), 1, 60);
        const double rec = hermite::pairing(dk, phik);
        if (std::abs(rec - 1.0) > 1e-4) {
            pass = false;
            why << "pairing recovery error " << std::abs(rec - 1.0) << "; ";
        }
    }
    std::ostringstream os;
    os << (pass ? "orthonormality 1e-8, sup bound, H_p monotone, duality recovery 1e-4"
                : why.str())
       << ", " << timer.seconds() << "s";
    report(10, "Hermite / H_p suite", pass, os.str());
}

// 11. Moment stability in n and the concentration bound.
void criterion_11() {
    Timer timer;
    auto run_moment = [&](int n, std::uint64_t seed) {
        sim::SimConfig cfg;
        cfg.n = n;
        cfg.steps = 256;
        cfg.replications = 500;
        cfg.master_seed = seed;
        return sim::moment_check(cfg, bm_set(), 2.0, g_workers);
    };
    const auto a = run_moment(50, 821), b = run_moment(200, 822);
    const double pooled = std::sqrt(a.value.se * a.value.se + b.value.se * b.value.se);
    const bool moments_ok = std::abs(a.value.mean - b.value.mean) <= 3 * pooled;

    sim::SimConfig cfg;
    cfg.n = 100;
    cfg.steps = 256;
    cfg.replications = 1000;
    cfg.master_seed = 823;
    const auto m4 = sim::moment_check(cfg, bm_set(), 4.0, g_workers);
    const auto conc =
        sim::concentration_check(cfg, bm_set(), 3.0, 0.1, 4.0, m4.value.mean, g_workers);

    const bool pass = moments_ok && conc.pass;
    std::ostringstream os;
    os << "sup-moment n=50: " << a.value.mean << " vs n=200: " << b.value.mean << " (gap "
       << std::abs(a.value.mean - b.value.mean) << " <= 3 pooled SE " << 3 * pooled
       << "); concentration freq " << conc.frequency << " <= bound " << conc.bound << ", "
       << timer.seconds() << "s";
    report(11, "moment stability and concentration bound", pass, os.str());
}

// 12. Determinism across worker counts and exact exchangeability.
void criterion_12() {
    Timer timer;
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };
    auto strip_ts = [](std::string s) {
        const auto pos = s.find("\"generated_at\"");
        if (pos == std::string::npos) return s;
        const auto end = s.find('\n', pos);
        return s.erase(pos, end - pos);
    };

    nlohmann::json j;
    j["kind"] = "simulate";
    j["sim"] = {{"n", 30}, {"steps", 64}, {"replications", 16}, {"master_seed", 321}};
    j["coefficients"] = {{"drift", {{"kind", "zero"}}},
                         {"sigma", {{"kind", "constant"}, {"params", {{"value", 1.0}}}}},
                         {"sigma_bar", {{"kind", "constant"}, {"params", {{"value", 0.5}}}}},
                         {"kappa", 1.0}};
    const fs::path d1 = fs::temp_directory_path() / "mkvlab_acc_w1";
    const fs::path d4 = fs::temp_directory_path() / "mkvlab_acc_w4";
    fs::remove_all(d1);
    fs::remove_all(d4);
    j["out_dir"] = d1.string();
    const auto cfg1 = run::ExperimentConfig::from_json(j);
    j["out_dir"] = d4.string();
    const auto cfg4 = run::ExperimentConfig::from_json(j);
    const auto r1 = run::run_experiment(cfg1, {.workers = 1});
    const auto r4 = run::run_experiment(cfg4, {.workers = 4});
    bool identical = r1.exit_code == 0 && r4.exit_code == 0;
    identical = identical && slurp(d1 / "ensemble.csv") == slurp(d4 / "ensemble.csv");
    identical = identical && slurp(d1 / "common_noise.csv") == slurp(d4 / "common_noise.csv");
    identical =
        identical && strip_ts(slurp(d1 / "report.json")) == strip_ts(slurp(d4 / "report.json"));
    fs::remove_all(d1);
    fs::remove_all(d4);

    // exact permutation invariance of eval_measure and the realized QV
    sim::SimConfig cfg;
    cfg.n = 41;
    cfg.steps = 64;
    cfg.master_seed = 322;
    const auto cs = bm_set();
    const auto path = sim::simulate_replication(cfg, cs, 0);
    const auto phi = testfn::gaussian_bump(1);
    const std::vector<TestFunction> phis = {phi};
    const auto base = mg::path_functionals(path, cfg, cs, phis);
    sim::ReplicationPath perm = path;
    for (int j2 = 0; j2 <= cfg.steps; ++j2)
        for (int i = 0; i < cfg.n; ++i)
            perm.x[static_cast<std::size_t>(j2) * cfg.n + i] =
                path.x[static_cast<std::size_t>(j2) * cfg.n + ((i * 7 + 13) % cfg.n)];
    bool exchange =
        sim::eval_measure(perm, cfg.steps, phi) == sim::eval_measure(path, cfg.steps, phi);
    const auto permuted = mg::path_functionals(perm, cfg, cs, phis);
    exchange = exchange && permuted.realized_qv[0] == base.realized_qv[0];

    const bool pass = identical && exchange;
    std::ostringstream os;
    os << "byte-identical outputs across workers {1,4}: " << (identical ? "yes" : "no")
       << "; exact permutation invariance: " << (exchange ? "yes" : "no") << ", "
       << timer.seconds() << "s";
    report(12, "determinism and exchangeability", pass, os.str());
}

}  // namespace

int main() {
    if (const char* env = std::getenv("MKVLAB_ACCEPT_WORKERS")) {
        const int w = std::atoi(env);
        if (w > 0) g_workers = w;
    }
    std::printf("acceptance suite (%d workers)\n", g_workers);
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    criterion_11();
    criterion_12();
    if (g_failures == 0)
        std::printf("acceptance: all 12 criteria passed\n");
    else
        std::printf("acceptance: %d criteria FAILED\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
