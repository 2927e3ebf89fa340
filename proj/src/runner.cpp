#include "mkvlab/runner.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <filesystem>
#include <fstream>

#include "mkvlab/hermite.hpp"
#include "mkvlab/ops.hpp"
#include "mkvlab/regularity.hpp"
#include "mkvlab/rng.hpp"

namespace fs = std::filesystem;

namespace mkvlab::run {

namespace {

struct Verdict {
    std::string name;
    bool pass = false;
    double value = 0;
    std::string detail;
};

struct Outputs {
    nlohmann::json results = nlohmann::json::object();
    std::vector<Verdict> verdicts;
};

class FileSink {
public:
    FileSink(fs::path dir, std::string hash) : dir_(std::move(dir)), hash_(std::move(hash)) {}

    /// RFC-4180: comma-separated, CRLF line ends, '.' decimal; the config
    /// hash rides along as the last column of every row.
    void csv(const std::string& name, const std::vector<std::string>& header,
             const std::vector<std::vector<double>>& rows) {
        std::ofstream out(dir_ / name, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + (dir_ / name).string());
        for (std::size_t i = 0; i < header.size(); ++i) out << header[i] << ",";
        out << "config_hash\r\n";
        for (const auto& row : rows) {
            for (double v : row) out << format_double(v) << ",";
            out << hash_ << "\r\n";
        }
        created_.push_back((dir_ / name).string());
    }

    void json_file(const std::string& name, const nlohmann::json& j) {
        std::ofstream out(dir_ / name, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + (dir_ / name).string());
        out << j.dump(2) << "\n";
        created_.push_back((dir_ / name).string());
    }

    const std::vector<std::string>& created() const { return created_; }
    void remove_all_created() {
        for (const auto& f : created_) {
            std::error_code ec;
            fs::remove(f, ec);
        }
        created_.clear();
    }

private:
    fs::path dir_;
    std::string hash_;
    std::vector<std::string> created_;
};

double param_num(const nlohmann::json& p, const std::string& key, double fallback) {
    return p.contains(key) ? p.at(key).get<double>() : fallback;
}

int param_int(const nlohmann::json& p, const std::string& key, int fallback) {
    return p.contains(key) ? p.at(key).get<int>() : fallback;
}

std::string param_str(const nlohmann::json& p, const std::string& key, const std::string& fallback) {
    return p.contains(key) ? p.at(key).get<std::string>() : fallback;
}

UniformGrid grid_from(const nlohmann::json& p, double lo, double hi, int points) {
    if (p.contains("grid")) {
        const auto& g = p.at("grid");
        lo = param_num(g, "lo", lo);
        hi = param_num(g, "hi", hi);
        points = param_int(g, "points", points);
    }
    return UniformGrid::line(lo, hi, points);
}

std::vector<TestFunction> phis_or_default(const ExperimentConfig& cfg) {
    auto phis = cfg.build_phis();
    if (phis.empty()) phis.push_back(testfn::gaussian_bump(cfg.sim.d));
    return phis;
}

// --- kind handlers --------------------------------------------------------

Outputs run_simulate(const ExperimentConfig& cfg, const coeffs::CoefficientSet& cs, int workers,
                     FileSink& sink) {
    Outputs out;
    const auto ens = sim::simulate(cfg.sim, cs, workers);

    std::vector<std::vector<double>> rows;
    rows.reserve(ens.reps.size() * static_cast<std::size_t>(cfg.sim.n) *
                 (static_cast<std::size_t>(cfg.sim.steps) + 1));
    std::vector<std::string> header = {"replication", "particle", "step"};
    for (int a = 1; a <= cfg.sim.d; ++a) header.push_back("x_" + std::to_string(a));
    for (const auto& p : ens.reps) {
        if (!p.ok) continue;
        for (int i = 0; i < p.n; ++i)
            for (int j = 0; j <= p.steps; ++j) {
                std::vector<double> row = {static_cast<double>(p.rep), static_cast<double>(i),
                                           static_cast<double>(j)};
                const auto st = p.state(j, i);
                row.insert(row.end(), st.begin(), st.end());
                rows.push_back(std::move(row));
            }
    }
    sink.csv("ensemble.csv", header, rows);

    std::vector<std::vector<double>> zrows;
    std::vector<std::string> zheader = {"replication", "step"};
    for (int c = 1; c <= cfg.sim.m; ++c) zheader.push_back("z_" + std::to_string(c));
    for (const auto& p : ens.reps) {
        if (!p.ok) continue;
        for (int j = 0; j <= p.steps; ++j) {
            std::vector<double> row = {static_cast<double>(p.rep), static_cast<double>(j)};
            const auto zc = p.common_noise_at(j);
            row.insert(row.end(), zc.begin(), zc.end());
            zrows.push_back(std::move(row));
        }
    }
    sink.csv("common_noise.csv", zheader, zrows);
    sink.json_file("simconfig.json", cfg.to_json().at("sim"));

    out.results["aborted"] = ens.aborted();
    out.verdicts.push_back({"no_aborted_replications", ens.aborted() == 0,
                            static_cast<double>(ens.aborted()), "aborted replication count"});

    if (cfg.params.contains("moments")) {
        const auto& mp = cfg.params.at("moments");
        const double q = param_num(mp, "q", 2.0);
        const auto est = sim::moment_check(ens, q);
        out.results["moment"] = {{"q", q},
                                 {"estimate", est.value.mean},
                                 {"se", est.value.se},
                                 {"replications", est.value.count}};
        if (mp.contains("K")) {
            const double K = param_num(mp, "K", 3.0);
            const double eps = param_num(mp, "eps", 0.1);
            const double cq = param_num(mp, "concentration_q", 4.0);
            const auto cqe = sim::moment_check(ens, cq);
            const auto conc = sim::concentration_check(ens, K, eps, cq, cqe.value.mean);
            out.results["concentration"] = {{"K", K},
                                            {"eps", eps},
                                            {"q", cq},
                                            {"c_q", conc.c_q},
                                            {"frequency", conc.frequency},
                                            {"bound", conc.bound},
                                            {"se", conc.se}};
            out.verdicts.push_back({"concentration_within_markov_bound", conc.pass, conc.frequency,
                                    "frequency <= c_q/(eps K^q) + 2 se"});
        }
    }
    return out;
}

Outputs run_verify(const ExperimentConfig& cfg, const coeffs::CoefficientSet& cs, int workers,
                   FileSink& sink) {
    Outputs out;
    auto phis = phis_or_default(cfg);
    std::vector<std::pair<double, double>> windows;
    if (cfg.params.contains("windows"))
        for (const auto& w : cfg.params.at("windows"))
            windows.emplace_back(w.at(0).get<double>(), w.at(1).get<double>());
    else
        windows = {{0.25 * cfg.sim.T, 0.5 * cfg.sim.T},
                   {0.25 * cfg.sim.T, cfg.sim.T},
                   {0.5 * cfg.sim.T, cfg.sim.T}};
    const double z = param_num(cfg.params, "z", 3.0);
    const double threshold = param_num(cfg.params, "threshold", 0.95);

    const Battery bat = default_battery(phis.size(), windows);
    const auto rep = mg::residual_battery(cfg.sim, cs, phis, bat.specs, bat.gs, z, threshold, workers);

    nlohmann::json tests = nlohmann::json::array();
    std::vector<std::vector<double>> rows;
    for (const auto& t : rep.tests) {
        tests.push_back({{"phi_id", t.spec.phi},
                         {"s", t.spec.s},
                         {"t", t.spec.t},
                         {"g_id", bat.gs[t.spec.g].id + "_" + std::to_string(t.spec.g)},
                         {"stat", t.stat},
                         {"se", t.se},
                         {"z", t.z},
                         {"pass", t.pass}});
        rows.push_back({static_cast<double>(t.spec.phi), t.spec.s, t.spec.t,
                        static_cast<double>(t.spec.g), t.stat, t.se, t.z, t.pass ? 1.0 : 0.0});
    }
    sink.csv("tests.csv", {"phi_id", "s", "t", "g_id", "stat", "se", "z", "pass"}, rows);
    out.results["tests"] = tests;
    out.results["battery_pass_rate"] = rep.battery_pass_rate;
    out.results["config_hash"] = cfg.content_hash();
    out.results["aborted"] = rep.aborted;
    out.verdicts.push_back({"residual_battery", rep.pass, rep.battery_pass_rate,
                            "pass rate >= " + format_double(threshold)});
    return out;
}

Outputs run_qv(const ExperimentConfig& cfg, const coeffs::CoefficientSet& cs, int workers,
               FileSink& sink) {
    Outputs out;
    const auto phis = phis_or_default(cfg);
    const double lo = param_num(cfg.params, "ratio_lo", 0.9);
    const double hi = param_num(cfg.params, "ratio_hi", 1.1);
    const auto rep = mg::qv_match(cfg.sim, cs, phis.at(0), workers);
    out.results["mean_realized"] = rep.mean_realized;
    out.results["mean_predicted"] = rep.mean_predicted;
    out.results["ratio"] = rep.ratio;
    out.results["flagged"] = rep.flagged;
    out.results["aborted"] = rep.aborted;
    sink.csv("qv.csv", {"mean_realized", "mean_predicted", "ratio"},
             {{rep.mean_realized, rep.mean_predicted, rep.ratio}});
    out.verdicts.push_back({"qv_ratio_in_band", !rep.flagged && rep.ratio >= lo && rep.ratio <= hi,
                            rep.ratio,
                            "realized/predicted in [" + format_double(lo) + ", " + format_double(hi) + "]"});
    return out;
}

Outputs run_nscale(const ExperimentConfig& cfg, const coeffs::CoefficientSet& cs, int workers,
                   FileSink& sink) {
    Outputs out;
    const auto phis = phis_or_default(cfg);
    std::vector<int> ns = {50, 100, 200, 400};
    if (cfg.params.contains("ns")) ns = cfg.params.at("ns").get<std::vector<int>>();
    const double lo = param_num(cfg.params, "slope_lo", -1.15);
    const double hi = param_num(cfg.params, "slope_hi", -0.85);
    const auto rep = mg::n_scaling(cfg.sim, cs, phis.at(0), ns, workers);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < rep.ns.size(); ++i)
        rows.push_back({static_cast<double>(rep.ns[i]), rep.mean_qv[i]});
    sink.csv("nscale.csv", {"n", "mean_realized_qv"}, rows);
    out.results["ns"] = rep.ns;
    out.results["mean_qv"] = rep.mean_qv;
    out.results["slope"] = rep.fit.slope;
    out.results["slope_se"] = rep.fit.slope_se;
    out.verdicts.push_back({"qv_slope_in_band", rep.fit.slope >= lo && rep.fit.slope <= hi,
                            rep.fit.slope,
                            "log-log slope in [" + format_double(lo) + ", " + format_double(hi) + "]"});
    return out;
}

Outputs run_chaos(const ExperimentConfig& cfg, const coeffs::CoefficientSet& cs, int workers,
                  FileSink& sink) {
    Outputs out;
    const auto phis = phis_or_default(cfg);
    std::vector<int> ns = {25, 50, 100, 200};
    if (cfg.params.contains("ns")) ns = cfg.params.at("ns").get<std::vector<int>>();
    std::vector<double> anchor_times = {0.5 * cfg.sim.T, cfg.sim.T};
    if (cfg.params.contains("anchor_times"))
        anchor_times = cfg.params.at("anchor_times").get<std::vector<double>>();
    std::vector<mg::ChaosAnchor> anchors;
    for (double t : anchor_times)
        for (std::size_t p = 0; p < phis.size(); ++p) anchors.push_back({t, p});
    const auto rep = mg::chaos_trend(cfg.sim, cs, phis, anchors, ns, workers);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < rep.distances.size(); ++i)
        rows.push_back({static_cast<double>(rep.ns[i]), static_cast<double>(rep.ns[i + 1]),
                        rep.distances[i]});
    sink.csv("chaos.csv", {"n_low", "n_high", "energy_distance"}, rows);
    out.results["ns"] = rep.ns;
    out.results["distances"] = rep.distances;
    out.verdicts.push_back({"chaos_distance_non_increasing", rep.non_increasing,
                            rep.distances.empty() ? 0.0 : rep.distances.back(),
                            "consecutive-n energy distances do not increase"});
    return out;
}

Outputs run_density(const ExperimentConfig& cfg, const coeffs::CoefficientSet& cs, int workers,
                    FileSink& sink) {
    Outputs out;
    const std::string mode = param_str(cfg.params, "mode", "estimate");
    if (mode == "estimate") {
        const double t = param_num(cfg.params, "t", cfg.sim.T);
        const double eps = param_num(cfg.params, "eps", std::min(t, 16.0 * cfg.sim.dt()));
        const auto grid = grid_from(cfg.params, -8.0, 8.0, 1025);
        const auto dens = reg::estimate_density(cfg.sim, cs, t, eps, grid, workers);
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < dens.values.size(); ++i)
            rows.push_back({grid.origin[0] + grid.spacing[0] * static_cast<double>(i), dens.values[i]});
        sink.csv("density.csv", {"x", "density"}, rows);
        out.results["t"] = t;
        out.results["eps"] = eps;
        out.results["mass"] = dens.mass();
        out.verdicts.push_back({"density_mass_unit", std::abs(dens.mass() - 1.0) <= 1e-3,
                                dens.mass(), "trapezoid mass within 1e-3 of 1"});
        if (param_str(cfg.params, "reference", "") == "normal") {
            const double var = param_num(cfg.params, "reference_var", t);
            double supgap = 0;
            for (std::size_t i = 0; i < dens.values.size(); ++i) {
                const double x = grid.origin[0] + grid.spacing[0] * static_cast<double>(i);
                const double ref = std::exp(-0.5 * x * x / var) / std::sqrt(2 * std::numbers::pi * var);
                supgap = std::max(supgap, std::abs(dens.values[i] - ref));
            }
            out.results["sup_gap_vs_normal"] = supgap;
            const double tol = param_num(cfg.params, "sup_tol", 0.01);
            out.verdicts.push_back({"density_matches_normal", supgap <= tol, supgap,
                                    "sup gap vs N(0,var) <= " + format_double(tol)});
        }
    } else if (mode == "bessel_scaling") {
        const double r = param_num(cfg.params, "r", 1.5);
        const double s = param_num(cfg.params, "s", 0.5);
        std::vector<double> eps_list = {0.25, 0.125, 0.0625, 0.03125, 0.015625, 0.0078125};
        if (cfg.params.contains("eps_list"))
            eps_list = cfg.params.at("eps_list").get<std::vector<double>>();
        const double hw = param_num(cfg.params, "half_width", 8.0);
        const int points = param_int(cfg.params, "points", 2048);
        std::vector<double> norms;
        std::vector<std::vector<double>> rows;
        for (double eps : eps_list) {
            norms.push_back(reg::gaussian_bessel_norm(eps, r, s, hw, points));
            rows.push_back({eps, norms.back(), 0.0});
        }
        sink.csv("bessel_scaling.csv", {"eps", "bessel_norm", "se"}, rows);
        const auto fit = loglog_fit(eps_list, norms);
        const double rp = r / (r - 1.0);
        const double target = -0.5 * (s + static_cast<double>(cfg.sim.d) / rp);
        const double tol = param_num(cfg.params, "tol_rel", 0.1);
        out.results["slope"] = fit.slope;
        out.results["target"] = target;
        out.verdicts.push_back({"bessel_scaling_slope", std::abs(fit.slope - target) <= tol * std::abs(target),
                                fit.slope, "slope within " + format_double(100 * tol) + "% of " +
                                               format_double(target)});
    } else if (mode == "coupling") {
        sim::SimConfig scfg = cfg.sim;
        scfg.store_noise = true;
        const double t = param_num(cfg.params, "t", cfg.sim.T);
        std::vector<double> eps_list;
        if (cfg.params.contains("eps_list"))
            eps_list = cfg.params.at("eps_list").get<std::vector<double>>();
        else
            for (int k : {4, 8, 16, 32, 64}) eps_list.push_back(k * cfg.sim.dt());
        const double q = param_num(cfg.params, "q", 2.0);
        const auto fit = reg::coupling_rate(scfg, cs, t, eps_list, q, workers);
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < fit.abscissae.size(); ++i)
            rows.push_back({fit.abscissae[i], fit.ordinates[i], fit.ses[i]});
        sink.csv("coupling.csv", {"eps", "lq_gap", "se"}, rows);
        out.results["exponent"] = fit.exponent;
        out.results["target"] = fit.target;
        const double minexp = param_num(cfg.params, "min_exponent", 0.5 - 0.05);
        out.verdicts.push_back({"coupling_exponent", fit.exponent >= minexp, fit.exponent,
                                "fitted exponent >= " + format_double(minexp)});
    } else {
        throw ConfigError("params.mode", "unknown density mode '" + mode + "'");
    }
    return out;
}

Outputs run_blowup(const ExperimentConfig& cfg, const coeffs::CoefficientSet& cs, int workers,
                   FileSink& sink) {
    Outputs out;
    std::vector<double> ts;
    if (cfg.params.contains("ts"))
        ts = cfg.params.at("ts").get<std::vector<double>>();
    else
        for (int k : {32, 64, 96, 128, 192, 256}) ts.push_back(k * cfg.sim.dt());
    const double r = param_num(cfg.params, "r", 2.0);
    const double eps_max = param_num(cfg.params, "eps_max", 16.0 * cfg.sim.dt());
    const int blocks = param_int(cfg.params, "blocks", 8);
    const auto grid = grid_from(cfg.params, -6.0, 6.0, 769);
    std::vector<int> nlist = {cfg.sim.n};
    if (cfg.params.contains("n_list")) nlist = cfg.params.at("n_list").get<std::vector<int>>();
    const double gamma_max = param_num(cfg.params, "gamma_max", 1.0);

    nlohmann::json fits = nlohmann::json::array();
    std::vector<std::pair<double, double>> cis;
    for (int n : nlist) {
        sim::SimConfig scfg = cfg.sim;
        scfg.n = n;
        const auto fit = reg::blowup_fit(scfg, cs, ts, r, eps_max, grid, blocks, workers);
        const double gamma_hat = -fit.exponent;
        const double ci_lo = -fit.ci_hi, ci_hi = -fit.ci_lo;
        cis.emplace_back(ci_lo, ci_hi);
        fits.push_back({{"n", n}, {"gamma_hat", gamma_hat}, {"ci_lo", ci_lo}, {"ci_hi", ci_hi}});
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < fit.abscissae.size(); ++i)
            rows.push_back({fit.abscissae[i], fit.ordinates[i], 0.0});
        sink.csv("blowup_n" + std::to_string(n) + ".csv", {"t", "lr_norm", "se"}, rows);
        out.verdicts.push_back({"gamma_below_1_n" + std::to_string(n), gamma_hat < gamma_max,
                                gamma_hat, "fitted gamma < " + format_double(gamma_max)});
        if (cfg.params.contains("gamma_band")) {
            const double glo = cfg.params.at("gamma_band").at(0).get<double>();
            const double ghi = cfg.params.at("gamma_band").at(1).get<double>();
            out.verdicts.push_back({"gamma_in_band_n" + std::to_string(n),
                                    gamma_hat >= glo && gamma_hat <= ghi, gamma_hat,
                                    "gamma in [" + format_double(glo) + ", " + format_double(ghi) + "]"});
        }
    }
    if (nlist.size() >= 2) {
        bool overlap = true;
        for (std::size_t i = 0; i + 1 < cis.size(); ++i)
            overlap = overlap && std::max(cis[i].first, cis[i + 1].first) <=
                                     std::min(cis[i].second, cis[i + 1].second);
        out.verdicts.push_back({"gamma_ci_overlap_across_n", overlap, 0.0,
                                "block-resampled gamma CIs overlap across the n sweep"});
    }
    out.results["fits"] = fits;
    return out;
}

Outputs run_mollify(const ExperimentConfig& cfg, const coeffs::CoefficientSet& cs, int workers,
                    FileSink& sink) {
    (void)workers;
    Outputs out;
    std::vector<double> deltas = {0.4, 0.2, 0.1, 0.05};
    if (cfg.params.contains("deltas")) deltas = cfg.params.at("deltas").get<std::vector<double>>();
    const auto grid = grid_from(cfg.params, -2.0, 2.0, 2001);
    const int conv = param_int(cfg.params, "conv_nodes", 8192);
    const double r = param_num(cfg.params, "r", 2.0);
    if (cfg.sim.d != 1) throw ConfigError("params", "mollify study requires d=1");

    // the measure argument is inert for the built-in drift kinds used here
    WeightedSampleMeasure mu;
    mu.dim = 1;
    mu.points = {0.0};
    mu.weights = {1.0};

    std::vector<double> x(1), braw(grid.size());
    for (std::size_t p = 0; p < grid.size(); ++p) {
        grid.point(p, x.data());
        double v = 0;
        cs.drift(0.0, x.data(), mu.view(), &v);
        braw[p] = v;
    }
    std::vector<std::vector<double>> rows;
    std::vector<double> gaps;
    bool sup_ok = true;
    for (double delta : deltas) {
        const auto vals = coeffs::mollify_drift(cs.drift, 1, 0.0, mu.view(), delta, grid,
                                                {.conv_nodes_per_axis = conv});
        double acc = 0, sup = 0;
        for (std::size_t p = 0; p < grid.size(); ++p) {
            const double w = (p == 0 || p + 1 == grid.size()) ? 0.5 : 1.0;
            acc += w * std::pow(std::abs(vals[p] - braw[p]), r);
            sup = std::max(sup, std::abs(vals[p]));
        }
        const double gap = std::pow(acc * grid.spacing[0], 1.0 / r);
        gaps.push_back(gap);
        sup_ok = sup_ok && sup <= cs.drift_sup + 1e-10;
        rows.push_back({delta, gap, sup});
    }
    sink.csv("mollify.csv", {"delta", "lr_gap", "sup_abs"}, rows);
    bool monotone = true;
    for (std::size_t i = 0; i + 1 < gaps.size(); ++i) monotone = monotone && gaps[i + 1] < gaps[i];
    out.results["deltas"] = deltas;
    out.results["gaps"] = gaps;
    out.verdicts.push_back({"mollify_lr_gap_decreasing", monotone, gaps.empty() ? 0.0 : gaps.back(),
                            "L^r distance to the drift strictly decreases along delta"});
    out.verdicts.push_back({"mollify_sup_bound", sup_ok, 0.0, "sup |b^delta| <= sup |b|"});
    return out;
}

Outputs run_assumptions(const ExperimentConfig& cfg, const coeffs::CoefficientSet& cs, int workers,
                        FileSink& sink) {
    (void)workers;
    Outputs out;
    const std::string mode = param_str(cfg.params, "mode", "coefficients");
    if (mode == "sandwich") {
        const double R = param_num(cfg.params, "R", 1.0);
        std::vector<std::size_t> ks = {100, 1000, 10000};
        if (cfg.params.contains("ks")) ks = cfg.params.at("ks").get<std::vector<std::size_t>>();
        const int seeds = param_int(cfg.params, "seeds", 20);
        const int target_points = param_int(cfg.params, "target_points", 100000);
        const double final_tol = param_num(cfg.params, "final_tol", 0.05);
        const auto probe = grid_from(cfg.params, -2.0, 2.0, 801);

        WeightedSampleMeasure target;
        target.dim = 1;
        target.points.resize(static_cast<std::size_t>(target_points));
        for (int i = 0; i < target_points; ++i)
            target.points[static_cast<std::size_t>(i)] = (i + 0.5) / static_cast<double>(target_points);

        auto bfun = [R](std::span<const double> xx, const MeasureView& m) {
            return coeffs::drift_indicator(xx, m, R);
        };
        std::vector<std::vector<double>> per_k(ks.size());
        for (int seed = 0; seed < seeds; ++seed) {
            const auto rep = coeffs::narrow_local_continuity_test(
                bfun, target.view(),
                [&](std::size_t k) {
                    rng::UniformStream u(rng::derive_seed(cfg.sim.master_seed,
                                                          static_cast<std::uint64_t>(seed),
                                                          rng::kStreamAux, 1));
                    std::vector<double> pts(k);
                    for (double& pv : pts) pv = u.next();
                    return WeightedSampleMeasure::equal(1, std::move(pts));
                },
                ks, probe);
            for (std::size_t i = 0; i < ks.size(); ++i) per_k[i].push_back(rep.sup_gaps[i]);
        }
        std::vector<double> medians;
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < ks.size(); ++i) {
            auto v = per_k[i];
            std::sort(v.begin(), v.end());
            medians.push_back(v[v.size() / 2]);
            rows.push_back({static_cast<double>(ks[i]), medians.back()});
        }
        sink.csv("sandwich.csv", {"k", "median_sup_gap"}, rows);
        bool decreasing = true;
        for (std::size_t i = 0; i + 1 < medians.size(); ++i)
            decreasing = decreasing && medians[i + 1] < medians[i];
        out.results["ks"] = ks;
        out.results["median_gaps"] = medians;
        out.verdicts.push_back({"sandwich_gap_final", medians.back() <= final_tol, medians.back(),
                                "median sup gap at the largest k <= " + format_double(final_tol)});
        out.verdicts.push_back({"sandwich_gap_decreasing", decreasing, medians.back(),
                                "median sup gaps decrease along k"});
    } else if (mode == "coefficients") {
        const int count = param_int(cfg.params, "samples", 400);
        const auto samples = coeffs::sample_coefficient_inputs(
            cfg.sim.d, static_cast<std::size_t>(count), cfg.sim.master_seed + 101);
        const auto ell = coeffs::check_ellipticity(cs, samples);
        out.results["ellipticity"] = {{"min_quotient", ell.min_quotient},
                                      {"kappa", ell.kappa},
                                      {"samples", ell.samples}};
        out.verdicts.push_back({"ellipticity", ell.pass, ell.min_quotient,
                                "min z^T sigma sigma^T z / |z|^2 >= kappa"});
        std::vector<std::pair<coeffs::CoeffSample, coeffs::CoeffSample>> pairs;
        for (std::size_t i = 0; i + 1 < samples.size(); i += 2) {
            auto a = samples[i], b = samples[i + 1];
            b.t = a.t;
            pairs.emplace_back(std::move(a), std::move(b));
        }
        const double C = param_num(cfg.params, "holder_C", 1.0);
        const auto hol = coeffs::check_holder(cs, pairs, C, cfg.beta);
        out.results["holder"] = {{"max_ratio", hol.max_ratio}, {"C", C}, {"beta", cfg.beta}};
        out.verdicts.push_back(
            {"holder", hol.pass, hol.max_ratio, "max Holder ratio <= declared C"});
        sink.csv("assumptions.csv", {"min_ellipticity_quotient", "max_holder_ratio"},
                 {{ell.min_quotient, hol.max_ratio}});
    } else {
        throw ConfigError("params.mode", "unknown assumptions mode '" + mode + "'");
    }
    return out;
}

}  // namespace

Battery default_battery(std::size_t phi_count,
                        const std::vector<std::pair<double, double>>& windows) {
    Battery bat;
    bat.gs.push_back(mg::PastFunctional::one());
    // one tanh functional per distinct window start, anchored there
    std::vector<double> starts;
    for (const auto& [s, t] : windows) {
        (void)t;
        if (std::find(starts.begin(), starts.end(), s) == starts.end()) starts.push_back(s);
    }
    std::vector<std::size_t> tanh_index(starts.size());
    for (std::size_t i = 0; i < starts.size(); ++i) {
        tanh_index[i] = bat.gs.size();
        bat.gs.push_back(mg::PastFunctional::tanh_of(starts[i], 0));
    }
    for (std::size_t p = 0; p < phi_count; ++p)
        for (const auto& [s, t] : windows) {
            const std::size_t si =
                static_cast<std::size_t>(std::find(starts.begin(), starts.end(), s) - starts.begin());
            bat.specs.push_back({p, s, t, 0});
            bat.specs.push_back({p, s, t, tanh_index[si]});
        }
    return bat;
}

RunResult run_experiment(const ExperimentConfig& cfg_in, const RunOptions& opts) {
    RunResult res;
    ExperimentConfig cfg = cfg_in;
    if (!opts.out_dir_override.empty()) cfg.out_dir = opts.out_dir_override;
    if (opts.seed_override) cfg.sim.master_seed = *opts.seed_override;
    const int workers = resolve_workers(opts.workers);
    const std::string hash = cfg.content_hash();

    FileSink sink{fs::path(cfg.out_dir), hash};
    try {
        cfg.sim.validate();
        fs::create_directories(cfg.out_dir);
        const auto cs = cfg.build_coefficients();

        Outputs out;
        switch (cfg.kind) {
            case Kind::Simulate: out = run_simulate(cfg, cs, workers, sink); break;
            case Kind::Verify: out = run_verify(cfg, cs, workers, sink); break;
            case Kind::Qv: out = run_qv(cfg, cs, workers, sink); break;
            case Kind::NScale: out = run_nscale(cfg, cs, workers, sink); break;
            case Kind::Chaos: out = run_chaos(cfg, cs, workers, sink); break;
            case Kind::Density: out = run_density(cfg, cs, workers, sink); break;
            case Kind::Blowup: out = run_blowup(cfg, cs, workers, sink); break;
            case Kind::Mollify: out = run_mollify(cfg, cs, workers, sink); break;
            case Kind::Assumptions: out = run_assumptions(cfg, cs, workers, sink); break;
        }

        bool all_pass = true;
        nlohmann::json verdicts = nlohmann::json::array();
        for (const auto& v : out.verdicts) {
            all_pass = all_pass && v.pass;
            verdicts.push_back(
                {{"name", v.name}, {"pass", v.pass}, {"value", v.value}, {"criterion", v.detail}});
        }

        res.report["kind"] = kind_name(cfg.kind);
        res.report["config"] = cfg.to_json();
        res.report["config"].erase("out_dir");  // placement is environment, not identity
        res.report["config_hash"] = hash;
        res.report["master_seed"] = cfg.sim.master_seed;
        res.report["results"] = out.results;
        res.report["verdicts"] = verdicts;
        res.report["pass"] = all_pass;
        res.report["generated_at"] = "";  // populated below, excluded from byte comparisons
        {
            std::time_t now = std::time(nullptr);
            char buf[32];
            std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
            res.report["generated_at"] = buf;
        }
        sink.json_file("report.json", res.report);

        nlohmann::json manifest;
        manifest["config_hash"] = hash;
        manifest["master_seed"] = cfg.sim.master_seed;
        manifest["kind"] = kind_name(cfg.kind);
        manifest["files"] = sink.created();
        sink.json_file("manifest.json", manifest);

        res.files = sink.created();
        res.exit_code = all_pass ? 0 : 2;
    } catch (const std::exception& e) {
        sink.remove_all_created();  // no partial artifacts on execution error
        res.exit_code = 1;
        res.error = e.what();
    }
    return res;
}

}  // namespace mkvlab::run
