#include "mkvlab/runner.hpp"

namespace mkvlab::run {

namespace {

using nlohmann::json;

json sim_block(int n, int steps, int reps, std::uint64_t seed, double T = 1.0) {
    return {{"n", n}, {"d", 1}, {"m", 1}, {"T", T}, {"steps", steps},
            {"replications", reps}, {"master_seed", seed}};
}

json coeffs_block(json drift, json sigma, json sigma_bar, double kappa, double beta) {
    return {{"drift", std::move(drift)}, {"sigma", std::move(sigma)},
            {"sigma_bar", std::move(sigma_bar)}, {"kappa", kappa}, {"beta", beta}};
}

json ck(const std::string& kind, json params = json::object()) {
    return {{"kind", kind}, {"params", std::move(params)}};
}

// The canonical test-function roster: a gaussian bump, an odd bump, a
// compactly supported bump and an oscillating bump.
json phi_roster() {
    return json::array({{{"kind", "gauss"}, {"params", json::object()}},
                        {{"kind", "xgauss"}, {"params", json::object()}},
                        {{"kind", "bump"}, {"params", {{"radius", 3.0}}}},
                        {{"kind", "singauss"}, {"params", {{"freq", 2.0}}}}});
}

struct Preset {
    const char* name;
    json (*make)();
};

json bm_null() {
    json j;
    j["kind"] = "verify";
    j["sim"] = sim_block(100, 256, 2000, 20240811);
    j["coefficients"] = coeffs_block(ck("zero"), ck("constant", {{"value", 1.0}}), ck("zero"), 1.0, 1.0);
    j["phis"] = phi_roster();
    j["params"] = {{"z", 3.0}, {"threshold", 0.95}};
    j["out_dir"] = "mkvlab-out/bm-null";
    return j;
}

json qv_common_noise() {
    json j;
    j["kind"] = "qv";
    j["sim"] = sim_block(50, 512, 500, 71);
    j["coefficients"] = coeffs_block(ck("zero"), ck("zero"), ck("constant", {{"value", 1.0}}), 0.0, 1.0);
    j["phis"] = json::array({{{"kind", "xgauss"}, {"params", json::object()}}});
    j["params"] = {{"ratio_lo", 0.9}, {"ratio_hi", 1.1}};
    j["out_dir"] = "mkvlab-out/qv-common-noise";
    return j;
}

json qv_idiosyncratic() {
    json j;
    j["kind"] = "qv";
    j["sim"] = sim_block(100, 512, 2000, 72);
    j["coefficients"] = coeffs_block(ck("zero"), ck("constant", {{"value", 1.0}}), ck("zero"), 1.0, 1.0);
    j["phis"] = json::array({{{"kind", "xgauss"}, {"params", json::object()}}});
    j["params"] = {{"ratio_lo", 0.9}, {"ratio_hi", 1.1}};
    j["out_dir"] = "mkvlab-out/qv-idiosyncratic";
    return j;
}

json nscale_bm() {
    json j;
    j["kind"] = "nscale";
    j["sim"] = sim_block(100, 256, 400, 73);
    j["coefficients"] = coeffs_block(ck("zero"), ck("constant", {{"value", 1.0}}), ck("zero"), 1.0, 1.0);
    j["phis"] = json::array({{{"kind", "xgauss"}, {"params", json::object()}}});
    j["params"] = {{"ns", {50, 100, 200, 400}}, {"slope_lo", -1.15}, {"slope_hi", -0.85}};
    j["out_dir"] = "mkvlab-out/nscale-bm";
    return j;
}

json nscale_common() {
    json j;
    j["kind"] = "nscale";
    j["sim"] = sim_block(100, 256, 400, 74);
    j["coefficients"] = coeffs_block(ck("zero"), ck("zero"), ck("constant", {{"value", 1.0}}), 0.0, 1.0);
    j["phis"] = json::array({{{"kind", "xgauss"}, {"params", json::object()}}});
    j["params"] = {{"ns", {50, 100, 200, 400}}, {"slope_lo", -0.1}, {"slope_hi", 0.1}};
    j["out_dir"] = "mkvlab-out/nscale-common";
    return j;
}

json chaos_bm() {
    json j;
    j["kind"] = "chaos";
    j["sim"] = sim_block(100, 128, 800, 75);
    j["coefficients"] = coeffs_block(ck("zero"), ck("constant", {{"value", 1.0}}), ck("zero"), 1.0, 1.0);
    j["phis"] = json::array({{{"kind", "gauss"}, {"params", json::object()}}});
    j["params"] = {{"ns", {25, 50, 100, 200}}, {"anchor_times", {0.5, 1.0}}};
    j["out_dir"] = "mkvlab-out/chaos-bm";
    return j;
}

json density_bm() {
    json j;
    j["kind"] = "density";
    j["sim"] = sim_block(100, 256, 1000, 76);
    j["coefficients"] = coeffs_block(ck("zero"), ck("constant", {{"value", 1.0}}), ck("zero"), 1.0, 1.0);
    j["params"] = {{"mode", "estimate"}, {"t", 1.0}, {"eps", 1.0},
                   {"grid", {{"lo", -8.0}, {"hi", 8.0}, {"points", 1025}}},
                   {"reference", "normal"}, {"reference_var", 1.0}, {"sup_tol", 0.01}};
    j["out_dir"] = "mkvlab-out/density-bm";
    return j;
}

json bessel_gaussian() {
    json j;
    j["kind"] = "density";
    j["sim"] = sim_block(1, 16, 1, 0);
    j["coefficients"] = coeffs_block(ck("zero"), ck("constant", {{"value", 1.0}}), ck("zero"), 1.0, 1.0);
    j["params"] = {{"mode", "bessel_scaling"}, {"r", 1.5}, {"s", 0.5},
                   {"eps_list", {0.25, 0.125, 0.0625, 0.03125, 0.015625, 0.0078125}},
                   {"half_width", 8.0}, {"points", 2048}, {"tol_rel", 0.1}};
    j["out_dir"] = "mkvlab-out/bessel-gaussian";
    return j;
}

json coupling_const() {
    json j;
    j["kind"] = "density";
    j["sim"] = sim_block(100, 512, 200, 77);
    j["coefficients"] = coeffs_block(ck("constant", {{"value", 1.0}}),
                                     ck("constant", {{"value", 1.0}}), ck("zero"), 1.0, 1.0);
    j["params"] = {{"mode", "coupling"}, {"t", 1.0}, {"q", 2.0}, {"min_exponent", 0.9}};
    j["out_dir"] = "mkvlab-out/coupling-const";
    return j;
}

json coupling_holder() {
    json j;
    j["kind"] = "density";
    j["sim"] = sim_block(100, 512, 200, 78);
    j["coefficients"] = coeffs_block(
        ck("zero"), ck("holder_sqrt", {{"base", 0.6}, {"amp", 0.5}, {"cap", 1.0}}), ck("zero"),
        0.36, 0.5);
    j["params"] = {{"mode", "coupling"}, {"t", 1.0}, {"q", 2.0}, {"min_exponent", 0.55}};
    j["out_dir"] = "mkvlab-out/coupling-holder";
    return j;
}

json blowup_bm() {
    json j;
    j["kind"] = "blowup";
    j["sim"] = sim_block(100, 512, 400, 79);
    j["coefficients"] = coeffs_block(ck("zero"), ck("constant", {{"value", 1.0}}), ck("zero"), 1.0, 1.0);
    j["params"] = {{"ts", {0.0625, 0.125, 0.1875, 0.25, 0.375, 0.5}}, {"r", 2.0},
                   {"eps_max", 0.03125}, {"blocks", 8}, {"n_list", {50, 200}},
                   {"gamma_band", {0.2, 0.3}},
                   {"grid", {{"lo", -6.0}, {"hi", 6.0}, {"points", 769}}}};
    j["out_dir"] = "mkvlab-out/blowup-bm";
    return j;
}

json blowup_drift() {
    json j = blowup_bm();
    j["coefficients"] = coeffs_block(ck("constant", {{"value", 1.0}}),
                                     ck("constant", {{"value", 1.0}}), ck("zero"), 1.0, 1.0);
    j["sim"] = sim_block(100, 512, 400, 80);
    j["params"].erase("gamma_band");
    j["params"]["n_list"] = {100};
    j["out_dir"] = "mkvlab-out/blowup-drift";
    return j;
}

json mollify_step() {
    json j;
    j["kind"] = "mollify";
    j["sim"] = sim_block(1, 16, 1, 0);
    j["coefficients"] = coeffs_block(ck("step"), ck("constant", {{"value", 1.0}}), ck("zero"), 1.0, 1.0);
    j["params"] = {{"deltas", {0.4, 0.2, 0.1, 0.05}}, {"conv_nodes", 8192}, {"r", 2.0},
                   {"grid", {{"lo", -2.0}, {"hi", 2.0}, {"points", 2001}}}};
    j["out_dir"] = "mkvlab-out/mollify-step";
    return j;
}

json indicator_sandwich() {
    json j;
    j["kind"] = "assumptions";
    j["sim"] = sim_block(1, 16, 1, 20240811);
    j["coefficients"] =
        coeffs_block(ck("indicator", {{"R", 1.0}}), ck("constant", {{"value", 1.0}}), ck("zero"), 1.0, 1.0);
    j["params"] = {{"mode", "sandwich"}, {"R", 1.0}, {"ks", {100, 1000, 10000}}, {"seeds", 20},
                   {"target_points", 100000}, {"final_tol", 0.05},
                   {"grid", {{"lo", -2.0}, {"hi", 2.0}, {"points", 801}}}};
    j["out_dir"] = "mkvlab-out/indicator-sandwich";
    return j;
}

json assumptions_tanh() {
    json j;
    j["kind"] = "assumptions";
    j["sim"] = sim_block(1, 16, 1, 81);
    j["coefficients"] = coeffs_block(ck("zero"), ck("statistic_tanh", {{"s0", 1.0}, {"a", 0.5}}),
                                     ck("zero"), 0.25, 1.0);
    j["params"] = {{"mode", "coefficients"}, {"samples", 400}, {"holder_C", 3.0}};
    j["out_dir"] = "mkvlab-out/assumptions-tanh";
    return j;
}

json hk_raw() {
    json j;
    j["kind"] = "simulate";
    j["sim"] = sim_block(100, 256, 8, 20240812);
    j["coefficients"] = coeffs_block(ck("hk", {{"R", 1.0}}), ck("constant", {{"value", 0.5}}),
                                     ck("constant", {{"value", 0.3}}), 0.25, 1.0);
    j["out_dir"] = "mkvlab-out/hk-raw";
    return j;
}

json hk_mollified() {
    json j = hk_raw();
    j["coefficients"]["drift"] = ck("hk_mollified", {{"R", 1.0}, {"delta", 0.1}});
    j["out_dir"] = "mkvlab-out/hk-mollified";
    return j;
}

json moments_bm() {
    json j;
    j["kind"] = "simulate";
    j["sim"] = sim_block(100, 256, 300, 82);
    j["coefficients"] = coeffs_block(ck("zero"), ck("constant", {{"value", 1.0}}), ck("zero"), 1.0, 1.0);
    j["params"] = {{"moments", {{"q", 2.0}, {"K", 3.0}, {"eps", 0.1}, {"concentration_q", 4.0}}}};
    j["out_dir"] = "mkvlab-out/moments-bm";
    return j;
}

const Preset kPresets[] = {
    {"bm-null", bm_null},
    {"qv-common-noise", qv_common_noise},
    {"qv-idiosyncratic", qv_idiosyncratic},
    {"nscale-bm", nscale_bm},
    {"nscale-common", nscale_common},
    {"chaos-bm", chaos_bm},
    {"density-bm", density_bm},
    {"bessel-gaussian", bessel_gaussian},
    {"coupling-const", coupling_const},
    {"coupling-holder", coupling_holder},
    {"blowup-bm", blowup_bm},
    {"blowup-drift", blowup_drift},
    {"mollify-step", mollify_step},
    {"indicator-sandwich", indicator_sandwich},
    {"assumptions-tanh", assumptions_tanh},
    {"hk-raw", hk_raw},
    {"hk-mollified", hk_mollified},
    {"moments-bm", moments_bm},
};

}  // namespace

std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    for (const auto& p : kPresets) names.emplace_back(p.name);
    return names;
}

nlohmann::json preset_config(const std::string& name) {
    for (const auto& p : kPresets)
        if (name == p.name) return p.make();
    throw std::out_of_range("unknown preset '" + name + "'");
}

}  // namespace mkvlab::run
