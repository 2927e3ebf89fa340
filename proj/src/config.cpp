#include "mkvlab/config.hpp"

#include <cmath>

namespace mkvlab::run {

std::string kind_name(Kind k) {
    switch (k) {
        case Kind::Simulate: return "simulate";
        case Kind::Verify: return "verify";
        case Kind::Qv: return "qv";
        case Kind::NScale: return "nscale";
        case Kind::Chaos: return "chaos";
        case Kind::Density: return "density";
        case Kind::Blowup: return "blowup";
        case Kind::Mollify: return "mollify";
        case Kind::Assumptions: return "assumptions";
    }
    return "simulate";
}

Kind kind_from_name(const std::string& name) {
    for (Kind k : {Kind::Simulate, Kind::Verify, Kind::Qv, Kind::NScale, Kind::Chaos, Kind::Density,
                   Kind::Blowup, Kind::Mollify, Kind::Assumptions})
        if (kind_name(k) == name) return k;
    throw ConfigError("kind", "unknown experiment kind '" + name + "'");
}

namespace {

template <typename T>
T get_field(const nlohmann::json& j, const std::string& path, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + "." + key, e.what());
    }
}

CoeffSpec coeff_spec_from(const nlohmann::json& j, const std::string& path) {
    CoeffSpec s;
    if (j.is_null()) return s;
    if (!j.is_object()) throw ConfigError(path, "must be an object {kind, params}");
    s.kind = get_field<std::string>(j, path, "kind", "zero");
    if (j.contains("params")) s.params = j.at("params");
    return s;
}

nlohmann::json coeff_spec_json(const CoeffSpec& s) {
    return {{"kind", s.kind}, {"params", s.params}};
}

double param_or(const nlohmann::json& p, const std::string& key, double fallback) {
    return p.contains(key) ? p.at(key).get<double>() : fallback;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("", "config must be a JSON object");
    ExperimentConfig cfg;
    cfg.kind = kind_from_name(get_field<std::string>(j, "", "kind", "simulate"));
    if (j.contains("sim")) {
        const auto& s = j.at("sim");
        cfg.sim.n = get_field<int>(s, "sim", "n", cfg.sim.n);
        cfg.sim.d = get_field<int>(s, "sim", "d", cfg.sim.d);
        cfg.sim.m = get_field<int>(s, "sim", "m", cfg.sim.m);
        cfg.sim.T = get_field<double>(s, "sim", "T", cfg.sim.T);
        cfg.sim.steps = get_field<int>(s, "sim", "steps", cfg.sim.steps);
        cfg.sim.replications = get_field<int>(s, "sim", "replications", cfg.sim.replications);
        cfg.sim.master_seed = get_field<std::uint64_t>(s, "sim", "master_seed", cfg.sim.master_seed);
        cfg.sim.store_noise = get_field<bool>(s, "sim", "store_noise", cfg.sim.store_noise);
        if (s.contains("x0")) cfg.sim.x0 = s.at("x0").get<std::vector<double>>();
    }
    try {
        cfg.sim.validate();
    } catch (const std::exception& e) {
        throw ConfigError("sim", e.what());
    }
    if (j.contains("coefficients")) {
        const auto& c = j.at("coefficients");
        cfg.drift = coeff_spec_from(c.value("drift", nlohmann::json()), "coefficients.drift");
        cfg.sigma = coeff_spec_from(c.value("sigma", nlohmann::json()), "coefficients.sigma");
        cfg.sigma_bar =
            coeff_spec_from(c.value("sigma_bar", nlohmann::json()), "coefficients.sigma_bar");
        cfg.kappa = get_field<double>(c, "coefficients", "kappa", 0.0);
        cfg.beta = get_field<double>(c, "coefficients", "beta", 1.0);
    }
    if (j.contains("phis")) {
        for (std::size_t i = 0; i < j.at("phis").size(); ++i) {
            const auto& p = j.at("phis").at(i);
            PhiSpec ps;
            ps.kind = get_field<std::string>(p, "phis[" + std::to_string(i) + "]", "kind",
                                             std::string("gauss"));
            if (p.contains("params")) ps.params = p.at("params");
            cfg.phis.push_back(ps);
        }
    }
    if (j.contains("params")) cfg.params = j.at("params");
    cfg.out_dir = get_field<std::string>(j, "", "out_dir", cfg.out_dir);
    // fail fast on unknown coefficient/phi kinds
    cfg.build_coefficients();
    cfg.build_phis();
    return cfg;
}

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json j;
    j["kind"] = kind_name(kind);
    j["sim"] = {{"n", sim.n},
                {"d", sim.d},
                {"m", sim.m},
                {"T", sim.T},
                {"steps", sim.steps},
                {"replications", sim.replications},
                {"master_seed", sim.master_seed},
                {"store_noise", sim.store_noise},
                {"x0", sim.x0.empty() ? std::vector<double>(static_cast<std::size_t>(sim.d), 0.0)
                                      : sim.x0}};
    j["coefficients"] = {{"drift", coeff_spec_json(drift)},
                         {"sigma", coeff_spec_json(sigma)},
                         {"sigma_bar", coeff_spec_json(sigma_bar)},
                         {"kappa", kappa},
                         {"beta", beta}};
    nlohmann::json ph = nlohmann::json::array();
    for (const auto& p : phis) ph.push_back({{"kind", p.kind}, {"params", p.params}});
    j["phis"] = ph;
    j["params"] = params;
    j["out_dir"] = out_dir;
    return j;
}

std::string ExperimentConfig::content_hash() const {
    auto j = to_json();
    j.erase("out_dir");  // relocating outputs must not change identity
    return hex64(fnv1a64(j.dump()));
}

coeffs::CoefficientSet ExperimentConfig::build_coefficients() const {
    using namespace coeffs;
    CoefficientSet cs;
    cs.dim = sim.d;
    cs.noise_dim = sim.m;
    cs.kappa = kappa;
    cs.holder_beta = beta;
    const int d = sim.d, m = sim.m;

    auto bad = [](const std::string& path, const std::string& what) -> ConfigError {
        return ConfigError(path, what);
    };

    // drift
    {
        const auto& p = drift.params;
        if (drift.kind == "zero") {
            cs.drift = fields::zero(d);
            cs.drift_sup = 0;
        } else if (drift.kind == "constant") {
            std::vector<double> v;
            if (p.contains("values"))
                v = p.at("values").get<std::vector<double>>();
            else
                v.assign(static_cast<std::size_t>(d), param_or(p, "value", 0.0));
            if (static_cast<int>(v.size()) != d)
                throw bad("coefficients.drift.params.values", "size must equal d");
            double n2 = 0;
            for (double x : v) n2 += x * x;
            cs.drift = fields::constant(v);
            cs.drift_sup = std::sqrt(n2);
        } else if (drift.kind == "indicator") {
            const double R = param_or(p, "R", 1.0);
            if (!(R > 0)) throw bad("coefficients.drift.params.R", "must be > 0");
            cs.drift = fields::indicator_drift(d, R);
            cs.drift_sup = std::sqrt(static_cast<double>(d));
        } else if (drift.kind == "hk") {
            if (d != 1) throw bad("coefficients.drift.kind", "hk requires d=1");
            const double R = param_or(p, "R", 1.0);
            cs.drift = fields::hk_drift(R);
            cs.drift_sup = R;
        } else if (drift.kind == "hk_mollified") {
            if (d != 1) throw bad("coefficients.drift.kind", "hk_mollified requires d=1");
            const double R = param_or(p, "R", 1.0);
            const double delta = param_or(p, "delta", 0.1);
            cs.drift = fields::hk_mollified_drift(R, delta);
            cs.drift_sup = R;
        } else if (drift.kind == "step") {
            if (d != 1) throw bad("coefficients.drift.kind", "step requires d=1");
            cs.drift = fields::step_drift();
            cs.drift_sup = 1;
        } else {
            throw bad("coefficients.drift.kind", "unknown kind '" + drift.kind + "'");
        }
    }
    // sigma
    {
        const auto& p = sigma.params;
        if (sigma.kind == "zero") {
            cs.sigma = fields::zero(d * d);
            cs.sigma_sup = 0;
        } else if (sigma.kind == "constant") {
            const double v = param_or(p, "value", 1.0);
            cs.sigma = fields::scaled_identity(d, v);
            cs.sigma_sup = std::abs(v);
        } else if (sigma.kind == "statistic_tanh") {
            const double s0 = param_or(p, "s0", 1.0);
            const double a = param_or(p, "a", 0.5);
            if (!(std::abs(a) < 1)) throw bad("coefficients.sigma.params.a", "need |a| < 1");
            cs.sigma = fields::statistic_tanh_sigma(d, s0, a);
            cs.sigma_sup = std::abs(s0) * (1 + std::abs(a));
        } else if (sigma.kind == "holder_sqrt") {
            if (d != 1) throw bad("coefficients.sigma.kind", "holder_sqrt requires d=1");
            const double base = param_or(p, "base", 0.6);
            const double amp = param_or(p, "amp", 0.5);
            const double cap = param_or(p, "cap", 1.0);
            cs.sigma = fields::holder_sqrt_sigma(base, amp, cap);
            cs.sigma_sup = base + amp * cap;
        } else if (sigma.kind == "time_affine") {
            if (d != 1) throw bad("coefficients.sigma.kind", "time_affine requires d=1");
            const double a = param_or(p, "a", 1.0), b = param_or(p, "b", 0.0);
            cs.sigma = fields::time_affine_sigma(a, b);
            cs.sigma_sup = std::abs(a) + std::abs(b) * sim.T;
        } else {
            throw bad("coefficients.sigma.kind", "unknown kind '" + sigma.kind + "'");
        }
    }
    // sigma_bar (d x m)
    {
        const auto& p = sigma_bar.params;
        if (sigma_bar.kind == "zero") {
            cs.sigma_bar = fields::zero(d * m);
            cs.sigma_bar_sup = 0;
        } else if (sigma_bar.kind == "constant") {
            const double v = param_or(p, "value", 1.0);
            std::vector<double> mat(static_cast<std::size_t>(d) * m, 0.0);
            for (int i = 0; i < std::min(d, m); ++i) mat[static_cast<std::size_t>(i) * m + i] = v;
            cs.sigma_bar = fields::constant(mat);
            cs.sigma_bar_sup = std::abs(v);
        } else {
            throw bad("coefficients.sigma_bar.kind", "unknown kind '" + sigma_bar.kind + "'");
        }
    }
    return cs;
}

TestFunction build_phi(const PhiSpec& spec, int dim) {
    const auto& p = spec.params;
    if (spec.kind == "gauss")
        return testfn::gaussian_bump(dim, param_or(p, "scale", 1.0),
                                     p.contains("center") ? p.at("center").get<std::vector<double>>()
                                                          : std::vector<double>{});
    if (spec.kind == "xgauss") {
        if (dim != 1) throw ConfigError("phis.kind", "xgauss requires d=1");
        return testfn::x_gaussian();
    }
    if (spec.kind == "singauss") {
        if (dim != 1) throw ConfigError("phis.kind", "singauss requires d=1");
        return testfn::sine_gaussian(param_or(p, "freq", 2.0));
    }
    if (spec.kind == "bump") return testfn::compact_bump(dim, param_or(p, "radius", 3.0));
    if (spec.kind == "const") return testfn::constant(dim, param_or(p, "value", 1.0));
    throw ConfigError("phis.kind", "unknown kind '" + spec.kind + "'");
}

std::vector<TestFunction> ExperimentConfig::build_phis() const {
    std::vector<TestFunction> out;
    for (const auto& p : phis) out.push_back(build_phi(p, sim.d));
    return out;
}

nlohmann::json config_schema() {
    return nlohmann::json::parse(R"({
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "title": "mkvlab experiment configuration",
  "type": "object",
  "required": ["kind"],
  "properties": {
    "kind": {"enum": ["simulate","verify","qv","nscale","chaos","density","blowup","mollify","assumptions"]},
    "sim": {
      "type": "object",
      "properties": {
        "n": {"type": "integer", "minimum": 1},
        "d": {"type": "integer", "minimum": 1},
        "m": {"type": "integer", "minimum": 1},
        "T": {"type": "number", "exclusiveMinimum": 0},
        "steps": {"type": "integer", "minimum": 1},
        "replications": {"type": "integer", "minimum": 1},
        "master_seed": {"type": "integer", "minimum": 0},
        "store_noise": {"type": "boolean"},
        "x0": {"type": "array", "items": {"type": "number"}}
      }
    },
    "coefficients": {
      "type": "object",
      "properties": {
        "drift": {"$ref": "#/$defs/coeff", "description": "kinds: zero|constant|indicator|hk|hk_mollified|step"},
        "sigma": {"$ref": "#/$defs/coeff", "description": "kinds: zero|constant|statistic_tanh|holder_sqrt|time_affine"},
        "sigma_bar": {"$ref": "#/$defs/coeff", "description": "kinds: zero|constant"},
        "kappa": {"type": "number", "minimum": 0},
        "beta": {"type": "number", "exclusiveMinimum": 0, "maximum": 1}
      }
    },
    "phis": {"type": "array", "items": {"type": "object", "properties": {"kind": {"enum": ["gauss","xgauss","singauss","bump","const"]}, "params": {"type": "object"}}}},
    "params": {"type": "object", "description": "kind-specific parameters; see docs/schema notes emitted next to this schema"},
    "out_dir": {"type": "string"}
  },
  "$defs": {
    "coeff": {"type": "object", "properties": {"kind": {"type": "string"}, "params": {"type": "object"}}}
  }
})");
}

}  // namespace mkvlab::run
