#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "mkvlab/coeffs.hpp"
#include "mkvlab/sim.hpp"
#include "mkvlab/test_functions.hpp"

namespace mkvlab::run {

enum class Kind { Simulate, Verify, Qv, NScale, Chaos, Density, Blowup, Mollify, Assumptions };

std::string kind_name(Kind k);
Kind kind_from_name(const std::string& name);

/// Schema violation with the offending field path.
struct ConfigError : std::runtime_error {
    std::string path;
    ConfigError(std::string path_, const std::string& what)
        : std::runtime_error(path_ + ": " + what), path(std::move(path_)) {}
};

struct CoeffSpec {
    std::string kind = "zero";
    nlohmann::json params = nlohmann::json::object();
};

struct PhiSpec {
    std::string kind = "gauss";
    nlohmann::json params = nlohmann::json::object();
};

struct ExperimentConfig {
    Kind kind = Kind::Simulate;
    sim::SimConfig sim;
    CoeffSpec drift, sigma, sigma_bar;
    double kappa = 0;
    double beta = 1.0;
    std::vector<PhiSpec> phis;
    nlohmann::json params = nlohmann::json::object();
    std::string out_dir = "mkvlab-out";

    static ExperimentConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    /// FNV-1a over the canonical serialization (sorted keys, exact floats).
    std::string content_hash() const;

    coeffs::CoefficientSet build_coefficients() const;
    std::vector<TestFunction> build_phis() const;
};

TestFunction build_phi(const PhiSpec& spec, int dim);

nlohmann::json config_schema();

}  // namespace mkvlab::run
