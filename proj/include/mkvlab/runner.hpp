#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mkvlab/config.hpp"
#include "mkvlab/mgverify.hpp"

namespace mkvlab::run {

struct RunOptions {
    int workers = 0;  // <= 0 resolves to hardware concurrency; never affects numbers
    std::string out_dir_override;
    std::optional<std::uint64_t> seed_override;
};

struct RunResult {
    int exit_code = 0;  // 0 verdicts pass, 1 execution error, 2 verdict failure
    nlohmann::json report;
    std::string error;
    std::vector<std::string> files;
};

RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

std::vector<std::string> preset_names();
/// Throws std::out_of_range for unknown names.
nlohmann::json preset_config(const std::string& name);

/// The default residual battery: every phi x (s,t) window x {1, tanh(Lambda_s[phi_0])}.
struct Battery {
    std::vector<mg::ResidualSpec> specs;
    std::vector<mg::PastFunctional> gs;
};
Battery default_battery(std::size_t phi_count, const std::vector<std::pair<double, double>>& windows);

}  // namespace mkvlab::run
