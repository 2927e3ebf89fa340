#include "mkvlab/mkvlab.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "mkvlab/config.hpp"
#include "mkvlab/runner.hpp"

using mkvlab::run::ExperimentConfig;
using mkvlab::run::RunOptions;
using mkvlab::run::RunResult;

extern "C" {

struct mkv_run_result {
    RunResult res;
    std::string report_str;
};

namespace {

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

mkv_status run_from_json_text(const std::string& text, const char* out_dir, long long workers,
                              long long seed_override, mkv_run_result** out) {
    auto* holder = new (std::nothrow) mkv_run_result();
    if (!holder) return MKV_ERR_RUNTIME;
    try {
        const auto parsed = nlohmann::json::parse(text);
        const auto cfg = ExperimentConfig::from_json(parsed);
        RunOptions opts;
        opts.workers = static_cast<int>(workers);
        if (out_dir && *out_dir) opts.out_dir_override = out_dir;
        if (seed_override >= 0) opts.seed_override = static_cast<std::uint64_t>(seed_override);
        holder->res = mkvlab::run::run_experiment(cfg, opts);
    } catch (const std::exception& e) {
        holder->res.exit_code = 1;
        holder->res.error = e.what();
    }
    if (!holder->res.report.is_null()) holder->report_str = holder->res.report.dump(2);
    *out = holder;
    return MKV_OK;
}

}  // namespace

mkv_status mkv_run_json(const char* config_json, const char* out_dir, long long workers,
                        long long seed_override, mkv_run_result** out) {
    if (!config_json || !out) return MKV_ERR_INVALID_ARGUMENT;
    return run_from_json_text(config_json, out_dir, workers, seed_override, out);
}

mkv_status mkv_run_file(const char* config_path, const char* out_dir, long long workers,
                        long long seed_override, mkv_run_result** out) {
    if (!config_path || !out) return MKV_ERR_INVALID_ARGUMENT;
    std::ifstream in(config_path, std::ios::binary);
    if (!in) {
        auto* holder = new (std::nothrow) mkv_run_result();
        if (!holder) return MKV_ERR_RUNTIME;
        holder->res.exit_code = 1;
        holder->res.error = std::string("cannot open config file: ") + config_path;
        *out = holder;
        return MKV_OK;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return run_from_json_text(buf.str(), out_dir, workers, seed_override, out);
}

int mkv_result_exit_code(const mkv_run_result* res) { return res ? res->res.exit_code : 1; }

const char* mkv_result_report_json(const mkv_run_result* res) {
    if (!res || res->report_str.empty()) return nullptr;
    return res->report_str.c_str();
}

const char* mkv_result_error(const mkv_run_result* res) {
    if (!res || res->res.error.empty()) return nullptr;
    return res->res.error.c_str();
}

void mkv_result_free(mkv_run_result* res) { delete res; }

int mkv_preset_count(void) { return static_cast<int>(mkvlab::run::preset_names().size()); }

const char* mkv_preset_name(int index) {
    static const std::vector<std::string> names = mkvlab::run::preset_names();
    if (index < 0 || index >= static_cast<int>(names.size())) return nullptr;
    return names[static_cast<std::size_t>(index)].c_str();
}

char* mkv_preset_config_json(const char* name) {
    if (!name) return nullptr;
    try {
        return dup_string(mkvlab::run::preset_config(name).dump(2));
    } catch (const std::exception&) {
        return nullptr;
    }
}

char* mkv_schema_json(void) { return dup_string(mkvlab::run::config_schema().dump(2)); }

void mkv_string_free(char* s) { std::free(s); }

const char* mkv_version(void) { return "0.1.0"; }

}  // extern "C"
