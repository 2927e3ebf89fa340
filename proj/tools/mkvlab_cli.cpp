// mkvlab command-line runner. Talks to the core exclusively through the C
// API in mkvlab/mkvlab.h.

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

#include "CLI11.hpp"
#include "mkvlab/mkvlab.h"

namespace {

long long workers_from(int flag_value) {
    if (flag_value > 0) return flag_value;
    if (const char* env = std::getenv("MKVLAB_WORKERS")) {
        const long long v = std::atoll(env);
        if (v > 0) return v;
    }
    return 0;  // auto
}

int finish_run(mkv_run_result* res) {
    if (!res) {
        std::fprintf(stderr, "error: runner returned no result\n");
        return 1;
    }
    const int code = mkv_result_exit_code(res);
    if (const char* err = mkv_result_error(res)) std::fprintf(stderr, "error: %s\n", err);
    if (const char* rep = mkv_result_report_json(res)) std::printf("%s\n", rep);
    mkv_result_free(res);
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mkvlab: simulation and verification lab for interacting particle systems"};
    app.require_subcommand(1);

    std::string config_path, preset_name, out_dir;
    long long seed = -1;
    int workers = 0;
    bool list_presets = false, show_only = false;

    auto* run = app.add_subcommand("run", "run an experiment from a JSON config file");
    run->add_option("config", config_path, "path to the config file")->required();
    run->add_option("--out", out_dir, "output directory override");
    run->add_option("--seed", seed, "master seed override");
    run->add_option("--workers", workers, "worker threads (never changes results)");

    auto* preset = app.add_subcommand("preset", "run or show a built-in preset");
    preset->add_option("name", preset_name, "preset name");
    preset->add_option("--out", out_dir, "output directory override");
    preset->add_option("--seed", seed, "master seed override");
    preset->add_option("--workers", workers, "worker threads (never changes results)");
    preset->add_flag("--list", list_presets, "list preset names and exit");
    preset->add_flag("--show", show_only, "print the preset config instead of running it");

    auto* schema = app.add_subcommand("schema", "print the config JSON schema");

    CLI11_PARSE(app, argc, argv);

    if (schema->parsed()) {
        char* s = mkv_schema_json();
        std::printf("%s\n", s);
        mkv_string_free(s);
        return 0;
    }

    if (run->parsed()) {
        mkv_run_result* res = nullptr;
        mkv_run_file(config_path.c_str(), out_dir.empty() ? nullptr : out_dir.c_str(),
                     workers_from(workers), seed, &res);
        return finish_run(res);
    }

    // preset subcommand
    if (list_presets) {
        const int count = mkv_preset_count();
        for (int i = 0; i < count; ++i) std::printf("%s\n", mkv_preset_name(i));
        return 0;
    }
    if (preset_name.empty()) {
        std::fprintf(stderr, "error: preset name required (or --list)\n");
        return 1;
    }
    char* cfg = mkv_preset_config_json(preset_name.c_str());
    if (!cfg) {
        std::fprintf(stderr, "error: unknown preset '%s'\n", preset_name.c_str());
        return 1;
    }
    if (show_only) {
        std::printf("%s\n", cfg);
        mkv_string_free(cfg);
        return 0;
    }
    mkv_run_result* res = nullptr;
    mkv_run_json(cfg, out_dir.empty() ? nullptr : out_dir.c_str(), workers_from(workers), seed, &res);
    mkv_string_free(cfg);
    return finish_run(res);
}
