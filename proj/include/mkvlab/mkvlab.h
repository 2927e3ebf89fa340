/* mkvlab C API: opaque handles + status codes over the C++ core.
 *
 * Lifecycle: every mkv_run_result* produced by mkv_run_* must be released
 * with mkv_result_free; every char* produced by mkv_preset_config_json or
 * mkv_schema_json with mkv_string_free. All returned strings are UTF-8.
 */
#ifndef MKVLAB_H
#define MKVLAB_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
    MKV_OK = 0,
    MKV_ERR_INVALID_ARGUMENT = 1,
    MKV_ERR_RUNTIME = 2,
    MKV_ERR_UNKNOWN_PRESET = 3
} mkv_status;

typedef struct mkv_run_result mkv_run_result;

/* Runs an experiment from a JSON config string or file. out_dir may be NULL
 * (keep the config's directory); workers <= 0 uses all cores; seed_override
 * < 0 keeps the config seed. A parse/validation failure still yields a
 * result (exit code 1 plus an error message); MKV_OK means only that *out
 * was produced. */
mkv_status mkv_run_json(const char* config_json, const char* out_dir, long long workers,
                        long long seed_override, mkv_run_result** out);
mkv_status mkv_run_file(const char* config_path, const char* out_dir, long long workers,
                        long long seed_override, mkv_run_result** out);

/* 0 = all verdicts pass, 1 = execution error, 2 = verdict failure. */
int mkv_result_exit_code(const mkv_run_result* res);
/* NULL when the run failed before a report existed. */
const char* mkv_result_report_json(const mkv_run_result* res);
/* NULL when there was no error. */
const char* mkv_result_error(const mkv_run_result* res);
void mkv_result_free(mkv_run_result* res);

int mkv_preset_count(void);
/* NULL when index is out of range. */
const char* mkv_preset_name(int index);
/* NULL for unknown names. */
char* mkv_preset_config_json(const char* name);
char* mkv_schema_json(void);
void mkv_string_free(char* s);
const char* mkv_version(void);

#ifdef __cplusplus
}
#endif

#endif /* MKVLAB_H */
