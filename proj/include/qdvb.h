/* C interface to the vector-beam simulator. All entry points return a status
 * code; on failure qdvb_last_error() describes the problem for the calling
 * thread. Objects come back through out-parameters as opaque handles owned by
 * the caller and released with the matching _free function. Strings returned
 * through char** are NUL-terminated, UTF-8, and released with
 * qdvb_string_free. */
#ifndef QDVB_H
#define QDVB_H

#ifdef __cplusplus
extern "C" {
#endif

#define QDVB_OK 0
#define QDVB_ERR_INTERNAL 1
#define QDVB_ERR_VALIDATION 2
#define QDVB_ERR_NUMERICAL 3
#define QDVB_ERR_IO 4

typedef struct qdvb_config qdvb_config;
typedef struct qdvb_report qdvb_report;

/* Last error message of the calling thread; never NULL. Overwritten by the
 * next failing call on the same thread. */
const char* qdvb_last_error(void);

/* --- configuration --- */
int qdvb_config_from_preset(const char* name, qdvb_config** out);
int qdvb_config_parse_text(const char* text, qdvb_config** out);
int qdvb_config_parse_file(const char* path, qdvb_config** out);
/* Assigns one "section.key" (e.g. "grid.nx") from its text form. */
int qdvb_config_set(qdvb_config* config, const char* key, const char* value);
/* Canonical text form; parse_text(render(c)) reproduces c. */
int qdvb_config_render(const qdvb_config* config, char** out_text);
void qdvb_config_free(qdvb_config* config);

/* --- execution --- */
/* Runs the full pipeline and writes all artifacts into the configured
 * output directory. */
int qdvb_run(const qdvb_config* config, qdvb_report** out);
/* include_timings = 0 drops the wall-clock block for byte-comparable output. */
int qdvb_report_json(const qdvb_report* report, int include_timings, char** out_json);
int qdvb_report_summary(const qdvb_report* report, char** out_text);
void qdvb_report_free(qdvb_report* report);

/* Rebuilds the PNG/SVG images of an existing run directory from its grids. */
int qdvb_render_dir(const char* run_dir);

/* Thermal displacement factor <B> for one bath setting (enabled = 0 gives
 * exactly 1). */
int qdvb_bmean(double alpha_p_invgn2, double omega_b_gn, double temperature_K,
               int enabled, double* out);

/* Newline-separated "name: description" list of the figure presets. */
int qdvb_presets_list(char** out_text);

void qdvb_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* QDVB_H */
