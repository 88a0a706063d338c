#ifndef TPUMP_H
#define TPUMP_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define TP_API __attribute__((visibility("default")))
#else
#define TP_API
#endif

typedef enum tp_status {
    TP_OK = 0,
    TP_E_INVALID_ARGUMENT = 1,
    TP_E_CONFIG = 2,
    TP_E_GAP_CLOSURE = 3,
    TP_E_CONTINUITY = 4,
    TP_E_STEP_TOO_LARGE = 5,
    TP_E_IO = 6,
    TP_E_INTERNAL = 7
} tp_status;

typedef struct tp_config tp_config;
typedef struct tp_result tp_result;

TP_API const char* tp_version(void);
TP_API const char* tp_status_name(tp_status s);
/* message of the last failure on this thread, "" if none */
TP_API const char* tp_last_error(void);

/* strings returned through char** are owned by the caller */
TP_API void tp_string_free(char* s);

TP_API tp_status tp_config_from_file(const char* path, tp_config** out);
TP_API tp_status tp_config_from_json(const char* json_text, tp_config** out);
/* defaults of a named scenario */
TP_API tp_status tp_config_default(const char* scenario, tp_config** out);
TP_API void tp_config_destroy(tp_config* cfg);
TP_API tp_status tp_config_set_output_dir(tp_config* cfg, const char* dir);
TP_API tp_status tp_config_set_seed(tp_config* cfg, uint64_t seed);
/* original site indices, inclusive */
TP_API tp_status tp_config_set_sites(tp_config* cfg, int first, int last);
TP_API tp_status tp_config_validate(const tp_config* cfg);
TP_API tp_status tp_config_resolved_json(const tp_config* cfg, char** out);

TP_API tp_status tp_run(const tp_config* cfg, tp_result** out);
TP_API tp_status tp_sweep(const tp_config* cfg, int workers, tp_result** out);
TP_API tp_status tp_bands(const tp_config* cfg, tp_result** out);
/* in-memory dynamics, nothing written */
TP_API tp_status tp_simulate(const tp_config* cfg, tp_result** out);

TP_API tp_status tp_result_summary_json(const tp_result* r, char** out);
TP_API tp_status tp_result_manifest_json(const tp_result* r, char** out);
/* valid while r lives; "" for in-memory results */
TP_API const char* tp_result_output_dir(const tp_result* r);
/* centre-of-mass series of a dynamics result; n_frames receives the length */
TP_API tp_status tp_result_com(const tp_result* r, const double** times, const double** com, size_t* n_frames);
TP_API void tp_result_destroy(tp_result* r);

/* Chern numbers of the two-band Bloch model (rates in MHz, period in us).
   stagger: 0 positive on odd sites, 1 positive on even sites. chern_out gets two values, lower band first. */
TP_API tp_status tp_chern_single(double j_mhz, double delta0_mhz, double capdelta0_mhz, double period_us,
                                 double offset_r, int stagger, int n_k, int n_t, int chern_out[2]);

#ifdef __cplusplus
}
#endif

#endif
