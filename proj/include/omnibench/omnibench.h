#ifndef OMNIBENCH_H
#define OMNIBENCH_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define OB_API __declspec(dllexport)
#else
#define OB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ob_status {
  OB_OK = 0,
  OB_ERR_INTERNAL = 1,
  OB_ERR_CONFIG = 2,
  OB_ERR_INGESTION = 3,
  OB_ERR_PROVIDER = 4,
  OB_ERR_ARGUMENT = 5,
  OB_ERR_IO = 6,
  OB_ERR_PROTOCOL = 7,
  OB_ERR_DEGENERATE = 8,
  OB_ERR_BAD_MAGIC = 9,
  OB_ERR_VERSION = 10,
  OB_ERR_TRUNCATED = 11,
  OB_ERR_CHECKSUM = 12,
  OB_ERR_FORMAT = 13
} ob_status;

typedef struct ob_embedder ob_embedder;
typedef struct ob_kb ob_kb;

OB_API const char* ob_version(void);
OB_API const char* ob_status_name(ob_status status);
/* Process exit code for a status: 0 ok, 1 internal, 2 config/argument,
   3 input data, 4 provider. */
OB_API int ob_exit_code(ob_status status);
/* Message of the last failed call on this thread; "" if none. */
OB_API const char* ob_last_error(void);
OB_API void ob_free_string(char* s);

/* Strings returned through char** are heap allocated; release with
   ob_free_string. */

/* config_json: {"kind": "hash"|"remote", "dim", "model", "api_base",
   "api_key", "timeout_s"} */
OB_API ob_status ob_embedder_create(const char* config_json, ob_embedder** out);
OB_API void ob_embedder_destroy(ob_embedder* e);
OB_API size_t ob_embedder_dim(const ob_embedder* e);
OB_API ob_status ob_embedder_fingerprint(const ob_embedder* e, char** out);
/* Writes dim floats to out; out_len must be at least dim. */
OB_API ob_status ob_embedder_embed(const ob_embedder* e, const char* text, float* out, size_t out_len);

OB_API ob_status ob_kb_build(const char* config_json, ob_kb** out, char** summary_json);
OB_API ob_status ob_kb_save(const ob_kb* kb, const char* path);
OB_API ob_status ob_kb_load(const char* path, ob_kb** out);
OB_API void ob_kb_destroy(ob_kb* kb);
OB_API size_t ob_kb_size(const ob_kb* kb);
OB_API size_t ob_kb_dim(const ob_kb* kb);
OB_API ob_status ob_kb_fingerprint(const ob_kb* kb, char** out);
/* Hits as [{"chunk_id", "score"}], best first. */
OB_API ob_status ob_kb_search(const ob_kb* kb, const float* query, size_t dim, size_t k, char** hits_json);
OB_API ob_status ob_kb_search_text(const ob_kb* kb, const ob_embedder* e, const char* text, size_t k,
                                   char** hits_json);

/* Stage entry points. Each takes the stage config as JSON and returns a
   JSON summary. */
OB_API ob_status ob_generate(const char* config_json, char** summary_json);
OB_API ob_status ob_eval(const char* config_json, char** summary_json);
OB_API ob_status ob_report(const char* config_json, char** summary_json);
/* Every key a stage ("kb", "gen", "eval", "report") accepts, with defaults. */
OB_API ob_status ob_defaults(const char* stage, char** config_json);

OB_API ob_status ob_improvements(double s_rag, double s_base, double* out);
OB_API ob_status ob_transformation(double r_time, double r_gpu, double r_mem, double w_time, double w_gpu,
                                   double w_mem, double* out);

#ifdef __cplusplus
}
#endif

#endif
