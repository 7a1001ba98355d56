/*
 * C interface to the part engine.
 *
 * Handles are opaque. Every call returns a part_status; on failure the
 * thread's last error message and kind are available through
 * part_last_error() and part_last_error_kind() until the next call on the
 * same thread. Strings returned through char** out-parameters are UTF-8 JSON
 * documents owned by the caller and released with part_string_free().
 * Schemas for every document are listed in README.md.
 */
#ifndef PART_PART_H
#define PART_PART_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(PART_BUILDING_LIBRARY)
#    define PART_API __declspec(dllexport)
#  else
#    define PART_API __declspec(dllimport)
#  endif
#else
#  define PART_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef struct part_engine part_engine;
typedef struct part_server part_server;

typedef enum part_status {
    PART_OK = 0,
    PART_ERR_INVALID_ARGUMENT = 1, /* bad input, including oversized messages */
    PART_ERR_INVALID_STATE = 2,    /* e.g. engine shutting down */
    PART_ERR_NOT_FOUND = 3,
    PART_ERR_CONFLICT = 4,         /* turn already in flight, session closed, stale write */
    PART_ERR_BACKEND = 5,          /* LLM backend unreachable, rejected, fixture miss, empty output */
    PART_ERR_PARSE = 6,            /* model output or judge verdict could not be parsed */
    PART_ERR_CORPUS = 7,           /* corpus file malformed or duplicate note ids */
    PART_ERR_STORAGE = 8,          /* profile file corrupt */
    PART_ERR_IO = 9,
    PART_ERR_EVAL_ABORTED = 10,    /* more than half of the eval cases failed */
    PART_ERR_INTERNAL = 99
} part_status;

PART_API const char* part_version(void);
PART_API const char* part_status_name(part_status status);
PART_API const char* part_last_error(void);
/* Fine-grained error kind, e.g. "duplicate_note_id" or "fixture_miss". */
PART_API const char* part_last_error_kind(void);
PART_API void part_string_free(char* s);

/* "debug", "info", "warn", "error" or "off". Process-wide. */
PART_API part_status part_set_log_level(const char* level);

/*
 * config_json may be NULL. PART_* environment variables are applied first and
 * the JSON fields override them, unless the JSON sets "inherit_env": false.
 */
PART_API part_status part_engine_create(const char* config_json, part_engine** out);
/* Drains in-flight turns and closes open sessions. Destroy any server
 * started on the engine first. NULL is ignored. */
PART_API void part_engine_destroy(part_engine* engine);

/* overrides_json may be NULL; accepts k, seed, retrieval_enabled, temperature. */
PART_API part_status part_session_open(part_engine* engine, const char* user_id, const char* overrides_json,
                                       char** out_json);
PART_API part_status part_session_post(part_engine* engine, const char* session_id, const char* text,
                                       char** out_json);
PART_API part_status part_session_close(part_engine* engine, const char* session_id, char** out_json);
/* Event-log record for one session: open time, full turn traces, close. */
PART_API part_status part_session_transcript(part_engine* engine, const char* session_id, char** out_json);
/* Mean duration of closed sessions opened in [from_ms, to_ms). */
PART_API part_status part_session_duration_stats(part_engine* engine, int64_t from_ms, int64_t to_ms,
                                                 char** out_json);

PART_API part_status part_profile_get(part_engine* engine, const char* user_id, char** out_json);
/* Replaces the stored entries of profile_json's user; the version is bumped. */
PART_API part_status part_profile_put(part_engine* engine, const char* profile_json, char** out_json);

/*
 * Builds an index from a corpus file. With a non-NULL query, also returns the
 * top-k notes. Does not need an engine.
 */
PART_API part_status part_corpus_index(const char* corpus_path, const char* query, size_t k, char** out_json);

/*
 * Runs the offline harness. request_json: {"dataset": path, "arms": "raw,...",
 * "ks": "1,3,5,10", "out": dir|null, "strict": bool, "concurrency": n,
 * "human_labels": path|null, "human_sample_size": n}. Returns the results
 * document plus "report" (the rendered tables).
 */
PART_API part_status part_eval_run(part_engine* engine, const char* request_json, char** out_json);

/* server_json: {"host", "port" (0 = any free port), "api_key", "threads"}. */
PART_API part_status part_server_start(part_engine* engine, const char* server_json, part_server** out);
PART_API int part_server_port(const part_server* server);
/* Stops serving and drains the engine; the engine accepts no further work. */
PART_API part_status part_server_stop(part_server* server);
PART_API void part_server_destroy(part_server* server);

#ifdef __cplusplus
}
#endif

#endif /* PART_PART_H */
