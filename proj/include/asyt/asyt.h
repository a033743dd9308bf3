/* C interface to the as-you-type social search engine.
 *
 * Handles are opaque. Every call returning asyt_status leaves a message for
 * asyt_last_error() on failure (per thread). Strings returned through char**
 * must be released with asyt_string_free. A dataset must outlive the
 * sessions created from it; results are self-contained.
 */
#ifndef ASYT_H
#define ASYT_H

#include <stddef.h>
#include <stdint.h>

#if defined(ASYT_BUILDING_LIBRARY)
#define ASYT_API __attribute__((visibility("default")))
#else
#define ASYT_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum asyt_status {
  ASYT_OK = 0,
  ASYT_ERR_INVALID_ARGUMENT = 1,
  ASYT_ERR_NOT_FOUND = 2,
  ASYT_ERR_IO = 3,
  ASYT_ERR_INTERNAL = 4
} asyt_status;

typedef struct asyt_dataset asyt_dataset;
typedef struct asyt_session asyt_session;
typedef struct asyt_result asyt_result;

ASYT_API const char* asyt_version(void);
ASYT_API const char* asyt_last_error(void);
ASYT_API void asyt_string_free(char* s);

/* ---- datasets ---- */

typedef struct asyt_dataset_options {
  const char* triples;      /* required */
  const char* edges;        /* may be NULL */
  const char* cooccurrence; /* may be NULL */
  const char* network;      /* "social" (default), "common", "itemtag", "tag" */
  double theta;             /* edges below are dropped */
  int filter;               /* nonzero: drop sparse items and users */
} asyt_dataset_options;

typedef struct asyt_dataset_stats {
  size_t triples;
  size_t users;
  size_t items;
  size_t tags;
  size_t edges;
  size_t graph_nodes;
  size_t trie_nodes;
} asyt_dataset_stats;

ASYT_API asyt_status asyt_dataset_load(const asyt_dataset_options* options, asyt_dataset** out);
/* Prepares a dataset from an experiment spec (see asyt_experiment_run):
 * files or the synthetic generator, expansion, filtering, network and the
 * first theta. NULL uses the defaults, a synthetic corpus. */
ASYT_API asyt_status asyt_dataset_prepare(const char* spec_json, asyt_dataset** out);
ASYT_API void asyt_dataset_free(asyt_dataset* d);
ASYT_API asyt_status asyt_dataset_stats_get(const asyt_dataset* d, asyt_dataset_stats* out);

/* ---- sessions ---- */

typedef enum asyt_aggregator { ASYT_AGG_MAX_PRODUCT = 0, ASYT_AGG_EXP_DECAY = 1 } asyt_aggregator;
typedef enum asyt_transform { ASYT_TRANSFORM_IDENTITY = 0, ASYT_TRANSFORM_LOG1P = 1 } asyt_transform;

typedef struct asyt_session_config {
  size_t k;
  double alpha;
  double tf_scale;
  double budget_ms; /* <= 0 runs to termination */
  asyt_aggregator aggregator;
  double decay;
  asyt_transform transform;
  size_t max_visited_users; /* 0: no cap */
  int allow_unknown;        /* nonzero: unknown seekers get no social signal */
} asyt_session_config;

ASYT_API void asyt_session_config_default(asyt_session_config* out);

/* seeker may be NULL for a query without a seeker. */
ASYT_API asyt_status asyt_session_create(const asyt_dataset* d, const char* seeker,
                                         const asyt_session_config* config, asyt_session** out);
ASYT_API void asyt_session_free(asyt_session* s);

typedef enum asyt_key_kind { ASYT_KEY_CHAR = 0, ASYT_KEY_NEW_TERM = 1, ASYT_KEY_BACKSPACE = 2 } asyt_key_kind;

/* value is one UTF-8 character for ASYT_KEY_CHAR and ignored otherwise. */
ASYT_API asyt_status asyt_session_keystroke(asyt_session* s, asyt_key_kind kind, const char* value,
                                            asyt_result** out);
/* Feeds `typed` one character at a time (whitespace separates terms) and
 * returns the last result. */
ASYT_API asyt_status asyt_session_type(asyt_session* s, const char* typed, asyt_result** out);

/* ---- results ---- */

typedef struct asyt_result_entry {
  const char* item; /* owned by the result */
  double min;
  double max;
  int guaranteed;
} asyt_result_entry;

ASYT_API size_t asyt_result_size(const asyt_result* r);
ASYT_API asyt_status asyt_result_entry_get(const asyt_result* r, size_t i, asyt_result_entry* out);
ASYT_API int asyt_result_exact(const asyt_result* r);
ASYT_API double asyt_result_elapsed_ms(const asyt_result* r);
ASYT_API size_t asyt_result_visited_users(const asyt_result* r);
ASYT_API asyt_status asyt_result_json(const asyt_result* r, char** out);
ASYT_API void asyt_result_free(asyt_result* r);

/* ---- experiments and tools ---- */

/* kind: "precision", "ndcg" or "scale". Writes JSON lines to out_path, or to
 * stdout when out_path is NULL or empty. */
ASYT_API asyt_status asyt_experiment_run(const char* kind, const char* spec_json, const char* out_path);
/* Writes the raw synthetic corpus described by spec_json and its graph as tab-separated
 * files. */
ASYT_API asyt_status asyt_synth_write(const char* spec_json, const char* triples_path, const char* edges_path);
ASYT_API asyt_status asyt_serve_prep(const char* spec_json, const char* dir);
/* Blocks while serving. port <= 0 keeps the configured port. */
ASYT_API asyt_status asyt_serve(const char* config_path, int port);

#ifdef __cplusplus
}
#endif

#endif /* ASYT_H */
