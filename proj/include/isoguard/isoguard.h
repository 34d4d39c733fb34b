/*
 * isoguard — unsupervised anomaly detection for network logs.
 *
 * Isolation-forest scoring with a 1-D k-means score labeler (plus a
 * contamination-quantile baseline), behind a plain C surface: opaque
 * handles, integer status codes, and a thread-local last-error message.
 *
 * Unless noted otherwise, functions return ISOGUARD_OK on success and a
 * nonzero status on failure; call isoguard_last_error() for the message.
 * Handles are freed with their matching *_free function. Loaded models and
 * datasets are immutable and safe to share across threads.
 */

#ifndef ISOGUARD_H
#define ISOGUARD_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum isoguard_status {
    ISOGUARD_OK = 0,
    ISOGUARD_ERR_USAGE = 1, /* bad arguments, options, or call sequence */
    ISOGUARD_ERR_DATA = 2,  /* ingestion, parsing, or encoding failure */
    ISOGUARD_ERR_MODEL = 3, /* model state, format, or version failure */
    ISOGUARD_ERR_IO = 4     /* file system failure */
} isoguard_status;

typedef struct isoguard_dataset isoguard_dataset;
typedef struct isoguard_model isoguard_model;

const char* isoguard_version(void);

/* Message for the most recent failure on this thread; never NULL. */
const char* isoguard_last_error(void);

/* Frees strings returned through char** out-parameters. */
void isoguard_string_free(char* s);

/* ------------------------------------------------------------------ */
/* Datasets                                                            */

/*
 * Reads a delimited text file. label_column may be NULL (no ground truth);
 * when given, that column is stripped from the features and a cell equal to
 * positive_label (NULL means "1") reads as anomaly.
 */
isoguard_status isoguard_dataset_read_delimited(const char* path, char delimiter, int has_header,
                                                const char* label_column,
                                                const char* positive_label,
                                                isoguard_dataset** out);
void isoguard_dataset_free(isoguard_dataset* ds);

int64_t isoguard_dataset_rows(const isoguard_dataset* ds);
int64_t isoguard_dataset_columns(const isoguard_dataset* ds);
int isoguard_dataset_has_labels(const isoguard_dataset* ds);

/* ------------------------------------------------------------------ */
/* Training                                                            */

/*
 * Fits schema -> isolation forest -> labeler on the dataset's features
 * (ground-truth labels, if present, are never visible to fitting).
 *
 * config_json (NULL means all defaults):
 * {
 *   "schema": {"columns": [{"name": ..., "encoder":
 *              "timestamp"|"ip"|"categorical"|"numeric"}, ...],
 *              "timezone_offset_minutes": 0},   // omit: all-numeric
 *   "trees": 256, "subsample": 256, "height_limit": 0, "seed": 1,
 *   "labeler": "kmeans"|"quantile",            // default kmeans
 *   "k": 2, "kmeans_max_iter": 100, "kmeans_tol": 1e-9,
 *   "contamination": 0.1, "relative_error": 0.0,
 *   "threads": 0                                // 0 = all cores
 * }
 */
isoguard_status isoguard_train(const isoguard_dataset* ds, const char* config_json,
                               isoguard_model** out);

/* ------------------------------------------------------------------ */
/* Models                                                              */

isoguard_status isoguard_model_save(const isoguard_model* model, const char* path);
isoguard_status isoguard_model_load(const char* path, isoguard_model** out);
void isoguard_model_free(isoguard_model* model);

/* Summary of a fitted model (trees, subsample, n_train, labeler) as JSON. */
isoguard_status isoguard_model_info(const isoguard_model* model, char** json_out);

/*
 * Scores every dataset row in order into out_scores (capacity rows).
 * on_error: "fail" (default) or "skip"; skipped rows score NaN and are
 * reported in errors_json_out (pass NULL to discard the report).
 */
isoguard_status isoguard_model_score(const isoguard_model* model, const isoguard_dataset* ds,
                                     const char* on_error, double* out_scores, size_t capacity,
                                     char** errors_json_out);

/* Labels precomputed scores: out_labels[i] = 1 anomaly, 0 normal. */
isoguard_status isoguard_model_label(const isoguard_model* model, const double* scores, size_t n,
                                     uint8_t* out_labels);

/* One newline-delimited-JSON record: score plus label in one call. */
isoguard_status isoguard_model_score_record(const isoguard_model* model, const char* record_json,
                                            double* out_score, uint8_t* out_label);

/* ------------------------------------------------------------------ */
/* Evaluation                                                          */

/*
 * Fit/score/label once per seed on a labeled dataset and report AUCs.
 * options_json: training options (above) plus
 *   {"method": "iforest-kmeans"|"iforest-quantile", "seeds": [1, ...]}
 * Returns the full report as JSON (runs, mean and stddev of both AUCs).
 */
isoguard_status isoguard_evaluate(const isoguard_dataset* ds, const char* options_json,
                                  char** report_json_out);

/*
 * Quantile-labeler sensitivity sweep.
 * options_json: training options plus
 *   {"param": "contamination"|"relative-error", "grid": [...], "seeds": [...]}
 * table_csv_out gets the plot-ready table (value,auc_labels,auc_scores);
 * report_json_out (optional, may be NULL) gets per-point detail.
 */
isoguard_status isoguard_sweep(const isoguard_dataset* ds, const char* options_json,
                               char** table_csv_out, char** report_json_out);

/* ------------------------------------------------------------------ */
/* Streaming                                                           */

/*
 * Scores newline-delimited JSON records one at a time from source_path to
 * sink_path ("-" or NULL meaning stdin / stdout). Sink order equals source
 * order. Records that fail to parse or encode go to dead_letter_path (NULL:
 * counted only) and the stream continues.
 *
 * options_json: {"flush_every": 0, "threads": 1, "on_error": "skip"|"fail",
 *                "stats_path": "-"|path}   // default: stats to stderr
 * stats_json_out (optional) receives the final stats document.
 */
isoguard_status isoguard_stream_run(const isoguard_model* model, const char* source_path,
                                    const char* sink_path, const char* dead_letter_path,
                                    const char* options_json, char** stats_json_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* ISOGUARD_H */
