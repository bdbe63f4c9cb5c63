/* xreid.h - C interface to the xreid re-identification library. */

/* Copyright 2026 the xreid developers

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License. */

#ifndef XREID_H_
#define XREID_H_

#include <stdint.h>

#if defined(_WIN32)
#define XREID_API __declspec(dllexport)
#else
#define XREID_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every fallible call returns a status. XREID_OK means the out-parameters
   were written; any other status leaves them untouched and stores a message
   retrievable via xreid_last_error() on the calling thread. */
typedef enum xreid_status {
  XREID_OK = 0,
  XREID_ERROR_ARGUMENT = 1, /* invalid argument or configuration value */
  XREID_ERROR_PARSE = 2,    /* malformed input file */
  XREID_ERROR_IO = 3,       /* file could not be read or written */
  XREID_ERROR_STATE = 4,    /* operation invalid for the object's state */
  XREID_ERROR_NUMERIC = 5   /* non-finite value encountered */
} xreid_status;

/* Message for the most recent failing call on this thread. Never NULL.
   Valid until the next failing call on the same thread. */
XREID_API const char* xreid_last_error(void);

typedef struct xreid_dataset xreid_dataset;
typedef struct xreid_model xreid_model;

/* ---- datasets ---------------------------------------------------------- */

/* Loads a feature file (header "REIDFEAT 1 F=<dim>", one sample per line). */
XREID_API xreid_status xreid_dataset_load(const char* path,
                                          xreid_dataset** out);
XREID_API xreid_status xreid_dataset_save(const xreid_dataset* dataset,
                                          const char* path);
XREID_API void xreid_dataset_free(xreid_dataset* dataset);

XREID_API int64_t xreid_dataset_size(const xreid_dataset* dataset);
XREID_API int64_t xreid_dataset_feature_dim(const xreid_dataset* dataset);
XREID_API int64_t xreid_dataset_num_cameras(const xreid_dataset* dataset);
XREID_API int64_t xreid_dataset_num_tracklets(const xreid_dataset* dataset);
/* Number of samples carrying a person label. */
XREID_API int64_t xreid_dataset_labeled_count(const xreid_dataset* dataset);
/* Audit counter: total person-label reads since the dataset was created. */
XREID_API uint64_t xreid_dataset_label_reads(const xreid_dataset* dataset);

/* Copy without identities that appear on fewer than two cameras. */
XREID_API xreid_status xreid_dataset_filter_single_camera(
    const xreid_dataset* dataset, xreid_dataset** out);
/* Copy with all person labels removed. */
XREID_API xreid_status xreid_dataset_strip_labels(const xreid_dataset* dataset,
                                                  xreid_dataset** out);
/* Cross-camera protocol split: the first tracklet of every multi-camera
   identity becomes the query set, everything else the gallery. */
XREID_API xreid_status xreid_split_query_gallery(const xreid_dataset* dataset,
                                                 xreid_dataset** out_query,
                                                 xreid_dataset** out_gallery);

/* ---- synthetic data ---------------------------------------------------- */

typedef struct xreid_synth_params {
  int64_t num_datasets;
  int64_t cameras_per_dataset;
  int64_t ids_per_dataset;
  int64_t tracklets_per_id_per_camera;
  int64_t images_per_tracklet;
  int64_t latent_dim;
  int64_t feature_dim;
  double camera_transform_scale;
  double dataset_shift_scale;
  double noise_sigma;
  double cross_camera_id_fraction;
  uint64_t seed;
} xreid_synth_params;

XREID_API void xreid_synth_params_init(xreid_synth_params* params);

/* Fills out_datasets[0..params->num_datasets-1] with new handles; each must
   be released with xreid_dataset_free. */
XREID_API xreid_status xreid_generate_synthetic(
    const xreid_synth_params* params, xreid_dataset** out_datasets);

/* ---- models ------------------------------------------------------------ */

XREID_API xreid_status xreid_model_load(const char* path, xreid_model** out);
XREID_API xreid_status xreid_model_save(const xreid_model* model,
                                        const char* path);
XREID_API void xreid_model_free(xreid_model* model);

XREID_API int64_t xreid_model_input_dim(const xreid_model* model);
XREID_API int64_t xreid_model_hidden_dim(const xreid_model* model);
XREID_API int64_t xreid_model_embed_dim(const xreid_model* model);

/* Embeds every sample (inference mode). out_embeddings must hold
   size * embed_dim doubles; written row-major in sample order. */
XREID_API xreid_status xreid_model_embed(const xreid_model* model,
                                         const xreid_dataset* dataset,
                                         double* out_embeddings);

/* ---- training ---------------------------------------------------------- */

#define XREID_TRAIN_MERGE 0  /* one namespaced union, batches mix datasets */
#define XREID_TRAIN_SWITCH 1 /* every batch drawn from a single dataset */

#define XREID_SWITCH_ROUND_ROBIN 0
#define XREID_SWITCH_PROPORTIONAL 1

#define XREID_MARGIN_SOFTPLUS 0
#define XREID_MARGIN_HINGE 1

typedef struct xreid_train_params {
  int32_t mode;          /* XREID_TRAIN_* */
  int32_t switch_order;  /* XREID_SWITCH_*, used when mode is SWITCH */
  int64_t ids_per_batch;  /* P */
  int64_t images_per_id;  /* K */
  int32_t margin_kind;   /* XREID_MARGIN_* */
  double margin;         /* hinge margin; ignored for softplus */
  int32_t average_anchors; /* 1: mean over anchors, 0: sum */
  int64_t epochs;
  double lr_start;
  double lr_end;
  int64_t lr_hold_epochs; /* epochs at lr_start before the decay begins */
  int64_t lr_decay_until; /* epoch at which lr_end is reached */
  int64_t hidden_dim;
  int64_t embed_dim;
  double dropout_rate;
  double bn_momentum;
  uint64_t seed;
} xreid_train_params;

XREID_API void xreid_train_params_init(xreid_train_params* params);

/* Trains a fresh model on `num_datasets` labeled datasets. When
   log_csv_path is non-NULL the per-step training log is written there. */
XREID_API xreid_status xreid_train(const xreid_dataset* const* datasets,
                                   int64_t num_datasets,
                                   const xreid_train_params* params,
                                   const char* log_csv_path,
                                   xreid_model** out);

/* ---- fine-tuning and mining -------------------------------------------- */

#define XREID_COOCC_BOTH 0         /* same-camera and cross-camera overlap */
#define XREID_COOCC_SAME_CAMERA 1
#define XREID_COOCC_CROSS_CAMERA 2

typedef struct xreid_finetune_params {
  double alpha;              /* mined pairs per camera pair: alpha*min(N1,N2) */
  int64_t negatives_per_pair;
  int32_t one_to_one;        /* 1: greedy one-to-one matching, 0: raw top-N */
  int32_t coocc_scope;       /* XREID_COOCC_* */
  int64_t ids_per_batch;     /* P */
  int64_t images_per_id;     /* K */
  int32_t margin_kind;       /* XREID_MARGIN_* */
  double margin;
  int32_t average_anchors;
  int64_t epochs;            /* 0 mines and reports without training */
  double lr_start;
  double lr_end;
  int32_t update_bn_stats;   /* 0 freezes running statistics */
  uint64_t seed;
  int64_t threads;           /* mining parallelism; 1 = fully serial */
} xreid_finetune_params;

XREID_API void xreid_finetune_params_init(xreid_finetune_params* params);

typedef struct xreid_finetune_stats {
  int64_t num_pairs;    /* mined presumed-positive pairs, all camera pairs */
  uint64_t label_reads; /* person-label reads during mining+training; 0 */
  double mean_purity;   /* fraction of correct pairs; -1 without labels */
} xreid_finetune_stats;

/* Adapts `base` to an unlabeled target dataset. Person labels, when present,
   are read only after training to fill mean_purity and the report's truth
   column. log_csv_path, pair_report_path, and stats may be NULL. */
XREID_API xreid_status xreid_finetune(const xreid_model* base,
                                      const xreid_dataset* target,
                                      const xreid_finetune_params* params,
                                      const char* log_csv_path,
                                      const char* pair_report_path,
                                      xreid_model** out,
                                      xreid_finetune_stats* stats);

/* Mining without training: writes the pair report for `target` and fills
   stats (label_reads counts the mining phase only). */
XREID_API xreid_status xreid_mine(const xreid_model* model,
                                  const xreid_dataset* target,
                                  const xreid_finetune_params* params,
                                  const char* pair_report_path,
                                  xreid_finetune_stats* stats);

/* ---- evaluation -------------------------------------------------------- */

#define XREID_EXCLUDE_SAME_CAMERA_SAME_ID 0
#define XREID_EXCLUDE_NONE 1

typedef struct xreid_eval_params {
  int32_t exclusion; /* XREID_EXCLUDE_* */
  int64_t k_max;
  int32_t tracklet_level; /* 1: rank tracklet-averaged embeddings */
} xreid_eval_params;

XREID_API void xreid_eval_params_init(xreid_eval_params* params);

typedef struct xreid_eval_result {
  double rank1;
  double rank5;
  double rank10;
  double rank20; /* ranks past k_max report the k_max value */
  double map;
  int64_t num_queries;
} xreid_eval_result;

/* Query and gallery must be fully labeled. report_path may be NULL. */
XREID_API xreid_status xreid_evaluate(const xreid_model* model,
                                      const xreid_dataset* query,
                                      const xreid_dataset* gallery,
                                      const xreid_eval_params* params,
                                      const char* report_path,
                                      xreid_eval_result* out);

/* ---- gradient self-check ----------------------------------------------- */

typedef struct xreid_gradcheck_result {
  char name[64];
  int64_t instances;
  double max_relative_error;
  double tolerance;
  int32_t passed;
} xreid_gradcheck_result;

/* Runs the finite-difference suites. With results == NULL (or capacity too
   small) only *out_count is set, so capacity can be queried first. */
XREID_API xreid_status xreid_gradcheck(uint64_t seed, int64_t instances,
                                       xreid_gradcheck_result* results,
                                       int64_t capacity, int64_t* out_count);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* XREID_H_ */
