// Copyright 2026 the xreid developers

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "xreid.h"

#include <algorithm>
#include <cstring>
#include <exception>
#include <string>
#include <utility>
#include <vector>

#include "xreid/dataset.hpp"
#include "xreid/error.hpp"
#include "xreid/eval.hpp"
#include "xreid/gradcheck.hpp"
#include "xreid/io.hpp"
#include "xreid/losses.hpp"
#include "xreid/mining.hpp"
#include "xreid/model.hpp"
#include "xreid/synth.hpp"
#include "xreid/trainer.hpp"

struct xreid_dataset {
  xreid::Dataset value;
};

struct xreid_model {
  xreid::Model value;
};

namespace {

thread_local std::string t_last_error = "no error";

xreid_status status_of(xreid::ErrorCode code) {
  switch (code) {
    case xreid::ErrorCode::kArgument:
      return XREID_ERROR_ARGUMENT;
    case xreid::ErrorCode::kParse:
      return XREID_ERROR_PARSE;
    case xreid::ErrorCode::kIo:
      return XREID_ERROR_IO;
    case xreid::ErrorCode::kState:
      return XREID_ERROR_STATE;
    case xreid::ErrorCode::kNumeric:
      return XREID_ERROR_NUMERIC;
  }
  return XREID_ERROR_STATE;
}

// Exceptions must not cross the C boundary; every entry point funnels
// through here.
template <typename Fn>
xreid_status guarded(Fn&& fn) {
  try {
    fn();
    return XREID_OK;
  } catch (const xreid::Error& e) {
    t_last_error = e.what();
    return status_of(e.code());
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return XREID_ERROR_STATE;
  } catch (...) {
    t_last_error = "unknown error";
    return XREID_ERROR_STATE;
  }
}

xreid_status argument_error(const char* message) {
  t_last_error = message;
  return XREID_ERROR_ARGUMENT;
}

xreid::MarginMode margin_of(std::int32_t kind, double margin) {
  switch (kind) {
    case XREID_MARGIN_SOFTPLUS:
      return xreid::MarginMode::softplus();
    case XREID_MARGIN_HINGE:
      return xreid::MarginMode::hinge(margin);
    default:
      xreid::Raise(xreid::ErrorCode::kArgument, "unknown margin kind");
  }
}

xreid::CooccScope scope_of(std::int32_t scope) {
  switch (scope) {
    case XREID_COOCC_BOTH:
      return xreid::CooccScope::kBoth;
    case XREID_COOCC_SAME_CAMERA:
      return xreid::CooccScope::kSameCamera;
    case XREID_COOCC_CROSS_CAMERA:
      return xreid::CooccScope::kCrossCamera;
    default:
      xreid::Raise(xreid::ErrorCode::kArgument,
                   "unknown co-occurrence scope");
  }
}

xreid::FinetuneConfig finetune_config_of(const xreid_finetune_params& p) {
  xreid::FinetuneConfig config;
  config.alpha = p.alpha;
  config.negatives_per_pair = p.negatives_per_pair;
  config.p = static_cast<xreid::Index>(p.ids_per_batch);
  config.k = static_cast<xreid::Index>(p.images_per_id);
  config.margin = margin_of(p.margin_kind, p.margin);
  config.average_anchors = p.average_anchors != 0;
  config.epochs = p.epochs;
  config.lr0 = p.lr_start;
  config.lr1 = p.lr_end;
  config.update_bn_stats = p.update_bn_stats != 0;
  config.one_to_one = p.one_to_one != 0;
  config.seed = p.seed;
  xreid::Require(p.threads >= 1, xreid::ErrorCode::kArgument,
                 "threads must be >= 1");
  config.threads = static_cast<int>(p.threads);
  return config;
}

std::int64_t count_pairs(const std::vector<xreid::MinedPairSet>& sets) {
  std::int64_t total = 0;
  for (const auto& set : sets) {
    total += static_cast<std::int64_t>(set.pairs.size());
  }
  return total;
}

double rank_at(const xreid::EvalReport& report, std::size_t k) {
  if (report.cmc.empty()) return 0.0;
  return report.cmc[std::min(k, report.cmc.size()) - 1];
}

}  // namespace

extern "C" {

const char* xreid_last_error(void) { return t_last_error.c_str(); }

/* ---- datasets ---------------------------------------------------------- */

xreid_status xreid_dataset_load(const char* path, xreid_dataset** out) {
  if (path == nullptr || out == nullptr) {
    return argument_error("xreid_dataset_load: NULL argument");
  }
  return guarded([&] {
    xreid::Dataset ds = xreid::load_features(path);
    *out = new xreid_dataset{std::move(ds)};
  });
}

xreid_status xreid_dataset_save(const xreid_dataset* dataset,
                                const char* path) {
  if (dataset == nullptr || path == nullptr) {
    return argument_error("xreid_dataset_save: NULL argument");
  }
  return guarded([&] { xreid::save_features(dataset->value, path); });
}

void xreid_dataset_free(xreid_dataset* dataset) { delete dataset; }

int64_t xreid_dataset_size(const xreid_dataset* dataset) {
  if (dataset == nullptr) return 0;
  return static_cast<int64_t>(dataset->value.size());
}

int64_t xreid_dataset_feature_dim(const xreid_dataset* dataset) {
  if (dataset == nullptr) return 0;
  return static_cast<int64_t>(dataset->value.feature_dim());
}

int64_t xreid_dataset_num_cameras(const xreid_dataset* dataset) {
  if (dataset == nullptr) return 0;
  return static_cast<int64_t>(dataset->value.camera_ids().size());
}

int64_t xreid_dataset_num_tracklets(const xreid_dataset* dataset) {
  if (dataset == nullptr) return 0;
  return static_cast<int64_t>(dataset->value.tracklet_ids().size());
}

int64_t xreid_dataset_labeled_count(const xreid_dataset* dataset) {
  if (dataset == nullptr) return 0;
  return static_cast<int64_t>(dataset->value.labeled_count());
}

uint64_t xreid_dataset_label_reads(const xreid_dataset* dataset) {
  if (dataset == nullptr) return 0;
  return dataset->value.label_reads();
}

xreid_status xreid_dataset_filter_single_camera(const xreid_dataset* dataset,
                                                xreid_dataset** out) {
  if (dataset == nullptr || out == nullptr) {
    return argument_error("xreid_dataset_filter_single_camera: NULL argument");
  }
  return guarded([&] {
    xreid::Dataset filtered = xreid::remove_single_camera_ids(dataset->value);
    *out = new xreid_dataset{std::move(filtered)};
  });
}

xreid_status xreid_dataset_strip_labels(const xreid_dataset* dataset,
                                        xreid_dataset** out) {
  if (dataset == nullptr || out == nullptr) {
    return argument_error("xreid_dataset_strip_labels: NULL argument");
  }
  return guarded([&] {
    xreid::Dataset stripped = xreid::strip_person_labels(dataset->value);
    *out = new xreid_dataset{std::move(stripped)};
  });
}

xreid_status xreid_split_query_gallery(const xreid_dataset* dataset,
                                       xreid_dataset** out_query,
                                       xreid_dataset** out_gallery) {
  if (dataset == nullptr || out_query == nullptr || out_gallery == nullptr) {
    return argument_error("xreid_split_query_gallery: NULL argument");
  }
  return guarded([&] {
    auto [query, gallery] = xreid::split_query_gallery(dataset->value);
    *out_query = new xreid_dataset{std::move(query)};
    *out_gallery = new xreid_dataset{std::move(gallery)};
  });
}

/* ---- synthetic data ---------------------------------------------------- */

void xreid_synth_params_init(xreid_synth_params* params) {
  if (params == nullptr) return;
  const xreid::SynthConfig defaults;
  params->num_datasets = defaults.num_datasets;
  params->cameras_per_dataset = defaults.cameras_per_dataset;
  params->ids_per_dataset = defaults.ids_per_dataset;
  params->tracklets_per_id_per_camera = defaults.tracklets_per_id_per_camera;
  params->images_per_tracklet = defaults.images_per_tracklet;
  params->latent_dim = defaults.latent_dim;
  params->feature_dim = defaults.feature_dim;
  params->camera_transform_scale = defaults.camera_transform_scale;
  params->dataset_shift_scale = defaults.dataset_shift_scale;
  params->noise_sigma = defaults.noise_sigma;
  params->cross_camera_id_fraction = defaults.cross_camera_id_fraction;
  params->seed = defaults.seed;
}

xreid_status xreid_generate_synthetic(const xreid_synth_params* params,
                                      xreid_dataset** out_datasets) {
  if (params == nullptr || out_datasets == nullptr) {
    return argument_error("xreid_generate_synthetic: NULL argument");
  }
  return guarded([&] {
    xreid::SynthConfig config;
    config.num_datasets = params->num_datasets;
    config.cameras_per_dataset = params->cameras_per_dataset;
    config.ids_per_dataset = params->ids_per_dataset;
    config.tracklets_per_id_per_camera = params->tracklets_per_id_per_camera;
    config.images_per_tracklet = params->images_per_tracklet;
    config.latent_dim = params->latent_dim;
    config.feature_dim = params->feature_dim;
    config.camera_transform_scale = params->camera_transform_scale;
    config.dataset_shift_scale = params->dataset_shift_scale;
    config.noise_sigma = params->noise_sigma;
    config.cross_camera_id_fraction = params->cross_camera_id_fraction;
    config.seed = params->seed;

    std::vector<xreid::Dataset> datasets = xreid::generate_synthetic(config);
    for (std::size_t i = 0; i < datasets.size(); ++i) {
      out_datasets[i] = new xreid_dataset{std::move(datasets[i])};
    }
  });
}

/* ---- models ------------------------------------------------------------ */

xreid_status xreid_model_load(const char* path, xreid_model** out) {
  if (path == nullptr || out == nullptr) {
    return argument_error("xreid_model_load: NULL argument");
  }
  return guarded([&] {
    xreid::Model model = xreid::load_model(path);
    *out = new xreid_model{std::move(model)};
  });
}

xreid_status xreid_model_save(const xreid_model* model, const char* path) {
  if (model == nullptr || path == nullptr) {
    return argument_error("xreid_model_save: NULL argument");
  }
  return guarded([&] { xreid::save_model(model->value, path); });
}

void xreid_model_free(xreid_model* model) { delete model; }

int64_t xreid_model_input_dim(const xreid_model* model) {
  if (model == nullptr) return 0;
  return static_cast<int64_t>(model->value.input_dim());
}

int64_t xreid_model_hidden_dim(const xreid_model* model) {
  if (model == nullptr) return 0;
  return static_cast<int64_t>(model->value.hidden_dim());
}

int64_t xreid_model_embed_dim(const xreid_model* model) {
  if (model == nullptr) return 0;
  return static_cast<int64_t>(model->value.embed_dim());
}

xreid_status xreid_model_embed(const xreid_model* model,
                               const xreid_dataset* dataset,
                               double* out_embeddings) {
  if (model == nullptr || dataset == nullptr || out_embeddings == nullptr) {
    return argument_error("xreid_model_embed: NULL argument");
  }
  return guarded([&] {
    const xreid::Matrix embed =
        xreid::forward_eval(model->value, dataset->value.features());
    for (xreid::Index i = 0; i < embed.rows(); ++i) {
      for (xreid::Index j = 0; j < embed.cols(); ++j) {
        out_embeddings[i * embed.cols() + j] = embed(i, j);
      }
    }
  });
}

/* ---- training ---------------------------------------------------------- */

void xreid_train_params_init(xreid_train_params* params) {
  if (params == nullptr) return;
  const xreid::TrainConfig defaults;
  params->mode = defaults.mode == xreid::TrainMode::kMerge
                     ? XREID_TRAIN_MERGE
                     : XREID_TRAIN_SWITCH;
  params->switch_order = defaults.switch_order == xreid::SwitchOrder::kRoundRobin
                             ? XREID_SWITCH_ROUND_ROBIN
                             : XREID_SWITCH_PROPORTIONAL;
  params->ids_per_batch = defaults.p;
  params->images_per_id = defaults.k;
  params->margin_kind = defaults.margin.kind == xreid::MarginMode::Kind::kHinge
                            ? XREID_MARGIN_HINGE
                            : XREID_MARGIN_SOFTPLUS;
  params->margin = defaults.margin.margin;
  params->average_anchors = defaults.average_anchors ? 1 : 0;
  params->epochs = defaults.epochs;
  params->lr_start = defaults.lr.lr0;
  params->lr_end = defaults.lr.lr1;
  params->lr_hold_epochs = defaults.lr.epoch_hold;
  params->lr_decay_until = defaults.lr.epoch_end;
  params->hidden_dim = defaults.hidden_dim;
  params->embed_dim = defaults.embed_dim;
  params->dropout_rate = defaults.dropout_rate;
  params->bn_momentum = defaults.bn_momentum;
  params->seed = defaults.seed;
}

xreid_status xreid_train(const xreid_dataset* const* datasets,
                         int64_t num_datasets,
                         const xreid_train_params* params,
                         const char* log_csv_path, xreid_model** out) {
  if (datasets == nullptr || params == nullptr || out == nullptr) {
    return argument_error("xreid_train: NULL argument");
  }
  if (num_datasets < 1) {
    return argument_error("xreid_train: need at least one dataset");
  }
  for (int64_t i = 0; i < num_datasets; ++i) {
    if (datasets[i] == nullptr) {
      return argument_error("xreid_train: NULL dataset in list");
    }
  }
  return guarded([&] {
    xreid::TrainConfig config;
    switch (params->mode) {
      case XREID_TRAIN_MERGE:
        config.mode = xreid::TrainMode::kMerge;
        break;
      case XREID_TRAIN_SWITCH:
        config.mode = xreid::TrainMode::kSwitch;
        break;
      default:
        xreid::Raise(xreid::ErrorCode::kArgument, "unknown training mode");
    }
    switch (params->switch_order) {
      case XREID_SWITCH_ROUND_ROBIN:
        config.switch_order = xreid::SwitchOrder::kRoundRobin;
        break;
      case XREID_SWITCH_PROPORTIONAL:
        config.switch_order = xreid::SwitchOrder::kProportional;
        break;
      default:
        xreid::Raise(xreid::ErrorCode::kArgument, "unknown switch order");
    }
    config.p = static_cast<xreid::Index>(params->ids_per_batch);
    config.k = static_cast<xreid::Index>(params->images_per_id);
    config.margin = margin_of(params->margin_kind, params->margin);
    config.average_anchors = params->average_anchors != 0;
    config.epochs = params->epochs;
    config.lr = xreid::LrSchedule{params->lr_start, params->lr_end,
                                  params->lr_hold_epochs,
                                  params->lr_decay_until};
    config.hidden_dim = static_cast<xreid::Index>(params->hidden_dim);
    config.embed_dim = static_cast<xreid::Index>(params->embed_dim);
    config.dropout_rate = params->dropout_rate;
    config.bn_momentum = params->bn_momentum;
    config.seed = params->seed;

    std::vector<const xreid::Dataset*> list;
    list.reserve(static_cast<std::size_t>(num_datasets));
    for (int64_t i = 0; i < num_datasets; ++i) {
      list.push_back(&datasets[i]->value);
    }

    xreid::TrainResult result = xreid::train(list, config);
    if (log_csv_path != nullptr) result.log.write_csv(log_csv_path);
    *out = new xreid_model{std::move(result.model)};
  });
}

/* ---- fine-tuning and mining -------------------------------------------- */

void xreid_finetune_params_init(xreid_finetune_params* params) {
  if (params == nullptr) return;
  const xreid::FinetuneConfig defaults;
  params->alpha = defaults.alpha;
  params->negatives_per_pair = defaults.negatives_per_pair;
  params->one_to_one = defaults.one_to_one ? 1 : 0;
  params->coocc_scope = XREID_COOCC_BOTH;
  params->ids_per_batch = defaults.p;
  params->images_per_id = defaults.k;
  params->margin_kind = defaults.margin.kind == xreid::MarginMode::Kind::kHinge
                            ? XREID_MARGIN_HINGE
                            : XREID_MARGIN_SOFTPLUS;
  params->margin = defaults.margin.margin;
  params->average_anchors = defaults.average_anchors ? 1 : 0;
  params->epochs = defaults.epochs;
  params->lr_start = defaults.lr0;
  params->lr_end = defaults.lr1;
  params->update_bn_stats = defaults.update_bn_stats ? 1 : 0;
  params->seed = defaults.seed;
  params->threads = defaults.threads;
}

xreid_status xreid_finetune(const xreid_model* base,
                            const xreid_dataset* target,
                            const xreid_finetune_params* params,
                            const char* log_csv_path,
                            const char* pair_report_path, xreid_model** out,
                            xreid_finetune_stats* stats) {
  if (base == nullptr || target == nullptr || params == nullptr ||
      out == nullptr) {
    return argument_error("xreid_finetune: NULL argument");
  }
  return guarded([&] {
    const xreid::CooccurrenceIndex coocc =
        xreid::build_cooccurrence(target->value, scope_of(params->coocc_scope));
    xreid::FinetuneResult result = xreid::finetune(
        base->value, target->value, coocc, finetune_config_of(*params));
    if (log_csv_path != nullptr) result.log.write_csv(log_csv_path);
    if (pair_report_path != nullptr) {
      xreid::write_pair_report(result.mining, pair_report_path);
    }
    if (stats != nullptr) {
      stats->num_pairs = count_pairs(result.mining);
      stats->label_reads = result.label_reads;
      stats->mean_purity = result.mean_purity.value_or(-1.0);
    }
    *out = new xreid_model{std::move(result.model)};
  });
}

xreid_status xreid_mine(const xreid_model* model, const xreid_dataset* target,
                        const xreid_finetune_params* params,
                        const char* pair_report_path,
                        xreid_finetune_stats* stats) {
  if (model == nullptr || target == nullptr || params == nullptr) {
    return argument_error("xreid_mine: NULL argument");
  }
  return guarded([&] {
    const xreid::CooccurrenceIndex coocc =
        xreid::build_cooccurrence(target->value, scope_of(params->coocc_scope));
    xreid::MiningConfig mining;
    mining.alpha = params->alpha;
    mining.negatives_per_pair = params->negatives_per_pair;
    mining.one_to_one = params->one_to_one != 0;
    mining.seed = params->seed;
    xreid::Require(params->threads >= 1, xreid::ErrorCode::kArgument,
                   "threads must be >= 1");
    mining.threads = static_cast<int>(params->threads);

    const std::uint64_t reads_before = target->value.label_reads();
    std::vector<xreid::MinedPairSet> sets =
        xreid::mine_all_pairs(model->value, target->value, coocc, mining);
    const std::uint64_t reads = target->value.label_reads() - reads_before;

    double purity = -1.0;
    if (target->value.fully_labeled() && target->value.size() > 0) {
      purity = xreid::annotate_truth(sets, target->value);
    }
    if (pair_report_path != nullptr) {
      xreid::write_pair_report(sets, pair_report_path);
    }
    if (stats != nullptr) {
      stats->num_pairs = count_pairs(sets);
      stats->label_reads = reads;
      stats->mean_purity = purity;
    }
  });
}

/* ---- evaluation -------------------------------------------------------- */

void xreid_eval_params_init(xreid_eval_params* params) {
  if (params == nullptr) return;
  const xreid::ProtocolConfig defaults;
  params->exclusion =
      defaults.exclusion == xreid::ProtocolConfig::Exclusion::kNone
          ? XREID_EXCLUDE_NONE
          : XREID_EXCLUDE_SAME_CAMERA_SAME_ID;
  params->k_max = defaults.k_max;
  params->tracklet_level = defaults.tracklet_level ? 1 : 0;
}

xreid_status xreid_evaluate(const xreid_model* model,
                            const xreid_dataset* query,
                            const xreid_dataset* gallery,
                            const xreid_eval_params* params,
                            const char* report_path, xreid_eval_result* out) {
  if (model == nullptr || query == nullptr || gallery == nullptr ||
      params == nullptr || out == nullptr) {
    return argument_error("xreid_evaluate: NULL argument");
  }
  return guarded([&] {
    xreid::ProtocolConfig protocol;
    switch (params->exclusion) {
      case XREID_EXCLUDE_SAME_CAMERA_SAME_ID:
        protocol.exclusion =
            xreid::ProtocolConfig::Exclusion::kSameCameraSameId;
        break;
      case XREID_EXCLUDE_NONE:
        protocol.exclusion = xreid::ProtocolConfig::Exclusion::kNone;
        break;
      default:
        xreid::Raise(xreid::ErrorCode::kArgument, "unknown exclusion rule");
    }
    protocol.k_max = static_cast<xreid::Index>(params->k_max);
    protocol.tracklet_level = params->tracklet_level != 0;

    const xreid::EvalReport report = xreid::evaluate_model(
        model->value, query->value, gallery->value, protocol);
    if (report_path != nullptr) xreid::write_eval_report(report, report_path);

    out->rank1 = rank_at(report, 1);
    out->rank5 = rank_at(report, 5);
    out->rank10 = rank_at(report, 10);
    out->rank20 = rank_at(report, 20);
    out->map = report.map;
    out->num_queries = report.num_queries;
  });
}

/* ---- gradient self-check ----------------------------------------------- */

xreid_status xreid_gradcheck(uint64_t seed, int64_t instances,
                             xreid_gradcheck_result* results, int64_t capacity,
                             int64_t* out_count) {
  if (out_count == nullptr) {
    return argument_error("xreid_gradcheck: NULL out_count");
  }
  return guarded([&] {
    const int64_t needed = xreid::gradcheck_suite_count();
    *out_count = needed;
    if (results == nullptr || capacity < needed) return;
    const std::vector<xreid::GradcheckSuite> suites =
        xreid::run_gradcheck(seed, instances);
    for (std::size_t i = 0; i < suites.size(); ++i) {
      xreid_gradcheck_result& slot = results[i];
      std::memset(slot.name, 0, sizeof slot.name);
      std::strncpy(slot.name, suites[i].name.c_str(), sizeof slot.name - 1);
      slot.instances = suites[i].instances;
      slot.max_relative_error = suites[i].max_relative_error;
      slot.tolerance = suites[i].tolerance;
      slot.passed = suites[i].passed ? 1 : 0;
    }
  });
}

} /* extern "C" */
