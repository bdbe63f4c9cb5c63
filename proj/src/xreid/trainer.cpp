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

#include "xreid/trainer.hpp"

#include <cstdio>
#include <fstream>
#include <utility>

#include "xreid/error.hpp"

namespace xreid {

namespace {

// Offsets the user seed so the batch stream and the init draws never share a
// generator state.
constexpr std::uint64_t kStreamSalt = 0x9e3779b97f4a7c15ULL;

Matrix gather_rows(const Dataset& ds, const std::vector<std::size_t>& rows) {
  Matrix x(static_cast<Index>(rows.size()), ds.feature_dim());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    x.row(static_cast<Index>(i)) = ds.features().row(static_cast<Index>(rows[i]));
  }
  return x;
}

}  // namespace

double TrainLog::epoch_mean_loss(std::int64_t epoch) const {
  double sum = 0.0;
  std::int64_t count = 0;
  for (const TrainLogEntry& e : entries) {
    if (e.epoch == epoch) {
      sum += e.loss;
      ++count;
    }
  }
  Require(count > 0, ErrorCode::kArgument,
          "no log entries for epoch " + std::to_string(epoch));
  return sum / static_cast<double>(count);
}

void TrainLog::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) Raise(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  out << "epoch,step,lr,loss,mode,source_dataset\n";
  char buf[96];
  for (const TrainLogEntry& e : entries) {
    std::snprintf(buf, sizeof(buf), "%lld,%lld,%.17g,%.17g,",
                  static_cast<long long>(e.epoch),
                  static_cast<long long>(e.step), e.lr, e.loss);
    out << buf << e.phase << ',' << e.source_dataset << '\n';
  }
  out.flush();
  if (!out) Raise(ErrorCode::kIo, "write error on '" + path + "'");
}

TrainResult train(const std::vector<const Dataset*>& datasets,
                  const TrainConfig& config) {
  Require(!datasets.empty(), ErrorCode::kArgument, "no training datasets");
  Require(config.epochs >= 1, ErrorCode::kArgument, "epochs must be >= 1");
  Require(config.p >= 2 && config.k >= 2, ErrorCode::kArgument,
          "need P >= 2 and K >= 2");
  const Index dim = datasets.front()->feature_dim();
  for (const Dataset* ds : datasets) {
    Require(ds != nullptr, ErrorCode::kArgument, "null dataset");
    Require(ds->feature_dim() == dim, ErrorCode::kArgument,
            "feature dimension mismatch across datasets");
    Require(ds->fully_labeled(), ErrorCode::kArgument,
            "pre-training needs fully labeled datasets");
  }

  const std::int64_t steps = steps_per_epoch(datasets, config.p, config.k);

  std::optional<Dataset> merged;
  std::vector<std::size_t> schedule;
  if (config.mode == TrainMode::kMerge) {
    merged.emplace(merge_datasets(datasets));
  } else if (config.switch_order == SwitchOrder::kRoundRobin) {
    schedule = switch_schedule(datasets.size(),
                               static_cast<std::size_t>(steps));
  } else {
    std::vector<std::size_t> sizes;
    sizes.reserve(datasets.size());
    for (const Dataset* ds : datasets) sizes.push_back(ds->size());
    schedule = switch_schedule_proportional(sizes,
                                            static_cast<std::size_t>(steps));
  }
  const char* phase =
      config.mode == TrainMode::kMerge ? "bh-merge" : "bh-switch";

  TrainResult result;
  result.model =
      init_model(dim, config.hidden_dim, config.embed_dim,
                 config.dropout_rate, config.bn_momentum, config.seed);
  AdamState adam(result.model.params);
  Rng rng(config.seed ^ kStreamSalt);

  for (std::int64_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const double lr = config.lr.at(epoch);
    for (std::int64_t step = 1; step <= steps; ++step) {
      const Dataset* source;
      std::int32_t source_index;
      if (config.mode == TrainMode::kMerge) {
        source = &*merged;
        source_index = kMergedSource;
      } else {
        const std::size_t d = schedule[static_cast<std::size_t>(step - 1)];
        source = datasets[d];
        source_index = static_cast<std::int32_t>(d);
      }

      const BatchLayout batch =
          sample_pk(*source, config.p, config.k, rng, source_index);
      const Matrix x = gather_rows(*source, batch.rows);
      ForwardCache cache;
      const Matrix embed = forward_train(result.model, x, rng, &cache);
      const LossResult loss = batch_hard_loss(
          embed, batch.labels, config.margin, config.average_anchors);
      const Gradients grads = backward(result.model, cache, loss.d_embed);
      adam_step(result.model.params, grads, adam, lr);

      result.log.entries.push_back(
          {epoch, step, lr, loss.loss, phase, source_index});
    }
  }
  result.model.mode = Mode::kEval;
  return result;
}

FinetuneResult finetune(const Model& base, const Dataset& target,
                        const CooccurrenceIndex& coocc,
                        const FinetuneConfig& config) {
  Require(config.epochs >= 0, ErrorCode::kArgument, "epochs must be >= 0");
  Require(config.p >= 2 && config.k >= 2, ErrorCode::kArgument,
          "need P >= 2 and K >= 2");
  Require(config.lr0 > 0.0 && config.lr1 > 0.0, ErrorCode::kArgument,
          "learning rates must be positive");

  FinetuneResult result;
  result.model = base;
  result.model.mode = Mode::kEval;

  // Audit window: from here to the end of training, person labels must not
  // be touched. Everything below runs on tracklet/camera structure only.
  const std::uint64_t reads_before = target.label_reads();

  MiningConfig mining_config;
  mining_config.alpha = config.alpha;
  mining_config.negatives_per_pair = config.negatives_per_pair;
  mining_config.one_to_one = config.one_to_one;
  mining_config.seed = config.seed;
  mining_config.threads = config.threads;
  result.mining = mine_all_pairs(result.model, target, coocc, mining_config);

  std::vector<const MinedPair*> pool;
  std::int64_t positive_images = 0;
  for (const MinedPairSet& set : result.mining) {
    for (const MinedPair& pair : set.pairs) {
      pool.push_back(&pair);
      positive_images += static_cast<std::int64_t>(
          target.tracklet_samples(pair.tracklet_a).size() +
          target.tracklet_samples(pair.tracklet_b).size());
    }
  }
  Require(!pool.empty(), ErrorCode::kState, "mining produced zero pairs");

  const std::int64_t steps =
      std::max<std::int64_t>(positive_images / config.k, 1);
  const LrSchedule schedule{config.lr0, config.lr1, 1,
                            std::max<std::int64_t>(config.epochs, 2)};
  const std::int32_t source_index =
      target.size() > 0 ? target.dataset_id_of(0) : kMergedSource;

  RmspropState rmsprop(result.model.params);
  Rng rng(config.seed ^ kStreamSalt);
  std::vector<std::size_t> order(pool.size());
  result.model.mode = Mode::kTrain;

  for (std::int64_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const double lr = schedule.at(epoch);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[draw_index(rng, i)]);
    }

    for (std::int64_t step = 1; step <= steps; ++step) {
      const MinedPair& pair =
          *pool[order[static_cast<std::size_t>(step - 1) % order.size()]];
      const std::vector<std::size_t> rows =
          build_finetune_batch(pair, target, config.p, config.k, rng);
      const Matrix x = gather_rows(target, rows);

      Vector saved_mean, saved_var;
      if (!config.update_bn_stats) {
        saved_mean = result.model.running_mean;
        saved_var = result.model.running_var;
      }
      ForwardCache cache;
      const Matrix embed = forward_train(result.model, x, rng, &cache);
      if (!config.update_bn_stats) {
        result.model.running_mean = std::move(saved_mean);
        result.model.running_var = std::move(saved_var);
      }

      const LossResult loss = positive_group_batch_hard_loss(
          embed, config.k, config.margin, config.average_anchors);
      const Gradients grads = backward(result.model, cache, loss.d_embed);
      rmsprop_step(result.model.params, grads, rmsprop, lr);

      result.log.entries.push_back(
          {epoch, step, lr, loss.loss, "finetune", source_index});
    }
  }

  result.label_reads = target.label_reads() - reads_before;
  Require(result.label_reads == 0, ErrorCode::kState,
          "label audit failed: " + std::to_string(result.label_reads) +
              " person_id reads during unsupervised adaptation");

  // The audit window is closed; purity may now look at the labels.
  if (target.fully_labeled() && target.size() > 0) {
    result.mean_purity = annotate_truth(result.mining, target);
  }
  result.model.mode = Mode::kEval;
  return result;
}

TwoStageResult finetune_two_stage(const Model& base, const Dataset& train_split,
                                  const Dataset& test_split,
                                  const CooccurrenceIndex& coocc_train,
                                  const CooccurrenceIndex& coocc_test,
                                  const FinetuneConfig& stage1_config,
                                  const FinetuneConfig& stage2_config) {
  TwoStageResult result;
  result.stage1 = finetune(base, train_split, coocc_train, stage1_config);
  result.stage2 =
      finetune(result.stage1.model, test_split, coocc_test, stage2_config);
  return result;
}

}  // namespace xreid
