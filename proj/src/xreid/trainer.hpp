// xreid/trainer.hpp

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

#ifndef XREID_TRAINER_HPP_
#define XREID_TRAINER_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "xreid/dataset.hpp"
#include "xreid/losses.hpp"
#include "xreid/mining.hpp"
#include "xreid/model.hpp"
#include "xreid/optim.hpp"
#include "xreid/sampler.hpp"

namespace xreid {

// merge: every batch drawn from the namespaced union of all datasets.
// switch: every batch drawn from a single dataset, cycling datasets.
enum class TrainMode { kMerge, kSwitch };
enum class SwitchOrder { kRoundRobin, kProportional };

struct TrainConfig {
  TrainMode mode = TrainMode::kSwitch;
  SwitchOrder switch_order = SwitchOrder::kRoundRobin;
  Index p = 18;
  Index k = 4;
  MarginMode margin = MarginMode::softplus();
  bool average_anchors = true;
  std::int64_t epochs = 400;
  LrSchedule lr = train_schedule();
  Index hidden_dim = 1024;
  Index embed_dim = 128;
  double dropout_rate = 0.3;
  double bn_momentum = 0.1;
  std::uint64_t seed = 1;
};

struct TrainLogEntry {
  std::int64_t epoch = 0;
  std::int64_t step = 0;
  double lr = 0.0;
  double loss = 0.0;
  std::string phase;             // bh-merge | bh-switch | finetune
  std::int32_t source_dataset = kMergedSource;
};

struct TrainLog {
  std::vector<TrainLogEntry> entries;

  double epoch_mean_loss(std::int64_t epoch) const;
  // CSV with header epoch,step,lr,loss,mode,source_dataset.
  void write_csv(const std::string& path) const;
};

struct TrainResult {
  Model model;  // returned in EVAL mode
  TrainLog log;
};

// Supervised pre-training with the batch-hard loss and Adam. For kSwitch the
// logged source_dataset is the position of the batch's dataset in `datasets`;
// for kMerge it is -1. Deterministic in config.seed.
TrainResult train(const std::vector<const Dataset*>& datasets,
                  const TrainConfig& config);

struct FinetuneConfig {
  double alpha = 0.1;
  std::int64_t negatives_per_pair = 10;
  Index p = 18;
  Index k = 4;
  MarginMode margin = MarginMode::softplus();
  bool average_anchors = true;
  std::int64_t epochs = 20;  // 0 = mine only, return the model unchanged
  double lr0 = 1e-5;
  double lr1 = 1e-6;
  // Running BN statistics keep absorbing target-domain batches by default.
  bool update_bn_stats = true;
  bool one_to_one = true;
  std::uint64_t seed = 1;
  int threads = 1;
};

struct FinetuneResult {
  Model model;  // returned in EVAL mode
  std::vector<MinedPairSet> mining;
  TrainLog log;
  // person_id accesses during the mining + training window; the training
  // path guarantees 0 and the function fails if the guarantee breaks.
  std::uint64_t label_reads = 0;
  // Mean mining purity across camera pairs; set only when the target carries
  // labels (measured after the audit window closes).
  std::optional<double> mean_purity;
};

// Practically-unsupervised adaptation: mines presumed-positive cross-camera
// pairs and co-occurrence negatives, then trains with the positive-group
// batch-hard loss and RMSProp. Steps per epoch = floor(N_pos / K) where
// N_pos counts the images in all mined pairs. Person labels are never read
// between mining start and training end.
FinetuneResult finetune(const Model& base, const Dataset& target,
                        const CooccurrenceIndex& coocc,
                        const FinetuneConfig& config);

struct TwoStageResult {
  FinetuneResult stage1;
  FinetuneResult stage2;  // stage2.model is the final model
};

// finetune on the training split, then finetune the result on the test
// split. Exactly two chained finetune calls.
TwoStageResult finetune_two_stage(const Model& base, const Dataset& train_split,
                                  const Dataset& test_split,
                                  const CooccurrenceIndex& coocc_train,
                                  const CooccurrenceIndex& coocc_test,
                                  const FinetuneConfig& stage1_config,
                                  const FinetuneConfig& stage2_config);

}  // namespace xreid

#endif  // XREID_TRAINER_HPP_
